#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levychaos/product_formula.hpp"
#include "support/properties.hpp"

using namespace levychaos;
using Catch::Matchers::WithinRel;

namespace {

ControlMeasure unit_poisson(double T = 1) {
  ControlMeasure m;
  m.nu = LevyMeasure::finite({{1.0, 1.0}});
  m.T = T;
  return m;
}

ControlMeasure two_atoms() {
  ControlMeasure m;
  m.sigma2 = 0.7;
  m.nu = LevyMeasure::finite({{1.0, 0.5}, {-2.0, 1.5}});
  m.T = 1.3;
  return m;
}

KernelFactor tab(TimeFactor g, double h0, std::vector<double> v) {
  return {std::move(g), SpaceFactor::tabulated(h0, std::move(v)), Domain::Full};
}

ExponentPair pair(std::vector<int> orders, std::vector<int> l, std::vector<int> lo) {
  return {std::move(orders), std::move(l), std::move(lo)};
}

/// Permanent as a plain sum over permutations.
double permanent_by_definition(const std::vector<std::vector<double>>& a) {
  std::vector<int> p(a.size());
  std::iota(p.begin(), p.end(), 0);
  double s = 0;
  do {
    double prod = 1;
    for (std::size_t i = 0; i < a.size(); ++i) prod *= a[i][static_cast<std::size_t>(p[i])];
    s += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return s;
}

}  // namespace

TEST_CASE("star contraction of two order-1 kernels") {
  const ControlMeasure m = two_atoms();
  const KernelFactor f = tab(TimeFactor::monomial(1, 1), 0.5, {1.0, 2.0});
  const KernelFactor g = tab(TimeFactor::constant(2), -1.0, {3.0, 0.5});
  const std::vector<TensorKernel> ks{{{f}, "f"}, {{g}, "g"}};

  const StarTerm contracted = star_contract(ks, pair({1, 1}, {0, 0, 0}, {0, 0, 1}), m, MeasureClass::General);
  REQUIRE(contracted.components.size() == 1);
  CHECK(contracted.components[0].factors.empty());
  CHECK(contracted.scalar() == m_product_integral({f, g}, m, Domain::Full));
  CHECK(contracted.coefficient == 1);

  const StarTerm identified = star_contract(ks, pair({1, 1}, {0, 0, 1}, {0, 0, 0}), m, MeasureClass::General);
  REQUIRE(identified.components.size() == 1);
  CHECK(identified.components[0].scalar == 1);
  REQUIRE(identified.components[0].factors.size() == 1);
  CHECK(identified.components[0].factors[0] == pointwise_product({f, g}, Domain::R0));
  CHECK(identified.components[0].factors[0].effective_h0() == 0);

  const ChaosExpansion e = expand_product(ks, m, MeasureClass::General);
  CHECK(e.term_count(0) == 1);
  CHECK(e.term_count(1) == 1);
  CHECK(e.term_count(2) == 1);
  CHECK(e.expectation() == m_product_integral({f, g}, m));

  CHECK_THROWS_AS(star_contract(ks, pair({1, 1}, {1, 0, 0}, {0, 0, 0}), m, MeasureClass::General), BoundsError);
}

TEST_CASE("singleton contractions are never produced") {
  const ControlMeasure m = unit_poisson();
  const KernelFactor f = tab(TimeFactor::constant(1), 0, {1.0});
  const std::vector<TensorKernel> ks{{{f, f}, "f"}, {{f}, "g"}};
  for (const auto& [k, terms] : expand_product(ks, m, MeasureClass::General).terms_by_order) {
    for (const auto& t : terms) {
      for (int j = 1; j <= 2; ++j) CHECK(t.exponents.l_o[static_cast<std::size_t>(j - 1)] == 0);
    }
  }
}

TEST_CASE("classical Gaussian product coefficients") {
  ControlMeasure m;
  m.sigma2 = 1;
  const KernelFactor u{TimeFactor::constant(1), SpaceFactor::constant(1), Domain::Full};
  for (int n = 1; n <= 4; ++n) {
    for (int mm = 1; mm <= 4; ++mm) {
      const std::vector<TensorKernel> ks{{std::vector<KernelFactor>(n, u), "a"}, {std::vector<KernelFactor>(mm, u), "b"}};
      const ChaosExpansion e = expand_product(ks, m, MeasureClass::BrownianOnly);
      for (int r = 0; r <= std::min(n, mm); ++r) {
        const auto& level = e.terms_by_order.at(n + mm - 2 * r);
        REQUIRE(level.size() == 1);
        CHECK(level[0].coefficient == Rational(factorial(r) * binomial(n, r) * binomial(mm, r)));
      }
    }
  }
}

TEST_CASE("expectations") {
  const ControlMeasure m = two_atoms();
  const KernelFactor f = tab(TimeFactor::monomial(1, 1), 0.5, {1.0, 2.0});
  const KernelFactor g = tab(TimeFactor::constant(2), -1.0, {3.0, 0.5});
  CHECK(expectation_of_product({{{f}, "f"}, {{g}, "g"}}, m, MeasureClass::General) == m_product_integral({f, g}, m));

  ControlMeasure bm;
  bm.sigma2 = 2;
  const KernelFactor b{TimeFactor::constant(1), SpaceFactor::constant(1), Domain::Full};
  CHECK(expectation_of_product(std::vector<TensorKernel>(3, {{b}, "b"}), bm, MeasureClass::BrownianOnly) == 0);
  CHECK(expectation_of_product(std::vector<TensorKernel>(5, {{b}, "b"}), bm, MeasureClass::BrownianOnly) == 0);

  const double f2 = m_power_integral(f, 2, m), f4 = m_power_integral(f, 4, m, Domain::R0);
  CHECK_THAT(expectation_of_product(std::vector<TensorKernel>(4, {{f}, "f"}), m, MeasureClass::General),
             WithinRel(3 * f2 * f2 + f4, 1e-13));
}

TEST_CASE("square-integrability check") {
  const ControlMeasure m = two_atoms();
  const KernelFactor f = tab(TimeFactor::monomial(1, 1), 0.5, {1.0, 2.0});
  CHECK(check_l2_condition({{{f, f}, "f"}, {{f}, "g"}}, m, MeasureClass::General).passed);

  ControlMeasure fam;
  fam.nu = LevyMeasure::power_family({1, 0.5, 1, 0.5});
  const KernelFactor h{TimeFactor::constant(1), SpaceFactor::power_law(0, -0.25), Domain::Full};
  CHECK(std::isfinite(m_power_integral(h, 2, fam)));
  const std::vector<TensorKernel> ks{{{h}, "f"}, {{h}, "f"}};
  const L2Report report = check_l2_condition(ks, fam, MeasureClass::General);
  CHECK_FALSE(report.passed);
  const auto failures = report.failures();
  REQUIRE(failures.size() == 1);
  CHECK(format_exponents(failures[0].exponents) == "l=[1 on {1,2}] l_o=[]");
  CHECK(failures[0].norm2 == kInf);

  try {
    expand_product(ks, fam, MeasureClass::General);
    FAIL("expected a divergence error");
  } catch (const DivergenceError& e) {
    CHECK(std::string(e.what()).find("l=[1 on {1,2}]") != std::string::npos);
  }
  const ChaosExpansion forced = expand_product(ks, fam, MeasureClass::General, true);
  CHECK(expansion_second_moment(forced, fam) == kInf);

  ControlMeasure bm;
  bm.sigma2 = 1;
  bm.nu = fam.nu;
  const KernelFactor hb{TimeFactor::constant(1), SpaceFactor::power_law(1, -0.25), Domain::Full};
  CHECK(check_l2_condition({{{hb}, "f"}, {{hb}, "f"}}, bm, MeasureClass::BrownianOnly).passed);
}

TEST_CASE("permanents") {
  for (int n = 1; n <= 6; ++n) {
    const std::vector<std::vector<double>> ones(n, std::vector<double>(n, 1.0));
    CHECK(permanent(ones) == std::tgamma(n + 1.0));
  }
  levychaos::testing::Gen gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen.integer(1, 6);
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (auto& row : a) {
      for (auto& v : row) v = gen.real(-2, 2);
    }
    CHECK_THAT(permanent(a), WithinRel(permanent_by_definition(a), 1e-11));
  }
  CHECK(permanent({}) == 1);
}

TEST_CASE("second moments") {
  const ControlMeasure m = two_atoms();
  const KernelFactor u = tab(TimeFactor::monomial(1, 1), 0.5, {1.0, 2.0});
  const KernelFactor v = tab(TimeFactor::constant(2), -1.0, {3.0, 0.5});

  const ChaosExpansion single = expand_product({{{u}, "u"}}, m, MeasureClass::General);
  CHECK(expansion_second_moment(single, m) == m_power_integral(u, 2, m));

  // E[I_2(sym(u⊗v))²] = 2!·‖sym(u⊗v)‖² = <u,u><v,v> + <u,v>².
  const double uu = m_power_integral(u, 2, m), vv = m_power_integral(v, 2, m), uv = m_product_integral({u, v}, m);
  const ChaosExpansion order2 = expand_product({{{u, v}, "uv"}}, m, MeasureClass::General);
  CHECK_THAT(expansion_second_moment(order2, m), WithinRel(uu * vv + uv * uv, 1e-14));
  CHECK_THAT(gram_permanent({u, v}, {u, v}, m), WithinRel(uu * vv + uv * uv, 1e-14));

  // (N_1 - 1)^4 for a unit Poisson variable: 3 + 1.
  const ControlMeasure p = unit_poisson();
  const KernelFactor one = tab(TimeFactor::constant(1), 0, {1.0});
  const ChaosExpansion sq = expand_product({{{one}, "f"}, {{one}, "g"}}, p, MeasureClass::General);
  CHECK_THAT(expansion_second_moment(sq, p), WithinRel(4.0, 1e-14));

  // I_2(1⊗1) on the unit Poisson measure: 2!·T² = 2, so E[J_2²] = 1/2.
  const ChaosExpansion j2 = expand_product({{{one, one}, "k"}}, p, MeasureClass::General);
  CHECK_THAT(expansion_second_moment(j2, p) / 4, WithinRel(0.5, 1e-14));
}

TEST_CASE("pure-power kernels") {
  // Three kernels α_j^{⊗m_j}: every term has exactly one component of weight 1.
  const ControlMeasure m = two_atoms();
  const std::vector<KernelFactor> a{tab(TimeFactor::constant(1), 1, {1, -1}), tab(TimeFactor::monomial(2, 1), 0.5, {2, 1}),
                                    tab(TimeFactor::constant(-1), 2, {0.5, 0.5})};
  const std::vector<TensorKernel> ks{{{a[0], a[0]}, "a1"}, {{a[1]}, "a2"}, {{a[2], a[2]}, "a3"}};
  const ChaosExpansion e = expand_product(ks, m, MeasureClass::General);
  std::size_t total = 0;
  for (const auto& [k, terms] : e.terms_by_order) {
    for (const auto& t : terms) {
      REQUIRE(t.components.size() == 1);
      CHECK(t.components[0].weight == 1);
      CHECK(static_cast<int>(t.components[0].factors.size()) == k);
      ++total;
    }
  }
  CHECK(total == enumerate_dn(std::vector<int>{2, 1, 2}).size());
}

TEST_CASE("product formula properties") {
  for (const auto& r : levychaos::testing::product_formula_properties()) {
    INFO(r.name << ": " << r.failures << "/" << r.cases << " failed; " << r.first_failure);
    CHECK(r.passed());
  }
}
