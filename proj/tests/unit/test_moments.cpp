#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levychaos/moments.hpp"
#include "support/properties.hpp"

using namespace levychaos;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ControlMeasure unit_poisson(double T) {
  ControlMeasure m;
  m.nu = LevyMeasure::finite({{1.0, 1.0}});
  m.T = T;
  return m;
}

const KernelFactor kOne{TimeFactor::constant(1), SpaceFactor::constant(1), Domain::Full};

/// Central moments of a Poisson(λ) variable: μ_{n+1} = λ Σ_{k<n} C(n,k) μ_k.
std::vector<Rational> centered_poisson_moments(const Rational& lambda, int n_max) {
  std::vector<Rational> mu{Rational(1), Rational(0)};
  for (int n = 1; n < n_max; ++n) {
    Rational s = 0;
    for (int k = 0; k < n; ++k) s += Rational(binomial(n, k)) * mu[static_cast<std::size_t>(k)];
    mu.push_back(lambda * s);
  }
  return mu;
}

// ∫_0^T e^{N t^α} dt / (∫_0^T e^{2 t^α} dt)^{N/2} at 40 digits (tests/oracles/clt_oracle.py).
struct RatioRow {
  double alpha;
  int N;
  double at5, at10, at50;
};
const RatioRow kRatios[] = {
    {0.5, 3, 0.55193776297922381, 0.43394813031494158, 0.26666663082956257},
    {0.5, 4, 0.32732934040780596, 0.20530709966254627, 0.078986055437257904},
    {0.5, 5, 0.20340890918619611, 0.10237339122157242, 0.024831004799095902},
    {1.0, 3, 0.94287296199518127, 0.94280904449688656, 0.94280904158206337},
    {1.0, 4, 1.0000908039820194, 1.0000000041223073, 1.0},
    {1.0, 5, 1.1314992704784484, 1.1313708557282989, 1.131370849898476},
    {2.0, 3, 2.9558542180733231, 4.2075248618167007, 9.4273045254386729},
    {2.0, 4, 9.846564142585229, 19.924588293161151, 99.984996748286184},
    {2.0, 5, 35.011977632134723, 100.65928604902166, 1131.1332207596746},
};

}  // namespace

TEST_CASE("Poisson moments follow the centered recursion") {
  for (double T : {0.5, 1.0, 3.0}) {
    const auto mu = centered_poisson_moments(Rational(static_cast<long long>(T * 2), 2), 8);
    const ControlMeasure m = unit_poisson(T);
    for (int N = 1; N <= 8; ++N) {
      INFO("T=" << T << " N=" << N);
      CHECK_THAT(moment_I1(kOne, N, m), WithinRel(mu[static_cast<std::size_t>(N)].convert_to<double>(), 1e-12));
    }
    CHECK(moment_I1(kOne, 2, m) == T);
    CHECK(moment_I1(kOne, 3, m) == T);
    CHECK_THAT(moment_I1(kOne, 4, m), WithinRel(3 * T * T + T, 1e-15));
  }
}

TEST_CASE("Gaussian moments") {
  ControlMeasure m;
  m.sigma2 = 0.8;
  m.T = 1.7;
  const KernelFactor f{TimeFactor::monomial(1.5, 1), SpaceFactor::constant(1.2), Domain::Full};
  const double var = 0.8 * 1.44 * time_integral(f.time, 2, m.T);
  CHECK_THAT(moment_I1(f, 4, m, MeasureClass::BrownianOnly), WithinRel(3 * var * var, 1e-13));
  CHECK(moment_I1(f, 1, m) == 0);
  CHECK(moment_I1(f, 5, m) == 0);

  const auto k = cumulants_I1(f, 6, m, MeasureClass::BrownianOnly);
  CHECK(k[1] == 0);
  CHECK_THAT(k[2], WithinRel(var, 1e-14));
  for (int N = 3; N <= 6; ++N) CHECK(k[N] == 0);
}

TEST_CASE("cumulants and moment conversion") {
  const auto k = cumulants_I1(kOne, 6, unit_poisson(2.5));
  CHECK(k.max_order() == 6);
  CHECK(k[1] == 0);
  for (int N = 2; N <= 6; ++N) CHECK(k[N] == 2.5);
  const auto s = k.standardized();
  CHECK(s.normalization == CumulantSequence::Normalization::Standardized);
  CHECK(s[2] == 1);

  const auto mu = moments_from_cumulants(k.values);
  for (int N = 1; N <= 6; ++N) CHECK_THAT(mu[static_cast<std::size_t>(N - 1)], WithinRel(moment_I1(kOne, N, unit_poisson(2.5)), 1e-13) || WithinAbs(0, 1e-15));

  ControlMeasure fam;
  fam.nu = LevyMeasure::power_family({1, 0.5, 1, 0.5});
  const KernelFactor h{TimeFactor::constant(1), SpaceFactor::power_law(0, -0.25), Domain::Full};
  CHECK_THROWS_WITH(moment_I1(h, 4, fam), Catch::Matchers::ContainsSubstring("order 4"));
  CHECK_NOTHROW(moment_I1(h, 3, fam));
}

TEST_CASE("order-1 product expectations") {
  const ControlMeasure m = unit_poisson(1.5);
  const KernelFactor a{TimeFactor::monomial(1, 1), SpaceFactor::constant(2), Domain::Full};
  const KernelFactor b{TimeFactor::constant(3), SpaceFactor::constant(1), Domain::Full};
  const KernelFactor c{TimeFactor::monomial(1, 2), SpaceFactor::constant(-1), Domain::Full};
  // single block {1,2,3}: ∫ t·3·t² dt · (2·1·(-1)) over [0, 1.5]
  CHECK_THAT(expectation_product_order1({a, b, c}, m), WithinRel(-2 * 3 * std::pow(1.5, 4) / 4, 1e-14));
  CHECK(expectation_product_order1({a, b}, m) == m_product_integral({a, b}, m));
  CHECK(expectation_product_order1({a, a, a, a}, m) == moment_I1(a, 4, m));
}

TEST_CASE("CLT ratios match the high-precision oracle") {
  ControlMeasure m = unit_poisson(1);
  for (const auto& row : kRatios) {
    const auto scan = clt_scan(TimeFactor::exp_pow(row.alpha), SpaceFactor::constant(1), m, row.N, {5.0, 10.0, 50.0});
    const auto& r = scan.ratios.back();
    INFO("alpha=" << row.alpha << " N=" << row.N);
    CHECK_THAT(r[0], WithinRel(row.at5, 1e-9));
    CHECK_THAT(r[1], WithinRel(row.at10, 1e-9));
    CHECK_THAT(r[2], WithinRel(row.at50, 1e-9));
    const double limit = scan.limit_targets.back();
    if (row.alpha < 1) CHECK(limit == 0);
    if (row.alpha == 1) CHECK_THAT(limit, WithinRel(std::pow(2.0, row.N / 2.0) / row.N, 1e-15));
    if (row.alpha > 1) CHECK(limit == kInf);
  }
}

TEST_CASE("CLT scan for a constant time factor decays like T^(1-N/2)") {
  ControlMeasure m;
  m.nu = LevyMeasure::finite({{1.0, 0.5}, {-1.0, 0.5}});
  const SpaceFactor h = SpaceFactor::tabulated(0, {1.0, 1.0});
  const auto scan = clt_scan(TimeFactor::constant(2), h, m, 5, {1.0, 4.0, 100.0});
  for (std::size_t i = 0; i < scan.orders.size(); ++i) {
    const int N = scan.orders[i];
    for (std::size_t t = 0; t < scan.T_grid.size(); ++t) {
      CHECK_THAT(scan.ratios[i][t], WithinRel(std::pow(scan.T_grid[t], 1 - N / 2.0), 1e-13));
    }
    CHECK(scan.limit_targets[i] == 0);
  }
  CHECK(scan.normalization == 1);
  CHECK(scan.standardization == "kappa_N / kappa_2^(N/2)");
}

TEST_CASE("limit cumulants") {
  const ControlMeasure m = unit_poisson(1);
  const auto y = y_limit_cumulants(SpaceFactor::constant(1), m, 6);
  CHECK(y[1] == 0);
  CHECK(y[2] == 1);
  CHECK_THAT(y[3], WithinRel(0.94280904158206337, 1e-15));
  CHECK_THAT(y[6], WithinRel(1.3333333333333333, 1e-15));

  ControlMeasure two;
  two.nu = LevyMeasure::finite({{1.0, 1.0}, {2.0, 3.0}});
  const auto y2 = y_limit_cumulants(SpaceFactor::tabulated(0, {1.0, 2.0}), two, 4);
  CHECK_THAT(y2[2], WithinRel(1.0, 1e-15));
}

TEST_CASE("moments properties") {
  for (const auto& r : levychaos::testing::moments_properties()) {
    INFO(r.name << ": " << r.failures << "/" << r.cases << " failed; " << r.first_failure);
    CHECK(r.passed());
  }
}
