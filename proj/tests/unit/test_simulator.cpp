#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levychaos/simulator.hpp"
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

const KernelFactor kOne{TimeFactor::constant(1), SpaceFactor::constant(1), Domain::Full};

bool within(const Statistic& s, double target, double k = 4) { return std::abs(s.mean - target) < k * s.se; }

}  // namespace

TEST_CASE("order-1 Poisson sample is a centered count") {
  const ControlMeasure m = unit_poisson(2.5);
  auto rng = block_rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    const double v = sample_I1(kOne, m, rng) + 2.5;
    CHECK(v >= 0);
    CHECK(v == std::round(v));
  }
}

TEST_CASE("pathwise values for hand-made paths") {
  const double T = 1.3;
  const ControlMeasure m = unit_poisson(T);
  PathSampler s({{{kOne, kOne}, "k2"}, {{kOne, kOne, kOne}, "k3"}, {{kOne}, "k1"}}, m);

  // No jumps: J_1(t) = -t, J_2 = ∫ t dt, J_3 = -∫ t²/2 dt.
  const auto empty = s.evaluate(PathSample{});
  CHECK_THAT(empty[0], WithinRel(T * T, 1e-14));
  CHECK_THAT(empty[1], WithinRel(-T * T * T, 1e-14));
  CHECK_THAT(empty[2], WithinRel(-T, 1e-15));

  // I_1(1)² = I_2(1⊗1) + I_1(1) + T, so I_2 = (n - T)² - n for n jumps.
  levychaos::testing::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    PathSample p;
    const int n = gen.integer(0, 6);
    for (int i = 0; i < n; ++i) p.jump_times.push_back(gen.real(0, T));
    std::sort(p.jump_times.begin(), p.jump_times.end());
    p.jump_atoms.assign(static_cast<std::size_t>(n), 0);
    const auto v = s.evaluate(p);
    const double x = n - T;
    CHECK_THAT(v[0], WithinRel(x * x - n, 1e-12) || Catch::Matchers::WithinAbs(0, 1e-12));
    CHECK_THAT(v[2], WithinRel(x, 1e-14) || Catch::Matchers::WithinAbs(0, 1e-14));
    // I_1 · I_2 = I_3 + 2 I_2 + 2T I_1, which gives I_3 from the other two.
    const double i3 = v[2] * v[0] - 2 * v[0] - 2 * T * v[2];
    CHECK_THAT(v[1], WithinRel(i3, 1e-11) || Catch::Matchers::WithinAbs(0, 1e-11));
  }
}

TEST_CASE("Gaussian part has the closed-form variance") {
  ControlMeasure m;
  m.sigma2 = 0.6;
  m.T = 2;
  const KernelFactor f{TimeFactor::monomial(1, 1), SpaceFactor::constant(1.5), Domain::Full};
  const auto r = empirical_product_moments({{{f}, "f"}}, m, 200000, 3);
  const double var = 0.6 * 2.25 * 8.0 / 3.0;
  CHECK(within(r.statistics[0], 0));
  CHECK(within(r.statistics[1], var));
  REQUIRE(r.statistics[1].target);
  CHECK_THAT(*r.statistics[1].target, WithinRel(var, 1e-14));
}

TEST_CASE("empirical product moments") {
  SECTION("two unit Poisson integrals") {
    const auto r = empirical_product_moments({{{kOne}, "f"}, {{kOne}, "g"}}, unit_poisson(), 200000, 42);
    CHECK(r.rng == std::string(kRngAlgorithm));
    CHECK(r.statistics[0].name == "product_mean");
    CHECK(*r.statistics[0].target == 1.0);
    CHECK(within(r.statistics[0], 1.0));
    CHECK_THAT(*r.statistics[1].target, WithinRel(4.0, 1e-14));
    CHECK(within(r.statistics[1], 4.0));
  }
  SECTION("two Brownian integrals") {
    ControlMeasure m;
    m.sigma2 = 1;
    const KernelFactor f{TimeFactor::monomial(1, 1), SpaceFactor::constant(1), Domain::Full};
    const auto r = empirical_product_moments({{{f}, "f"}, {{kOne}, "g"}}, m, 200000, 42);
    CHECK_THAT(*r.statistics[0].target, WithinRel(0.5, 1e-15));
    CHECK(within(r.statistics[0], 0.5));
  }
  SECTION("three unit Poisson integrals") {
    const auto r = empirical_product_moments(std::vector<TensorKernel>(3, {{kOne}, "f"}), unit_poisson(), 200000, 42);
    CHECK(*r.statistics[0].target == 1.0);
    CHECK(within(r.statistics[0], 1.0));
  }
  SECTION("iterated integral of order 2") {
    const auto r = empirical_product_moments({{{kOne, kOne}, "k"}}, unit_poisson(), 200000, 9);
    // E[J_2²] = E[I_2²]/4 = 1/2.
    CHECK_THAT(*r.statistics[1].target / 4, WithinRel(0.5, 1e-14));
    CHECK(within(r.statistics[1], 2.0));
    CHECK(within(r.statistics[0], 0.0));
  }
}

TEST_CASE("sample_Jk_purejump divides by k!") {
  const ControlMeasure m = unit_poisson(1.3);
  const TensorKernel k{{kOne, kOne}, "k"};
  auto r1 = block_rng(1, 0), r2 = block_rng(1, 0);
  PathSampler s({k}, m);
  CHECK_THAT(sample_Jk_purejump(k, m, r1), WithinRel(s.evaluate(s.draw(r2))[0] / 2, 1e-15) ||
                                               Catch::Matchers::WithinAbs(0, 1e-15));
}

TEST_CASE("unsupported kernels") {
  const KernelFactor e{TimeFactor::exp_pow(1.0), SpaceFactor::constant(1), Domain::Full};
  CHECK_THROWS_AS(PathSampler({{{kOne, kOne, kOne, kOne}, "k4"}}, unit_poisson()), UnsupportedKernelError);
  CHECK_THROWS_AS(PathSampler({{{kOne, e}, "exp"}}, unit_poisson()), UnsupportedKernelError);
  ControlMeasure mixed = unit_poisson();
  mixed.sigma2 = 1;
  CHECK_THROWS_AS(PathSampler({{{kOne, kOne}, "k2"}}, mixed), UnsupportedKernelError);
  CHECK_NOTHROW(PathSampler({{{e}, "exp"}}, mixed));
}

TEST_CASE("power families are truncated with a reported bias") {
  ControlMeasure m;
  m.nu = LevyMeasure::power_family({1, 0.5, 1, 0.5});
  const KernelFactor f{TimeFactor::constant(1), SpaceFactor::power_law(0, 1), Domain::Full};
  PathSampler s({{{f}, "f"}}, m);
  CHECK(s.truncated());
  CHECK(s.tail_mass() > 0);
  CHECK(s.tail_mass() <= kDefaultTailMass);
  CHECK(s.truncation_bias() >= 0);
  CHECK(s.truncation_bias() < 1e-12);
  const auto r = empirical_product_moments({{{f}, "f"}}, m, 100000, 5);
  CHECK(r.truncated);
  CHECK(within(r.statistics[1], m_power_integral(f, 2, m)));
}

TEST_CASE("thread count does not change results") {
  const auto run = [] { return empirical_product_moments({{{kOne}, "f"}, {{kOne}, "g"}}, unit_poisson(), 20000, 77); };
  EmpiricalMoments a, b;
  {
    levychaos::testing::ScopedThreads t("1");
    a = run();
  }
  {
    levychaos::testing::ScopedThreads t("4");
    b = run();
  }
  CHECK(a.statistics[0].mean == b.statistics[0].mean);
  CHECK(a.statistics[1].se == b.statistics[1].se);
}

TEST_CASE("simulator properties") {
  for (const auto& r : levychaos::testing::simulator_properties()) {
    INFO(r.name << ": " << r.failures << "/" << r.cases << " failed; " << r.first_failure);
    CHECK(r.passed());
  }
}
