#pragma once

// Moments and cumulants of first-order integrals I_1(f), and the long-time CLT diagnostics.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "levychaos/combinatorics.hpp"
#include "levychaos/errors.hpp"
#include "levychaos/measure.hpp"

namespace levychaos {

/// κ_1..κ_N; `values[i]` holds κ_{i+1}.
struct CumulantSequence {
  enum class Normalization { Raw, Standardized };

  std::vector<double> values;
  Normalization normalization = Normalization::Raw;

  double operator[](int n) const { return values.at(static_cast<std::size_t>(n - 1)); }
  int max_order() const { return static_cast<int>(values.size()); }

  /// κ_N / κ_2^{N/2}.
  CumulantSequence standardized() const {
    if (values.size() < 2 || !(values[1] > 0)) throw DivergenceError("standardizing needs κ_2 > 0");
    CumulantSequence out{values, Normalization::Standardized};
    for (std::size_t i = 0; i < values.size(); ++i) {
      out.values[i] = values[i] / std::pow(values[1], 0.5 * static_cast<double>(i + 1));
    }
    return out;
  }
};

/// x_2 = ∫ f² dm over the full domain, x_p = ∫ f^p dm over ℝ₀ for p >= 3; x[p-2] = x_p.
inline std::vector<double> power_integrals_I1(const KernelFactor& f, int N, const ControlMeasure& m) {
  std::vector<double> x;
  for (int p = 2; p <= N; ++p) {
    const double v = m_power_integral(f, p, m, p == 2 ? Domain::Full : Domain::R0);
    if (!std::isfinite(v)) {
      throw DivergenceError("power integral of order " + std::to_string(p) + " diverges");
    }
    x.push_back(v);
  }
  return x;
}

/// E[I_1(f)^N] = B_N(0, x_2, ..., x_N).
inline double moment_I1(const KernelFactor& f, int N, const ControlMeasure& measure,
                        MeasureClass cls = MeasureClass::General) {
  if (N < 1) throw BoundsError("moment order must be >= 1");
  if (N == 1) return 0;
  const auto x = power_integrals_I1(f, N, restrict(measure, cls));
  return bell_eval<double>(N, x);
}

inline CumulantSequence cumulants_I1(const KernelFactor& f, int N_max, const ControlMeasure& measure,
                                     MeasureClass cls = MeasureClass::General) {
  if (N_max < 1) throw BoundsError("cumulant order must be >= 1");
  CumulantSequence out;
  out.values.push_back(0);
  for (double v : power_integrals_I1(f, N_max, restrict(measure, cls))) out.values.push_back(v);
  return out;
}

/// μ_n = Σ_{k=1}^{n} C(n-1,k-1) κ_k μ_{n-k}; returns μ_1..μ_N.
template <class T>
std::vector<T> moments_from_cumulants(const std::vector<T>& kappa) {
  const std::size_t n = kappa.size();
  std::vector<T> mu(n + 1, T(0));
  mu[0] = T(1);
  for (std::size_t i = 1; i <= n; ++i) {
    T s = T(0);
    for (std::size_t k = 1; k <= i; ++k) {
      s += detail::from_bigint<T>(binomial(static_cast<int>(i - 1), static_cast<int>(k - 1))) *
           kappa[k - 1] * mu[i - k];
    }
    mu[i] = s;
  }
  return {mu.begin() + 1, mu.end()};
}

/// Inverse of moments_from_cumulants.
template <class T>
std::vector<T> cumulants_from_moments(const std::vector<T>& mu_in) {
  const std::size_t n = mu_in.size();
  std::vector<T> mu(n + 1);
  mu[0] = T(1);
  for (std::size_t i = 0; i < n; ++i) mu[i + 1] = mu_in[i];
  std::vector<T> kappa(n, T(0));
  for (std::size_t i = 1; i <= n; ++i) {
    T s = mu[i];
    for (std::size_t k = 1; k < i; ++k) {
      s -= detail::from_bigint<T>(binomial(static_cast<int>(i - 1), static_cast<int>(k - 1))) *
           kappa[k - 1] * mu[i - k];
    }
    kappa[i - 1] = s;
  }
  return kappa;
}

/// E[I_1(f_1) ... I_1(f_N)]: sum over singleton-free partitions of per-block integrals,
/// pairs over the full domain and larger blocks over ℝ₀.
inline double expectation_product_order1(const std::vector<KernelFactor>& factors, const ControlMeasure& measure,
                                         MeasureClass cls = MeasureClass::General) {
  const int n = static_cast<int>(factors.size());
  if (n < 1) throw BoundsError("need at least one factor");
  if (n == 1) return 0;
  const ControlMeasure m = restrict(measure, cls);
  std::map<Mask, double> block_value;
  auto block = [&](Mask b) {
    auto it = block_value.find(b);
    if (it != block_value.end()) return it->second;
    std::vector<KernelFactor> fs;
    for (int j = 0; j < n; ++j) {
      if ((b >> j) & 1U) fs.push_back(factors[j]);
    }
    const double v = m_product_integral(fs, m, cardinality(b) == 2 ? Domain::Full : Domain::R0);
    block_value.emplace(b, v);
    return v;
  };
  double total = 0;
  for_each_partition_no_singletons(n, [&](const std::vector<Mask>& blocks) {
    double p = 1;
    for (Mask b : blocks) {
      const double v = block(b);
      if (v == 0) {
        p = 0;
        break;
      }
      p *= v;
    }
    if (p != 0) total += p;
  });
  return total;
}

// ---------------------------------------------------------------------------
// Long-time behaviour of I_1(g h)_T

struct CltScanResult {
  std::vector<double> T_grid;
  std::vector<int> orders;                  ///< N = 3..N_max
  std::vector<std::vector<double>> ratios;  ///< ratios[i][t] for orders[i], T_grid[t]
  std::vector<double> limit_targets;        ///< per order; NaN when no closed-form limit applies
  double normalization = 1;                 ///< h was divided by this (its L²(ρ) norm)
  std::string standardization = "kappa_N / kappa_2^(N/2)";
};

/// ‖h‖ in L²(σ²δ₀ + ν).
inline double rho_norm(const SpaceFactor& h, const ControlMeasure& m) {
  const double v = m.sigma2 * h.h0 * h.h0 + (m.nu.is_empty() ? 0.0 : nu_integral(h.pow(2), m.nu));
  if (!std::isfinite(v)) throw DivergenceError("space factor is not square integrable");
  return std::sqrt(v);
}

namespace detail {

inline bool positive_on(const TimeFactor& g, double T) {
  for (int i = 0; i <= 256; ++i) {
    if (!(g(T * i / 256.0) > 0)) return false;
  }
  return true;
}

/// ∫g^N / (∫g²)^{N/2}.
inline double time_ratio(const TimeFactor& g, int N, double T) {
  if (!g.is_polynomial() && positive_on(g, T)) {
    const double ln = log_time_integral(g.pow(N), T);
    const double l2 = log_time_integral(g.pow(2), T);
    return std::exp(ln - 0.5 * N * l2);
  }
  return time_integral(g, N, T) / std::pow(time_integral(g, 2, T), 0.5 * N);
}

/// Limit of the time ratio as T -> ∞ for the shapes where it is known in closed form.
inline double time_ratio_limit(const TimeFactor& g, int N) {
  const auto& ex = g.exp_terms();
  if (ex.empty()) return 0.0;
  if (ex.size() == 1 && ex[0].rate > 0 && g.pieces().size() == 1 && g.pieces()[0].degree() == 0) {
    const double a = ex[0].alpha, c = ex[0].rate;
    if (a < 1) return 0.0;
    if (a > 1) return kInf;
    return std::pow(2 * c, 0.5 * N) / (N * c);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// Standardized cumulants of I_1(g h)_T over a grid of horizons, with h rescaled to unit
/// L²(ρ) norm.
inline CltScanResult clt_scan(const TimeFactor& g, const SpaceFactor& h, const ControlMeasure& measure, int N_max,
                              const std::vector<double>& T_grid) {
  if (N_max < 3) throw BoundsError("clt scan needs N_max >= 3");
  if (T_grid.empty()) throw BoundsError("empty horizon grid");
  CltScanResult out;
  out.T_grid = T_grid;
  out.normalization = rho_norm(h, measure);
  if (!(out.normalization > 0)) throw DivergenceError("space factor has zero L2(rho) norm");
  const SpaceFactor hn = h.scaled(1.0 / out.normalization);
  for (int N = 3; N <= N_max; ++N) {
    const double nu_h = measure.nu.is_empty() ? 0.0 : nu_integral(hn.pow(N), measure.nu);
    out.orders.push_back(N);
    std::vector<double> row;
    for (double T : T_grid) {
      if (!(T > 0)) throw BoundsError("horizons must be positive");
      row.push_back(nu_h == 0 ? 0.0 : nu_h * detail::time_ratio(g, N, T));
    }
    out.ratios.push_back(std::move(row));
    const double lim = detail::time_ratio_limit(g, N);
    out.limit_targets.push_back(nu_h == 0 ? 0.0 : (std::isinf(lim) ? std::copysign(kInf, nu_h) : nu_h * lim));
  }
  return out;
}

/// Cumulants of the limit variable: κ_1 = 0, κ_N = ν(h^N)·2^{N/2}/N with h of unit L²(ρ) norm.
inline CumulantSequence y_limit_cumulants(const SpaceFactor& h, const ControlMeasure& measure, int N_max) {
  if (N_max < 1) throw BoundsError("cumulant order must be >= 1");
  const double norm = rho_norm(h, measure);
  if (!(norm > 0)) throw DivergenceError("space factor has zero L2(rho) norm");
  const SpaceFactor hn = h.scaled(1.0 / norm);
  CumulantSequence out;
  out.values.push_back(0);
  for (int N = 2; N <= N_max; ++N) {
    const double nu_h = measure.nu.is_empty() ? 0.0 : nu_integral(hn.pow(N), measure.nu);
    out.values.push_back(nu_h * std::pow(2.0, 0.5 * N) / N);
  }
  return out;
}

}  // namespace levychaos
