#pragma once

// Monte Carlo oracle: exact sampling of Gaussian functionals and finite-activity jump paths,
// with pathwise evaluation of first-order and iterated pure-jump integrals.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "levychaos/errors.hpp"
#include "levychaos/measure.hpp"
#include "levychaos/product_formula.hpp"

namespace levychaos {

inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-block-v1";
inline constexpr std::size_t kPathsPerBlock = 4096;
inline constexpr double kDefaultTailMass = 1e-12;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Generator for block `block` of a run seeded with `seed`.
inline std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(block + 1)));
}

/// Worker count: LEVYCHAOS_THREADS if set, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("LEVYCHAOS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

struct PathSample {
  std::vector<double> jump_times;        ///< sorted, in (0, T]
  std::vector<std::size_t> jump_atoms;   ///< atom index per jump
  std::vector<double> gaussian;          ///< Gaussian parts of the order-1 kernels
};

/// Draws paths of (W, N) on [0, T] and evaluates I_{m_j}(f^(j)) for a list of kernels.
class PathSampler {
 public:
  PathSampler(std::vector<TensorKernel> kernels, const ControlMeasure& measure,
              double tail_mass = kDefaultTailMass)
      : kernels_(std::move(kernels)), measure_(measure) {
    measure.validate();
    if (measure.nu.is_family()) {
      const LevyMeasure full = measure.nu;
      measure_.nu = full.truncated(tail_mass);
      truncated_ = true;
      tail_mass_ = full.total_mass() - measure_.nu.total_mass();
    }
    const auto& atoms = measure_.nu.atoms();
    std::vector<double> w;
    for (const auto& a : atoms) {
      w.push_back(a.lambda);
      rate_ += a.lambda;
    }
    if (!atoms.empty()) atom_dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());

    for (std::size_t j = 0; j < kernels_.size(); ++j) {
      const auto& k = kernels_[j];
      if (k.order() < 1) throw BoundsError("kernel '" + k.label + "' has no factors");
      for (const auto& f : k.factors) {
        if (f.space.values && measure.nu.is_family()) {
          throw SchemaError("tabulated space factor cannot be used with a power family");
        }
        if (f.space.values && !measure_.nu.is_empty()) check_space_factor(f.space, measure_.nu);
      }
      if (k.order() == 1) {
        first_order_.push_back(j);
        continue;
      }
      if (k.order() > 3) throw UnsupportedKernelError("iterated integrals are simulated up to order 3");
      if (measure_.sigma2 > 0) {
        throw UnsupportedKernelError("iterated integrals of order >= 2 need a pure-jump measure");
      }
      for (const auto& f : k.factors) {
        if (!f.time.is_polynomial() || f.time.absolute()) {
          throw UnsupportedKernelError("iterated integrals need piecewise-polynomial time factors");
        }
      }
    }
    prepare_first_order();
    if (truncated_) {
      for (std::size_t j : first_order_) {
        const auto& f = kernels_[j].factors[0];
        const double full = nu_integral(f.space.pow(2), measure.nu);
        const double part = nu_integral(f.space.pow(2), measure_.nu);
        truncation_bias_ = std::max(truncation_bias_, std::abs(full - part) * time_integral(f.time, 2, measure.T));
      }
    }
  }

  const ControlMeasure& effective_measure() const { return measure_; }
  bool truncated() const { return truncated_; }
  double tail_mass() const { return tail_mass_; }
  /// Largest second-moment change of an order-1 integral caused by the truncation.
  double truncation_bias() const { return truncation_bias_; }

  PathSample draw(std::mt19937_64& rng) const {
    PathSample p;
    if (rate_ > 0) {
      std::poisson_distribution<long> count(rate_ * measure_.T);
      std::uniform_real_distribution<double> u(0.0, measure_.T);
      auto atom = atom_dist_;
      const long n = count(rng);
      for (long i = 0; i < n; ++i) {
        p.jump_times.push_back(u(rng));
        p.jump_atoms.push_back(atom(rng));
      }
      std::vector<std::size_t> idx(p.jump_times.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p.jump_times[a] < p.jump_times[b]; });
      PathSample sorted;
      for (std::size_t i : idx) {
        sorted.jump_times.push_back(p.jump_times[i]);
        sorted.jump_atoms.push_back(p.jump_atoms[i]);
      }
      p.jump_times = std::move(sorted.jump_times);
      p.jump_atoms = std::move(sorted.jump_atoms);
    }
    if (!chol_.empty()) {
      std::normal_distribution<double> normal;
      std::vector<double> z(chol_.size());
      for (auto& v : z) v = normal(rng);
      p.gaussian.assign(chol_.size(), 0.0);
      for (std::size_t a = 0; a < chol_.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) p.gaussian[a] += chol_[a][b] * z[b];
      }
    }
    return p;
  }

  /// I_{m_j}(f^(j))_T for every kernel on this path.
  std::vector<double> evaluate(const PathSample& p) const {
    std::vector<double> out(kernels_.size(), 0.0);
    for (std::size_t a = 0; a < first_order_.size(); ++a) {
      const std::size_t j = first_order_[a];
      const KernelFactor& f = kernels_[j].factors[0];
      double s = -compensator_[a];
      for (std::size_t i = 0; i < p.jump_times.size(); ++i) {
        s += f.time(p.jump_times[i]) * atom_value(f.space, p.jump_atoms[i]);
      }
      if (!p.gaussian.empty()) s += p.gaussian[a];
      out[j] = s;
    }
    for (std::size_t j = 0; j < kernels_.size(); ++j) {
      if (kernels_[j].order() >= 2) out[j] = iterated(kernels_[j], p);
    }
    return out;
  }

 private:
  double atom_value(const SpaceFactor& h, std::size_t i) const {
    return h.at_atom(i, measure_.nu.atoms()[i].x);
  }

  void prepare_first_order() {
    const std::size_t n = first_order_.size();
    for (std::size_t j : first_order_) {
      const auto& f = kernels_[j].factors[0];
      const double nuh = measure_.nu.is_empty() ? 0.0 : nu_integral(f.space, measure_.nu);
      compensator_.push_back(nuh == 0 ? 0.0 : time_integral(f.time, measure_.T) * nuh);
    }
    if (!(measure_.sigma2 > 0) || n == 0) return;
    std::vector<std::vector<double>> cov(n, std::vector<double>(n, 0.0));
    bool any = false;
    for (std::size_t a = 0; a < n; ++a) {
      const auto& fa = kernels_[first_order_[a]].factors[0];
      for (std::size_t b = 0; b <= a; ++b) {
        const auto& fb = kernels_[first_order_[b]].factors[0];
        const double c = fa.effective_h0() * fb.effective_h0();
        cov[a][b] = cov[b][a] = c == 0 ? 0.0 : measure_.sigma2 * c * time_integral(fa.time * fb.time, measure_.T);
        any = any || cov[a][b] != 0;
      }
    }
    if (!any) return;
    // Cholesky for a positive semidefinite matrix: skip numerically zero pivots.
    chol_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
      double d = cov[j][j];
      for (std::size_t k = 0; k < j; ++k) d -= chol_[j][k] * chol_[j][k];
      const double tol = 1e-12 * std::max(1.0, cov[j][j]);
      if (d <= tol) continue;
      chol_[j][j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = cov[i][j];
        for (std::size_t k = 0; k < j; ++k) s -= chol_[i][k] * chol_[j][k];
        chol_[i][j] = s / chol_[j][j];
      }
    }
  }

  /// Σ_π X^π_k(T): each ordering π of the factors gives the iterated integral
  /// X_r(t) = ∫_0^t u_{π(r)}(s,x) X_{r-1}(s-) M(ds,dx), X_0 = 1.
  double iterated(const TensorKernel& kernel, const PathSample& p) const {
    std::vector<std::size_t> perm(kernel.factors.size());
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0;
    do {
      std::vector<const KernelFactor*> u;
      for (std::size_t i : perm) u.push_back(&kernel.factors[i]);
      total += iterated_ordered(u, p);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
  }

  double iterated_ordered(const std::vector<const KernelFactor*>& u, const PathSample& p) const {
    const std::size_t k = u.size();
    std::vector<double> nuh(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      nuh[r] = measure_.nu.is_empty() ? 0.0 : nu_integral(u[r]->space, measure_.nu);
    }
    // Segment boundaries: time-factor breaks and jump times.
    std::vector<double> cuts;
    for (const auto* f : u) {
      for (double b : f->time.breaks()) {
        if (b > 0 && b < measure_.T) cuts.push_back(b);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> x(k + 1, 0.0);  // x[r] = X_r at the current segment start
    x[0] = 1.0;
    double a = 0.0;
    std::size_t ji = 0, ci = 0;
    std::vector<Polynomial> P(k + 1);
    auto advance_to = [&](double b) {
      // On [a, b): X_r(t) = X_r(a) - ν(h_r) ∫_a^t g_r(s) X_{r-1}(s) ds.
      P[0] = Polynomial::constant(1.0);
      for (std::size_t r = 1; r <= k; ++r) {
        const Polynomial integrand = u[r - 1]->time.piece_at(a) * P[r - 1];
        const Polynomial A = integrand.antiderivative();
        P[r] = Polynomial::constant(x[r] + nuh[r - 1] * A(a)) - A.scaled(nuh[r - 1]);
      }
      for (std::size_t r = 1; r <= k; ++r) x[r] = P[r](b);
      a = b;
    };
    while (true) {
      const double next_jump = ji < p.jump_times.size() ? p.jump_times[ji] : measure_.T;
      const double next_cut = ci < cuts.size() ? cuts[ci] : measure_.T;
      if (next_cut < next_jump) {
        advance_to(next_cut);
        ++ci;
        continue;
      }
      advance_to(next_jump);
      if (ji >= p.jump_times.size()) break;
      const double t = p.jump_times[ji];
      const std::size_t atom = p.jump_atoms[ji];
      for (std::size_t r = k; r >= 1; --r) {
        x[r] += (*u[r - 1]).time(t) * atom_value(u[r - 1]->space, atom) * x[r - 1];
      }
      ++ji;
    }
    return x[k];
  }

  std::vector<TensorKernel> kernels_;
  ControlMeasure measure_;
  bool truncated_ = false;
  double tail_mass_ = 0;
  double truncation_bias_ = 0;
  double rate_ = 0;
  std::discrete_distribution<std::size_t> atom_dist_;
  std::vector<std::size_t> first_order_;
  std::vector<double> compensator_;
  std::vector<std::vector<double>> chol_;
};

/// One draw of I_1(f)_T.
inline double sample_I1(const KernelFactor& f, const ControlMeasure& measure, std::mt19937_64& rng) {
  PathSampler s({TensorKernel{{f}, "f"}}, measure);
  return s.evaluate(s.draw(rng))[0];
}

/// One draw of J_k(f̂)_T = I_k(f̂)_T / k! for a pure-jump measure.
inline double sample_Jk_purejump(const TensorKernel& kernel, const ControlMeasure& measure, std::mt19937_64& rng) {
  if (measure.sigma2 > 0) throw UnsupportedKernelError("pure-jump sampling needs sigma2 = 0");
  PathSampler s({kernel}, measure);
  double kf = 1;
  for (int i = 2; i <= kernel.order(); ++i) kf *= i;
  return s.evaluate(s.draw(rng))[0] / kf;
}

// ---------------------------------------------------------------------------
// Empirical moments

struct Statistic {
  std::string name;
  double mean = 0;
  double variance = 0;
  double se = 0;
  std::optional<double> target;
  std::optional<double> z_score;
  bool target_divergent = false;
};

struct EmpiricalMoments {
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string rng = kRngAlgorithm;
  bool truncated = false;
  double tail_mass = 0;
  double truncation_bias = 0;
  std::vector<Statistic> statistics;

  double max_abs_z() const {
    double z = 0;
    for (const auto& s : statistics) {
      if (s.z_score) z = std::max(z, std::abs(*s.z_score));
    }
    return z;
  }
};

/// Runs `fn(block_index, rng, first_path, path_count)` for every block, spread over workers.
template <class Fn>
void for_each_block(std::size_t n_paths, std::uint64_t seed, Fn&& fn) {
  const std::size_t blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(blocks, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t b = next++; b < blocks; b = next++) {
      auto rng = block_rng(seed, b);
      const std::size_t first = b * kPathsPerBlock;
      fn(b, rng, first, std::min(kPathsPerBlock, n_paths - first));
    }
  };
  if (workers <= 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

namespace detail {

/// Mean and standard error of X and X² from power sums, block results added in block order.
inline void moments_from_sums(std::size_t n, double s1, double s2, double s4, Statistic& x, Statistic& x2) {
  const double dn = static_cast<double>(n);
  x.mean = s1 / dn;
  x.variance = n > 1 ? std::max(0.0, (s2 - dn * x.mean * x.mean) / (dn - 1)) : 0.0;
  x.se = std::sqrt(x.variance / dn);
  x2.mean = s2 / dn;
  x2.variance = n > 1 ? std::max(0.0, (s4 - dn * x2.mean * x2.mean) / (dn - 1)) : 0.0;
  x2.se = std::sqrt(x2.variance / dn);
}

inline void attach_target(Statistic& s, double target) {
  if (!std::isfinite(target)) {
    s.target_divergent = true;
    return;
  }
  s.target = target;
  const double diff = s.mean - target;
  if (s.se > 0) {
    s.z_score = diff / s.se;
  } else {
    s.z_score = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(target)) ? 0.0 : (diff > 0 ? kInf : -kInf);
  }
}

}  // namespace detail

/// Sample mean and second moment of ∏_j I_{m_j}(f^(j)), compared with the product formula.
inline EmpiricalMoments empirical_product_moments(const std::vector<TensorKernel>& kernels, const ControlMeasure& measure,
                                                  std::size_t n_paths, std::uint64_t seed,
                                                  MeasureClass cls = MeasureClass::General, bool with_targets = true) {
  if (n_paths == 0) throw BoundsError("need at least one path");
  const ControlMeasure m = restrict(measure, cls);
  PathSampler sampler(kernels, m);
  const std::size_t blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
  std::vector<std::array<double, 3>> block_sums(blocks);
  for_each_block(n_paths, seed, [&](std::size_t b, std::mt19937_64& rng, std::size_t, std::size_t count) {
    CompensatedSum s1, s2, s4;
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = sampler.evaluate(sampler.draw(rng));
      double prod = 1;
      for (double x : v) prod *= x;
      const double sq = prod * prod;
      s1.add(prod);
      s2.add(sq);
      s4.add(sq * sq);
    }
    block_sums[b] = {s1.value(), s2.value(), s4.value()};
  });
  CompensatedSum t1, t2, t4;
  for (const auto& s : block_sums) {
    t1.add(s[0]);
    t2.add(s[1]);
    t4.add(s[2]);
  }

  EmpiricalMoments out;
  out.n_paths = n_paths;
  out.seed = seed;
  out.truncated = sampler.truncated();
  out.tail_mass = sampler.tail_mass();
  out.truncation_bias = sampler.truncation_bias();
  Statistic mean, second;
  mean.name = "product_mean";
  second.name = "product_second_moment";
  detail::moments_from_sums(n_paths, t1.value(), t2.value(), t4.value(), mean, second);
  if (with_targets) {
    const ChaosExpansion e = expand_product(kernels, measure, cls, /*force=*/true);
    detail::attach_target(mean, e.expectation());
    detail::attach_target(second, expansion_second_moment(e, measure));
  }
  out.statistics = {mean, second};
  return out;
}

}  // namespace levychaos
