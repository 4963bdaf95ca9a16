#pragma once

// Products of multiple integrals of symmetrized tensor kernels, expanded into chaos terms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "levychaos/combinatorics.hpp"
#include "levychaos/errors.hpp"
#include "levychaos/measure.hpp"

namespace levychaos {

/// Symmetrization of g_1(z_1)...g_m(z_m); the order of `factors` is irrelevant.
struct TensorKernel {
  std::vector<KernelFactor> factors;
  std::string label;

  int order() const { return static_cast<int>(factors.size()); }
  TensorKernel abs() const {
    TensorKernel k{{}, label};
    for (const auto& f : factors) k.factors.push_back(f.abs());
    return k;
  }
  friend bool operator==(const TensorKernel&, const TensorKernel&) = default;
};

/// One separable piece of a star term: weight · scalar · (⊗ factors).
struct StarComponent {
  Rational weight;
  double scalar = 1;
  std::vector<KernelFactor> factors;  ///< the identified variables, one factor each
  friend bool operator==(const StarComponent&, const StarComponent&) = default;
};

/// ★^l_{l°}(f^(1),...,f^(N)) averaged over factor-to-slot assignments, with its coefficient.
struct StarTerm {
  ExponentPair exponents;
  Rational coefficient;                 ///< m_1!...m_N! / (l! l°!)
  std::vector<StarComponent> components;
  bool divergent = false;               ///< some contraction integral is infinite
  bool quadrature = false;              ///< some integral fell back to numerical quadrature

  int order() const { return exponents.total_l(); }

  /// Σ weight·scalar: the term's value when it has no identified variables.
  double scalar() const {
    double s = 0;
    for (const auto& c : components) {
      if (c.scalar == 0) continue;
      s += c.weight.convert_to<double>() * c.scalar;
    }
    return s;
  }
  double contribution() const {
    const double s = scalar();
    return s == 0 ? 0.0 : coefficient.convert_to<double>() * s;
  }
  friend bool operator==(const StarTerm&, const StarTerm&) = default;
};

struct ChaosExpansion {
  MeasureClass measure_class = MeasureClass::General;
  std::vector<int> orders;
  std::map<int, std::vector<StarTerm>> terms_by_order;

  std::size_t term_count(int k) const {
    auto it = terms_by_order.find(k);
    return it == terms_by_order.end() ? 0 : it->second.size();
  }
  double expectation() const {
    double s = 0;
    auto it = terms_by_order.find(0);
    if (it == terms_by_order.end()) return 0;
    for (const auto& t : it->second) s += t.contribution();
    return s;
  }
  friend bool operator==(const ChaosExpansion&, const ChaosExpansion&) = default;
};

inline constexpr int kMaxTotalOrder = 12;

inline std::vector<int> kernel_orders(const std::vector<TensorKernel>& kernels) {
  std::vector<int> m;
  for (const auto& k : kernels) m.push_back(k.order());
  return m;
}

inline std::string format_exponents(const ExponentPair& ep) {
  const auto& order = subset_order(ep.factors());
  auto set_name = [](Mask mask) {
    std::string s = "{";
    bool first = true;
    for (int j = 1; j <= kMaxFactors; ++j) {
      if (!contains(mask, j)) continue;
      if (!first) s += ",";
      s += std::to_string(j);
      first = false;
    }
    return s + "}";
  };
  std::string l, lo;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (ep.l[p]) l += (l.empty() ? "" : " ") + std::to_string(ep.l[p]) + " on " + set_name(order[p].mask);
    if (ep.l_o[p]) lo += (lo.empty() ? "" : " ") + std::to_string(ep.l_o[p]) + " on " + set_name(order[p].mask);
  }
  return "l=[" + l + "] l_o=[" + lo + "]";
}

namespace detail {

struct Slot {
  Mask members = 0;
  bool identified = true;
  Domain domain = Domain::Full;
  int group = 0;
};

/// Domain of an identified (i = 1) or contracted (i = 0) variable on a subset of this size.
inline Domain slot_domain(int size, bool identified, MeasureClass cls) {
  if (cls == MeasureClass::BrownianOnly) return Domain::Full;
  if (identified) return size >= 2 ? Domain::R0 : Domain::Full;
  return size >= 3 ? Domain::R0 : Domain::Full;
}

/// Per kernel, the id of each factor (equal factors share an id) and one representative per id.
struct FactorIds {
  std::vector<std::vector<int>> ids;
  std::vector<std::vector<KernelFactor>> reps;
  std::vector<std::vector<int>> counts;
};

inline FactorIds factor_ids(const std::vector<TensorKernel>& kernels) {
  FactorIds out;
  for (const auto& k : kernels) {
    std::vector<int> id;
    std::vector<KernelFactor> rep;
    std::vector<int> cnt;
    for (const auto& f : k.factors) {
      auto it = std::find(rep.begin(), rep.end(), f);
      if (it == rep.end()) {
        id.push_back(static_cast<int>(rep.size()));
        rep.push_back(f);
        cnt.push_back(1);
      } else {
        const int v = static_cast<int>(it - rep.begin());
        id.push_back(v);
        ++cnt[v];
      }
    }
    out.ids.push_back(std::move(id));
    out.reps.push_back(std::move(rep));
    out.counts.push_back(std::move(cnt));
  }
  return out;
}

}  // namespace detail

/// The star term for one exponent pair, averaging over all ∏ m_j! assignments of each
/// kernel's factors to the slots containing it.
inline StarTerm star_contract(const std::vector<TensorKernel>& kernels, const ExponentPair& ep,
                              const ControlMeasure& measure, MeasureClass cls) {
  const int n = static_cast<int>(kernels.size());
  if (ep.factors() != n || ep.orders != kernel_orders(kernels) || !is_admissible(ep)) {
    throw BoundsError("exponent pair is not admissible for these kernels");
  }
  StarTerm term;
  term.exponents = ep;
  term.coefficient = ep.coefficient();
  if (!survives(ep, cls)) return term;

  const ControlMeasure m = restrict(measure, cls);
  const auto& order = subset_order(n);

  std::vector<detail::Slot> slots;
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in slots
  for (std::size_t p = 0; p < order.size(); ++p) {
    for (int pass = 0; pass < 2; ++pass) {
      const bool identified = pass == 0;
      const int count = identified ? ep.l[p] : ep.l_o[p];
      if (count == 0) continue;
      const std::size_t begin = slots.size();
      for (int c = 0; c < count; ++c) {
        slots.push_back({order[p].mask, identified,
                         detail::slot_domain(order[p].size(), identified, cls),
                         static_cast<int>(groups.size())});
      }
      groups.emplace_back(begin, slots.size());
    }
  }

  const auto fid = detail::factor_ids(kernels);
  std::vector<std::vector<std::size_t>> memberships(n);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (int j = 0; j < n; ++j) {
      if (contains(slots[s].members, j + 1)) memberships[j].push_back(s);
    }
  }

  // assignment[s][j] = factor id of kernel j in slot s (or -1).
  std::vector<std::vector<int>> assignment(slots.size(), std::vector<int>(n, -1));
  using SlotKey = std::vector<int>;
  using Key = std::vector<std::vector<SlotKey>>;
  std::map<Key, BigInt> merged;

  auto group_min_kernel = [&](int g) {
    return std::countr_zero(slots[groups[g].first].members);
  };

  auto finish = [&] {
    BigInt w = 1;
    for (int j = 0; j < n; ++j) {
      for (int c : fid.counts[j]) w *= factorial(c);
    }
    Key key;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto [b, e] = groups[g];
      const int j0 = group_min_kernel(static_cast<int>(g));
      std::map<int, int> mult;
      for (std::size_t s = b; s < e; ++s) ++mult[assignment[s][j0]];
      BigInt gw = factorial(static_cast<int>(e - b));
      for (auto [v, c] : mult) gw /= factorial(c);
      w *= gw;
      std::vector<SlotKey> keys;
      for (std::size_t s = b; s < e; ++s) keys.push_back(assignment[s]);
      std::sort(keys.begin(), keys.end());
      key.push_back(std::move(keys));
    }
    merged[std::move(key)] += w;
  };

  std::vector<int> remaining;
  std::function<void(int, std::size_t)> fill = [&](int j, std::size_t t) {
    if (j == n) {
      finish();
      return;
    }
    if (t == 0) remaining = fid.counts[j];
    if (t == memberships[j].size()) {
      const auto saved = remaining;
      fill(j + 1, 0);
      remaining = saved;
      return;
    }
    const std::size_t s = memberships[j][t];
    const int g = slots[s].group;
    int lower = 0;
    if (group_min_kernel(g) == j && s > groups[g].first) lower = assignment[s - 1][j];
    for (int v = lower; v < static_cast<int>(remaining.size()); ++v) {
      if (remaining[v] == 0) continue;
      --remaining[v];
      assignment[s][j] = v;
      fill(j, t + 1);
      assignment[s][j] = -1;
      ++remaining[v];
    }
  };
  fill(0, 0);

  BigInt denom = 1;
  for (int mj : ep.orders) denom *= factorial(mj);

  std::map<std::pair<SlotKey, Domain>, double> contraction_cache;
  auto slot_factors = [&](const SlotKey& key) {
    std::vector<KernelFactor> fs;
    for (int j = 0; j < n; ++j) {
      if (key[j] >= 0) fs.push_back(fid.reps[j][key[j]]);
    }
    return fs;
  };

  for (const auto& [key, w] : merged) {
    StarComponent comp;
    comp.weight = Rational(w, denom);
    bool has_zero = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const detail::Slot& slot = slots[groups[g].first];
      for (const auto& sk : key[g]) {
        if (slot.identified) {
          comp.factors.push_back(pointwise_product(slot_factors(sk), slot.domain));
          continue;
        }
        auto ck = std::make_pair(sk, slot.domain);
        auto it = contraction_cache.find(ck);
        if (it == contraction_cache.end()) {
          bool q = false;
          const double v = m_product_integral(slot_factors(sk), m, slot.domain, &q);
          term.quadrature = term.quadrature || q;
          it = contraction_cache.emplace(ck, v).first;
        }
        if (it->second == 0) has_zero = true;
        comp.scalar *= it->second;
      }
    }
    if (has_zero) {
      comp.scalar = 0;
    } else if (std::isinf(comp.scalar)) {
      term.divergent = true;
    }
    term.components.push_back(std::move(comp));
  }
  return term;
}

// ---------------------------------------------------------------------------
// Norms of symmetrized tensors

/// Permanent by Ryser's formula with Gray-code updates. Infinite entries give +inf.
inline double permanent(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  for (const auto& row : a) {
    for (double v : row) {
      if (std::isinf(v)) return kInf;
    }
  }
  std::vector<double> rowsum(n, 0.0);
  double total = 0;
  std::uint64_t gray = 0;
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << n); ++i) {
    const std::uint64_t next = i ^ (i >> 1);
    const std::uint64_t changed = next ^ gray;
    const int col = std::countr_zero(changed);
    const double sign = (next & changed) ? 1.0 : -1.0;
    for (std::size_t r = 0; r < n; ++r) rowsum[r] += sign * a[r][col];
    gray = next;
    double prod = 1;
    for (std::size_t r = 0; r < n; ++r) prod *= rowsum[r];
    const int bits = std::popcount(gray);
    total += ((static_cast<int>(n) - bits) % 2 ? -1.0 : 1.0) * prod;
  }
  return total;
}

/// k!·⟨sym⊗u, sym⊗w⟩ = perm(G), G_ab = ∫ u_a w_b dm.
inline double gram_permanent(const std::vector<KernelFactor>& u, const std::vector<KernelFactor>& w,
                             const ControlMeasure& m) {
  if (u.size() != w.size()) throw BoundsError("tensor orders differ");
  std::vector<std::vector<double>> g(u.size(), std::vector<double>(w.size()));
  for (std::size_t a = 0; a < u.size(); ++a) {
    for (std::size_t b = 0; b < w.size(); ++b) g[a][b] = m_product_integral({u[a], w[b]}, m);
  }
  return permanent(g);
}

namespace detail {

/// Σ_{a,b} c_a c_b perm(G_ab) over a list of weighted tensors of equal order, merging
/// tensors that are equal up to factor order and caching Gram entries.
struct WeightedTensor {
  double weight;
  std::vector<KernelFactor> factors;
};

inline double symmetric_norm_sum(const std::vector<WeightedTensor>& items, const ControlMeasure& m) {
  std::vector<KernelFactor> distinct;
  auto id_of = [&](const KernelFactor& f) {
    auto it = std::find(distinct.begin(), distinct.end(), f);
    if (it != distinct.end()) return static_cast<int>(it - distinct.begin());
    distinct.push_back(f);
    return static_cast<int>(distinct.size() - 1);
  };
  std::map<std::vector<int>, double> tensors;
  for (const auto& it : items) {
    if (it.weight == 0) continue;
    std::vector<int> ids;
    for (const auto& f : it.factors) ids.push_back(id_of(f));
    std::sort(ids.begin(), ids.end());
    tensors[ids] += it.weight;
  }
  std::map<std::pair<int, int>, double> gram;
  auto entry = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = gram.find(key);
    if (it == gram.end()) it = gram.emplace(key, m_product_integral({distinct[a], distinct[b]}, m)).first;
    return it->second;
  };
  std::vector<std::pair<std::vector<int>, double>> list(tensors.begin(), tensors.end());
  double total = 0;
  for (std::size_t a = 0; a < list.size(); ++a) {
    for (std::size_t b = a; b < list.size(); ++b) {
      const auto& u = list[a].first;
      const auto& w = list[b].first;
      std::vector<std::vector<double>> g(u.size(), std::vector<double>(w.size()));
      for (std::size_t r = 0; r < u.size(); ++r) {
        for (std::size_t c = 0; c < w.size(); ++c) g[r][c] = entry(u[r], w[c]);
      }
      const double p = permanent(g);
      if (p == 0) continue;
      total += (a == b ? 1.0 : 2.0) * list[a].second * list[b].second * p;
    }
  }
  return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// L² condition

struct L2Entry {
  ExponentPair exponents;
  double norm2 = 0;  ///< squared norm of the symmetrized star term of |f^(j)| (times k!)
  bool finite = true;
};

struct L2Report {
  std::vector<L2Entry> entries;
  bool passed = true;

  std::vector<L2Entry> failures() const {
    std::vector<L2Entry> out;
    for (const auto& e : entries) {
      if (!e.finite) out.push_back(e);
    }
    return out;
  }
};

/// Evaluate every star term of the absolute kernels and check it has a finite norm.
inline L2Report check_l2_condition(const std::vector<TensorKernel>& kernels, const ControlMeasure& measure,
                                   MeasureClass cls) {
  std::vector<TensorKernel> abs_kernels;
  for (const auto& k : kernels) abs_kernels.push_back(k.abs());
  const ControlMeasure m = restrict(measure, cls);
  L2Report report;
  for (const auto& ep : enumerate_dn(kernel_orders(kernels))) {
    if (!survives(ep, cls)) continue;
    const StarTerm t = star_contract(abs_kernels, ep, measure, cls);
    L2Entry e{ep, 0, true};
    if (t.divergent) {
      e.norm2 = kInf;
    } else if (t.order() == 0) {
      const double s = t.scalar();
      e.norm2 = s * s;
    } else {
      std::vector<detail::WeightedTensor> items;
      for (const auto& c : t.components) items.push_back({c.weight.convert_to<double>() * c.scalar, c.factors});
      e.norm2 = detail::symmetric_norm_sum(items, m);
    }
    e.finite = std::isfinite(e.norm2);
    report.passed = report.passed && e.finite;
    report.entries.push_back(std::move(e));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Expansion

inline void validate_kernels(const std::vector<TensorKernel>& kernels, const ControlMeasure& measure) {
  measure.validate();
  if (kernels.empty() || kernels.size() > static_cast<std::size_t>(kMaxFactors)) {
    throw BoundsError("need between 1 and 16 kernels");
  }
  int total = 0;
  for (const auto& k : kernels) {
    if (k.order() < 1) throw BoundsError("kernel '" + k.label + "' has no factors");
    total += k.order();
    for (const auto& f : k.factors) check_space_factor(f.space, measure.nu);
  }
  if (total > kMaxTotalOrder) {
    throw BoundsError("sum of kernel orders " + std::to_string(total) + " exceeds " +
                      std::to_string(kMaxTotalOrder));
  }
}

/// ∏_j I_{m_j}(f^(j)) = Σ_k I_k(Σ_{|l|=k} coefficient · ★^l_{l°}).
inline ChaosExpansion expand_product(const std::vector<TensorKernel>& kernels, const ControlMeasure& measure,
                                     MeasureClass cls, bool force = false) {
  validate_kernels(kernels, measure);
  if (!force) {
    const L2Report report = check_l2_condition(kernels, measure, cls);
    if (!report.passed) {
      std::string msg = "square-integrability condition fails for:";
      for (const auto& e : report.failures()) msg += "\n  " + format_exponents(e.exponents);
      throw DivergenceError(msg);
    }
  }
  ChaosExpansion out;
  out.measure_class = cls;
  out.orders = kernel_orders(kernels);
  const int total = std::accumulate(out.orders.begin(), out.orders.end(), 0);
  for (int k = 0; k <= total; ++k) out.terms_by_order[k];
  for (const auto& ep : enumerate_dn(out.orders)) {
    if (!survives(ep, cls)) continue;
    out.terms_by_order[ep.total_l()].push_back(star_contract(kernels, ep, measure, cls));
  }
  return out;
}

/// E[∏ I_{m_j}(f^(j))]: the k = 0 level only.
inline double expectation_of_product(const std::vector<TensorKernel>& kernels, const ControlMeasure& measure,
                                     MeasureClass cls) {
  validate_kernels(kernels, measure);
  double s = 0;
  for (const auto& ep : enumerate_dn(kernel_orders(kernels), 0)) {
    if (!survives(ep, cls)) continue;
    s += star_contract(kernels, ep, measure, cls).contribution();
  }
  return s;
}

/// E[(∏ I)²] = (k = 0 level)² + Σ_{k≥1} k!·‖level k‖².
inline double expansion_second_moment(const ChaosExpansion& exp, const ControlMeasure& measure) {
  const ControlMeasure m = restrict(measure, exp.measure_class);
  double total = 0;
  for (const auto& [k, terms] : exp.terms_by_order) {
    for (const auto& t : terms) {
      if (t.divergent) return kInf;
    }
    if (k == 0) {
      double e = 0;
      for (const auto& t : terms) e += t.contribution();
      total += e * e;
      continue;
    }
    std::vector<detail::WeightedTensor> items;
    for (const auto& t : terms) {
      const double c = t.coefficient.convert_to<double>();
      for (const auto& comp : t.components) {
        if (comp.scalar == 0) continue;
        items.push_back({c * comp.weight.convert_to<double>() * comp.scalar, comp.factors});
      }
    }
    total += detail::symmetric_norm_sum(items, m);
  }
  return total;
}

}  // namespace levychaos
