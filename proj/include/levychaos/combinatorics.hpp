#pragma once

// Index sets of the product formula and the three ways of counting them.
//
// Subsets of {1..N} are bitmasks, element j (1-based) living in bit j-1.
// Everything here is exact integer arithmetic.

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "levychaos/errors.hpp"

namespace levychaos {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Mask = std::uint32_t;

inline constexpr int kMaxFactors = 16;

/// Which c-rule table applies: Brownian-Poisson, Brownian only, or jumps only.
enum class MeasureClass { General, BrownianOnly, JumpOnly };

inline int cardinality(Mask m) { return std::popcount(m); }
inline bool contains(Mask m, int j) { return (m >> (j - 1)) & 1U; }
inline Mask full_mask(int n) { return n >= 32 ? ~Mask{0} : (Mask{1} << n) - 1; }

inline BigInt factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Number of weak compositions of r into `parts` parts. Zero parts admit only r == 0.
inline BigInt weak_composition_count(int r, int parts) {
  if (r < 0) return 0;
  if (parts == 0) return r == 0 ? 1 : 0;
  return binomial(r + parts - 1, parts - 1);
}

// ---------------------------------------------------------------------------
// Subsets

struct SubsetIndex {
  Mask mask = 0;
  std::size_t ordinal = 0;  ///< 1-based position in the canonical order

  int size() const { return cardinality(mask); }
  bool has(int j) const { return contains(mask, j); }
  friend bool operator==(const SubsetIndex&, const SubsetIndex&) = default;
};

/// Canonical order of the nonempty subsets of {1..N}: by cardinality, then by mask.
/// Singletons therefore occupy ordinals 1..N and the full set is last.
class SubsetOrder {
 public:
  explicit SubsetOrder(int n) : n_(n) {
    if (n < 1 || n > kMaxFactors) {
      throw BoundsError("subset order needs 1 <= N <= " + std::to_string(kMaxFactors) +
                        ", got " + std::to_string(n));
    }
    const Mask count = full_mask(n);
    std::vector<Mask> masks(count);
    std::iota(masks.begin(), masks.end(), Mask{1});
    std::stable_sort(masks.begin(), masks.end(), [](Mask a, Mask b) {
      const int ca = cardinality(a), cb = cardinality(b);
      return ca != cb ? ca < cb : a < b;
    });
    subsets_.reserve(count);
    position_.assign(std::size_t{count} + 1, 0);
    for (std::size_t i = 0; i < masks.size(); ++i) {
      subsets_.push_back({masks[i], i + 1});
      position_[masks[i]] = i;
    }
  }

  int factors() const { return n_; }
  std::size_t size() const { return subsets_.size(); }
  const SubsetIndex& operator[](std::size_t pos) const { return subsets_[pos]; }
  std::size_t position(Mask mask) const { return position_.at(mask); }
  std::span<const SubsetIndex> subsets() const { return subsets_; }

 private:
  int n_;
  std::vector<SubsetIndex> subsets_;
  std::vector<std::size_t> position_;
};

/// Shared immutable order for a given N.
inline const SubsetOrder& subset_order(int n) {
  if (n < 1 || n > kMaxFactors) {
    throw BoundsError("N must lie in [1, " + std::to_string(kMaxFactors) + "], got " +
                      std::to_string(n));
  }
  static std::array<std::once_flag, kMaxFactors + 1> flags;
  static std::array<std::optional<SubsetOrder>, kMaxFactors + 1> orders;
  std::call_once(flags[n], [n] { orders[n].emplace(n); });
  return *orders[n];
}

inline std::vector<SubsetIndex> enumerate_subsets(int n) {
  const auto s = subset_order(n).subsets();
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Exponent pairs (l, l°)

/// One element of D_N: per-subset identification counts `l` and contraction counts `l_o`,
/// both indexed by canonical subset position.
struct ExponentPair {
  std::vector<int> orders;
  std::vector<int> l;
  std::vector<int> l_o;

  int factors() const { return static_cast<int>(orders.size()); }
  int total_l() const { return std::accumulate(l.begin(), l.end(), 0); }
  int total_lo() const { return std::accumulate(l_o.begin(), l_o.end(), 0); }

  BigInt l_factorial() const {
    BigInt r = 1;
    for (int v : l) r *= factorial(v);
    return r;
  }
  BigInt lo_factorial() const {
    BigInt r = 1;
    for (int v : l_o) r *= factorial(v);
    return r;
  }

  /// m_1!...m_N! / (l! l°!)
  Rational coefficient() const {
    BigInt num = 1;
    for (int m : orders) num *= factorial(m);
    return Rational(num, l_factorial() * lo_factorial());
  }

  friend bool operator==(const ExponentPair&, const ExponentPair&) = default;
  friend auto operator<=>(const ExponentPair&, const ExponentPair&) = default;
};

inline void validate_orders(std::span<const int> orders, bool allow_zero = false) {
  if ((orders.empty() && !allow_zero) || orders.size() > static_cast<std::size_t>(kMaxFactors)) {
    throw BoundsError("number of factors must lie in [1, " + std::to_string(kMaxFactors) + "]");
  }
  for (int m : orders) {
    if (m < 0 || (m == 0 && !allow_zero)) {
      throw BoundsError("orders must be positive integers");
    }
  }
}

inline bool is_admissible(const ExponentPair& ep) {
  const int n = ep.factors();
  const auto& order = subset_order(n);
  if (ep.l.size() != order.size() || ep.l_o.size() != order.size()) return false;
  std::vector<int> cover(n, 0);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (ep.l[p] < 0 || ep.l_o[p] < 0) return false;
    if (order[p].size() == 1 && ep.l_o[p] != 0) return false;
    for (int j = 1; j <= n; ++j) {
      if (order[p].has(j)) cover[j - 1] += ep.l[p] + ep.l_o[p];
    }
  }
  for (int j = 0; j < n; ++j) {
    if (cover[j] != ep.orders[j]) return false;
  }
  return true;
}

/// Whether the c-rules of `cls` leave the term structurally nonzero.
/// A subset with l_n = l°_n = 0 is unused and never kills a term.
inline bool survives(const ExponentPair& ep, MeasureClass cls) {
  const auto& order = subset_order(ep.factors());
  for (std::size_t p = 0; p < order.size(); ++p) {
    const int size = order[p].size();
    if (size == 1 && ep.l_o[p] > 0) return false;
    if (cls == MeasureClass::BrownianOnly && size >= 2) {
      if (ep.l[p] > 0) return false;
      if (size >= 3 && ep.l_o[p] > 0) return false;
    }
  }
  return true;
}

/// All admissible (l, l°) for the given orders, optionally restricted to |l| = k.
/// Plain exhaustive search; the reference every counter is checked against.
inline std::vector<ExponentPair> enumerate_dn(std::span<const int> orders,
                                              std::optional<int> k = std::nullopt) {
  validate_orders(orders);
  const int n = static_cast<int>(orders.size());
  const auto& order = subset_order(n);
  const int total = std::accumulate(orders.begin(), orders.end(), 0);
  if (k && (*k < 0 || *k > total)) {
    throw BoundsError("k must lie in [0, sum of orders]");
  }

  std::vector<ExponentPair> out;
  ExponentPair cur{{orders.begin(), orders.end()},
                   std::vector<int>(order.size(), 0),
                   std::vector<int>(order.size(), 0)};
  std::vector<int> remaining(orders.begin(), orders.end());

  // Walk positions from the full set down to the singletons; a singleton {j} is the last
  // subset containing j, so its l-value is forced to whatever of m_j is left.
  std::function<void(std::ptrdiff_t, int)> visit = [&](std::ptrdiff_t pos, int l_sum) {
    if (pos < 0) {
      if (!k || l_sum == *k) out.push_back(cur);
      return;
    }
    const SubsetIndex& s = order[static_cast<std::size_t>(pos)];
    if (s.size() == 1) {
      const int j = std::countr_zero(s.mask);
      const int forced = remaining[j];
      if (k && l_sum + forced > *k) return;
      cur.l[pos] = forced;
      remaining[j] = 0;
      visit(pos - 1, l_sum + forced);
      remaining[j] = forced;
      cur.l[pos] = 0;
      return;
    }
    int bound = total;
    for (int j = 1; j <= n; ++j) {
      if (s.has(j)) bound = std::min(bound, remaining[j - 1]);
    }
    for (int lv = 0; lv <= bound; ++lv) {
      if (k && l_sum + lv > *k) break;
      for (int lov = 0; lv + lov <= bound; ++lov) {
        for (int j = 1; j <= n; ++j) {
          if (s.has(j)) remaining[j - 1] -= lv + lov;
        }
        cur.l[pos] = lv;
        cur.l_o[pos] = lov;
        visit(pos - 1, l_sum + lv);
        for (int j = 1; j <= n; ++j) {
          if (s.has(j)) remaining[j - 1] += lv + lov;
        }
      }
    }
    cur.l[pos] = 0;
    cur.l_o[pos] = 0;
  };
  visit(static_cast<std::ptrdiff_t>(order.size()) - 1, 0);
  std::sort(out.begin(), out.end(), [](const ExponentPair& a, const ExponentPair& b) {
    const int ka = a.total_l(), kb = b.total_l();
    return ka != kb ? ka < kb : a < b;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Counting |{(l, l°) in D_N : |l| = k}|

namespace detail {

class RecursiveCounter {
 public:
  BigInt count(int k, const std::vector<int>& m) {
    if (k < 0) return 0;
    for (int v : m) {
      if (v < 0) return 0;
    }
    if (m.empty()) return k == 0 ? 1 : 0;
    auto key = std::make_pair(k, m);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    // Split off factor N: choose l and l° on every subset {N} ∪ s, s ⊆ {1..N-1};
    // l° on {N} itself is excluded. What is left of m_1..m_{N-1} recurses.
    const int n = static_cast<int>(m.size());
    const int m_last = m.back();
    const Mask rest_count = Mask{1} << (n - 1);
    std::vector<int> reduced(m.begin(), m.end() - 1);
    BigInt total = 0;

    std::function<void(Mask, int, int)> visit = [&](Mask s, int used, int kappa) {
      if (s == rest_count) {
        if (used == m_last) total += count(k - kappa, reduced);
        return;
      }
      int bound = m_last - used;
      for (int r = 1; r < n; ++r) {
        if (contains(s, r)) bound = std::min(bound, reduced[r - 1]);
      }
      for (int lv = 0; lv <= bound && kappa + lv <= k; ++lv) {
        const int lo_bound = (s == 0) ? 0 : bound - lv;
        for (int lov = 0; lov <= lo_bound; ++lov) {
          for (int r = 1; r < n; ++r) {
            if (contains(s, r)) reduced[r - 1] -= lv + lov;
          }
          visit(s + 1, used + lv + lov, kappa + lv);
          for (int r = 1; r < n; ++r) {
            if (contains(s, r)) reduced[r - 1] += lv + lov;
          }
        }
      }
    };
    visit(0, 0, 0);
    memo_.emplace(std::move(key), total);
    return total;
  }

 private:
  std::map<std::pair<int, std::vector<int>>, BigInt> memo_;
};

/// Masks of cardinality >= 2 in the nesting order used by the weak-composition formula:
/// descending cardinality, ties by ascending mask, so every superset precedes its subsets.
inline std::vector<Mask> nesting_order(int n) {
  std::vector<Mask> out;
  for (Mask m = 1; m <= full_mask(n); ++m) {
    if (cardinality(m) >= 2) out.push_back(m);
  }
  std::stable_sort(out.begin(), out.end(), [](Mask a, Mask b) {
    const int ca = cardinality(a), cb = cardinality(b);
    return ca != cb ? ca > cb : a < b;
  });
  return out;
}

/// Number of nonnegative tuples (l_u) with Σ_{u ∈ A_i} l_u = m_i for every i, where the
/// cells u are grouped into atoms A_t (t a nonzero 0/1 vector, here a mask) of size
/// `atom_size(t)`. Nested sums over q_t (t with >= 2 ones, in nesting order) weighted by
/// weak-composition counts; the singleton atoms absorb the leftovers. With `total`, the
/// sum of all l_u must equal it as well.
template <class AtomSize>
BigInt count_by_atoms(std::span<const int> m, AtomSize atom_size, std::optional<int> total) {
  const int n = static_cast<int>(m.size());
  const std::vector<Mask> nest = nesting_order(n);
  std::vector<int> left(m.begin(), m.end());
  BigInt result = 0;

  std::function<void(std::size_t, int, const BigInt&)> visit = [&](std::size_t idx, int used,
                                                                   const BigInt& weight) {
    if (idx == nest.size()) {
      BigInt w = weight;
      int singles = 0;
      for (int i = 0; i < n; ++i) {
        w *= weak_composition_count(left[i], atom_size(Mask{1} << i));
        if (w == 0) return;
        singles += left[i];
      }
      if (total && used + singles != *total) return;
      result += w;
      return;
    }
    const Mask t = nest[idx];
    const int size = atom_size(t);
    if (size == 0) {
      visit(idx + 1, used, weight);
      return;
    }
    int bound = std::numeric_limits<int>::max();
    for (int i = 0; i < n; ++i) {
      if ((t >> i) & 1U) bound = std::min(bound, left[i]);
    }
    if (total) bound = std::min(bound, *total - used);
    for (int q = 0; q <= bound; ++q) {
      for (int i = 0; i < n; ++i) {
        if ((t >> i) & 1U) left[i] -= q;
      }
      visit(idx + 1, used + q, weight * weak_composition_count(q, size));
      for (int i = 0; i < n; ++i) {
        if ((t >> i) & 1U) left[i] += q;
      }
    }
  };
  visit(0, 0, BigInt(1));
  return result;
}

/// Iterate over all vectors v with 0 <= v <= bound componentwise.
template <class Fn>
void for_each_in_box(std::span<const int> bound, Fn&& fn) {
  std::vector<int> v(bound.size(), 0);
  while (true) {
    fn(std::as_const(v));
    std::size_t i = 0;
    while (i < v.size() && v[i] == bound[i]) v[i++] = 0;
    if (i == v.size()) return;
    ++v[i];
  }
}

}  // namespace detail

/// Recursion on the number of factors (split off the last factor, recurse on the rest).
inline BigInt count_dn_recursive(int k, std::span<const int> m) {
  validate_orders(m, /*allow_zero=*/true);
  detail::RecursiveCounter counter;
  return counter.count(k, {m.begin(), m.end()});
}

/// Number of contraction tuples (l° on subsets of size >= 2) covering m exactly.
inline BigInt count_contractions(std::span<const int> m) {
  return detail::count_by_atoms(m, [](Mask t) { return cardinality(t) >= 2 ? 1 : 0; },
                                std::nullopt);
}

/// Number of identification tuples (l on all subsets) covering m exactly with |l| = k.
inline BigInt count_identifications(int k, std::span<const int> m) {
  return detail::count_by_atoms(m, [](Mask) { return 1; }, k);
}

/// Pair-only contraction tuples (Brownian case).
inline BigInt count_pair_contractions(std::span<const int> m) {
  return detail::count_by_atoms(m, [](Mask t) { return cardinality(t) == 2 ? 1 : 0; },
                                std::nullopt);
}

/// Sum over splits m = m̂ + m̌ of (#contractions of m̂)·(#identifications of m̌ with |l| = k).
inline BigInt count_dn_weakcomp(int k, std::span<const int> m) {
  validate_orders(m, /*allow_zero=*/true);
  BigInt total = 0;
  std::vector<int> rest(m.size());
  std::map<std::vector<int>, BigInt> hat_cache;
  detail::for_each_in_box(m, [&](const std::vector<int>& hat) {
    for (std::size_t i = 0; i < m.size(); ++i) rest[i] = m[i] - hat[i];
    const int rest_sum = std::accumulate(rest.begin(), rest.end(), 0);
    if (rest_sum < k) return;  // |l| <= Σ m̌
    BigInt check = count_identifications(k, rest);
    if (check == 0) return;
    auto it = hat_cache.find(hat);
    if (it == hat_cache.end()) it = hat_cache.emplace(hat, count_contractions(hat)).first;
    total += it->second * check;
  });
  return total;
}

/// Terms surviving the Brownian c-rules: l only on singletons, l° only on pairs.
inline BigInt count_dn_brownian(int k, std::span<const int> m) {
  validate_orders(m, /*allow_zero=*/true);
  BigInt total = 0;
  detail::for_each_in_box(m, [&](const std::vector<int>& check) {
    if (std::accumulate(check.begin(), check.end(), 0) != k) return;
    std::vector<int> hat(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) hat[i] = m[i] - check[i];
    total += count_pair_contractions(hat);
  });
  return total;
}

// ---------------------------------------------------------------------------
// Generating functions

/// Dense multivariate polynomial truncated at per-variable maximum degrees.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(std::vector<int> max_degree) : max_degree_(std::move(max_degree)) {
    strides_.resize(max_degree_.size());
    std::size_t stride = 1;
    for (std::size_t i = max_degree_.size(); i-- > 0;) {
      strides_[i] = stride;
      stride *= static_cast<std::size_t>(max_degree_[i] + 1);
    }
    coeff_.assign(stride, 0);
  }

  std::size_t variables() const { return max_degree_.size(); }
  std::span<const int> max_degree() const { return max_degree_; }

  bool in_range(std::span<const int> e) const {
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] < 0 || e[i] > max_degree_[i]) return false;
    }
    return true;
  }
  BigInt& operator[](std::span<const int> e) { return coeff_[flat(e)]; }
  const BigInt& operator[](std::span<const int> e) const { return coeff_[flat(e)]; }

  /// Coefficient of x^target in (*this)·other, without forming the full product.
  BigInt product_coefficient(const TruncatedSeries& other, std::span<const int> target) const {
    BigInt sum = 0;
    std::vector<int> rest(target.size());
    detail::for_each_in_box(target, [&](const std::vector<int>& e) {
      if (!in_range(e)) return;
      const BigInt& a = (*this)[e];
      if (a == 0) return;
      for (std::size_t i = 0; i < e.size(); ++i) rest[i] = target[i] - e[i];
      if (!other.in_range(rest)) return;
      sum += a * other[rest];
    });
    return sum;
  }

  /// Full truncated product.
  TruncatedSeries operator*(const TruncatedSeries& other) const {
    TruncatedSeries out(max_degree_);
    detail::for_each_in_box(max_degree_, [&](const std::vector<int>& e) {
      out[e] = product_coefficient(other, e);
    });
    return out;
  }

 private:
  std::size_t flat(std::span<const int> e) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < e.size(); ++i) idx += strides_[i] * static_cast<std::size_t>(e[i]);
    return idx;
  }

  std::vector<int> max_degree_;
  std::vector<std::size_t> strides_;
  std::vector<BigInt> coeff_;
};

namespace detail {

/// Σ_κ y^κ · [support of (Σ_j Z_j)^κ with unit coefficients], Z_j -> x^{t_j}, truncated.
/// Variable 0 is y, variables 1..N are x_1..x_N. With `track_y == false` the y-degree is
/// left at zero.
inline TruncatedSeries series_over_subsets(std::span<const Mask> cells,
                                           std::span<const int> max_degree, bool track_y) {
  const std::size_t n = max_degree.size() - 1;
  TruncatedSeries series({max_degree.begin(), max_degree.end()});
  using Monomial = std::vector<std::uint8_t>;  // exponent of each Z_j

  auto image = [&](const Monomial& z, int kappa) {
    std::vector<int> e(n + 1, 0);
    e[0] = track_y ? kappa : 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        if ((cells[c] >> i) & 1U) e[i + 1] += z[c];
      }
    }
    return e;
  };

  std::set<Monomial> layer{Monomial(cells.size(), 0)};
  for (int kappa = 0; !layer.empty(); ++kappa) {
    if (track_y && kappa > max_degree[0]) break;
    for (const auto& z : layer) series[image(z, kappa)] += 1;  // nonzero coefficient -> 1
    std::set<Monomial> next;
    for (const auto& z : layer) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        Monomial w = z;
        ++w[c];
        auto e = image(w, kappa + 1);
        if (track_y && e[0] > max_degree[0]) continue;
        e[0] = 0;
        if (series.in_range(e)) next.insert(std::move(w));
      }
    }
    layer = std::move(next);
  }
  return series;
}

}  // namespace detail

/// Coefficient of y^k x^m in g_identifications(y, x) · g_contractions(x).
inline BigInt count_dn_genfunc(int k, std::span<const int> m) {
  validate_orders(m, /*allow_zero=*/true);
  const int n = static_cast<int>(m.size());
  if (k < 0) return 0;
  std::vector<int> max_degree{k};
  max_degree.insert(max_degree.end(), m.begin(), m.end());

  std::vector<Mask> all_cells, contraction_cells;
  for (const auto& s : subset_order(n).subsets()) {
    all_cells.push_back(s.mask);
    if (s.size() >= 2) contraction_cells.push_back(s.mask);
  }
  const auto g_check = detail::series_over_subsets(all_cells, max_degree, true);
  const auto g_hat = detail::series_over_subsets(contraction_cells, max_degree, false);
  std::vector<int> target{k};
  target.insert(target.end(), m.begin(), m.end());
  return g_check.product_coefficient(g_hat, target);
}

/// Terms in the expansion for the given measure class (jump-only counts coincide with
/// the general ones).
inline BigInt count_terms(int k, std::span<const int> m, MeasureClass cls) {
  return cls == MeasureClass::BrownianOnly ? count_dn_brownian(k, m) : count_dn_recursive(k, m);
}

// ---------------------------------------------------------------------------
// Partitions and Bell polynomials

struct PartitionNoSingletons {
  std::vector<Mask> blocks;  ///< ordered by smallest element

  std::vector<int> block_sizes() const {
    std::vector<int> s;
    for (Mask b : blocks) s.push_back(cardinality(b));
    return s;
  }
  friend bool operator==(const PartitionNoSingletons&, const PartitionNoSingletons&) = default;
};

/// Calls visit(const std::vector<Mask>& blocks) once per partition of {1..n} with all
/// blocks of size >= 2.
template <class Visitor>
void for_each_partition_no_singletons(int n, Visitor&& visit) {
  if (n < 1 || n > kMaxFactors) throw BoundsError("partition size must lie in [1, 16]");
  std::vector<Mask> blocks;
  std::function<void(Mask)> rec = [&](Mask remaining) {
    if (remaining == 0) {
      visit(std::as_const(blocks));
      return;
    }
    const Mask first = remaining & (~remaining + 1);
    const Mask rest = remaining & ~first;
    for (Mask s = rest; s != 0; s = (s - 1) & rest) {
      blocks.push_back(first | s);
      rec(rest & ~s);
      blocks.pop_back();
    }
  };
  rec(full_mask(n));
}

inline std::vector<PartitionNoSingletons> enumerate_partitions_no_singletons(int n) {
  std::vector<PartitionNoSingletons> out;
  for_each_partition_no_singletons(n, [&](const std::vector<Mask>& b) { out.push_back({b}); });
  return out;
}

struct BellCoefficient {
  int n = 0;
  std::vector<int> j;  ///< j[a-1] = number of blocks of size a
  BigInt value;
};

/// n! / Π_a (j_a! (a!)^{j_a}): the number of partitions of {1..n} with the given block-size
/// profile.
inline BellCoefficient bell_coefficient(int n, std::vector<int> j) {
  int weighted = 0;
  BigInt denom = 1;
  for (std::size_t a = 1; a <= j.size(); ++a) {
    if (j[a - 1] < 0) throw BoundsError("block counts must be nonnegative");
    weighted += static_cast<int>(a) * j[a - 1];
    denom *= factorial(j[a - 1]);
    for (int r = 0; r < j[a - 1]; ++r) denom *= factorial(static_cast<int>(a));
  }
  if (weighted != n) throw BoundsError("block profile does not sum to n");
  return {n, std::move(j), factorial(n) / denom};
}

/// All block-size profiles of n without blocks of size 1, with their coefficients.
inline std::vector<BellCoefficient> bell_coefficients_no_singletons(int n) {
  std::vector<BellCoefficient> out;
  std::vector<int> j(static_cast<std::size_t>(std::max(n, 1)), 0);
  std::function<void(int, int)> rec = [&](int left, int max_part) {
    if (left == 0) {
      out.push_back(bell_coefficient(n, j));
      return;
    }
    for (int a = std::min(left, max_part); a >= 2; --a) {
      ++j[a - 1];
      rec(left - a, a);
      --j[a - 1];
    }
  };
  rec(n, n);
  return out;
}

namespace detail {
template <class T>
T from_bigint(const BigInt& v) {
  if constexpr (std::is_floating_point_v<T>) {
    return v.convert_to<T>();
  } else {
    return T(v);
  }
}
}  // namespace detail

/// B_n(0, x_2, ..., x_n) by summing over singleton-free partitions; x holds x_2..x_n.
template <class T>
T bell_eval(int n, std::span<const T> x) {
  if (n < 1) throw BoundsError("Bell polynomial order must be >= 1");
  if (x.size() + 1 < static_cast<std::size_t>(n)) {
    throw BoundsError("need arguments x_2..x_n");
  }
  T sum = T(0);
  if (n == 1) return sum;
  for_each_partition_no_singletons(n, [&](const std::vector<Mask>& blocks) {
    T prod = T(1);
    for (Mask b : blocks) prod *= x[cardinality(b) - 2];
    sum += prod;
  });
  return sum;
}

/// Same polynomial, summed over block-size profiles weighted by their coefficients.
template <class T>
T bell_eval_by_coefficients(int n, std::span<const T> x) {
  if (n < 1) throw BoundsError("Bell polynomial order must be >= 1");
  if (x.size() + 1 < static_cast<std::size_t>(n)) {
    throw BoundsError("need arguments x_2..x_n");
  }
  T sum = T(0);
  if (n == 1) return sum;
  for (const auto& c : bell_coefficients_no_singletons(n)) {
    T term = detail::from_bigint<T>(c.value);
    for (std::size_t a = 2; a <= c.j.size(); ++a) {
      for (int r = 0; r < c.j[a - 1]; ++r) term *= x[a - 2];
    }
    sum += term;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Weak compositions

/// Tuples of n nonnegative integers summing to r, in lexicographic order.
class WeakCompositions {
 public:
  class iterator {
   public:
    using value_type = std::vector<int>;
    using difference_type = std::ptrdiff_t;
    using reference = const std::vector<int>&;
    using pointer = const std::vector<int>*;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    explicit iterator(std::vector<int> start) : current_(std::move(start)), done_(false) {}

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++() {
      advance();
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      advance();
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.done_ == b.done_ && (a.done_ || a.current_ == b.current_);
    }

   private:
    void advance() {
      const std::size_t n = current_.size();
      int suffix = current_[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) {
        if (suffix > 0) {
          ++current_[i];
          for (std::size_t t = i + 1; t + 1 < n; ++t) current_[t] = 0;
          current_[n - 1] = suffix - 1;
          return;
        }
        suffix += current_[i];
      }
      done_ = true;
    }

    std::vector<int> current_;
    bool done_ = true;
  };

  WeakCompositions(int r, int n) : r_(r), n_(n) {
    if (r < 0 || n < 1) throw BoundsError("weak compositions need r >= 0 and n >= 1");
  }

  iterator begin() const {
    std::vector<int> start(static_cast<std::size_t>(n_), 0);
    start.back() = r_;
    return iterator(std::move(start));
  }
  iterator end() const { return iterator(); }
  BigInt size() const { return weak_composition_count(r_, n_); }

 private:
  int r_;
  int n_;
};

inline WeakCompositions weak_compositions(int r, int n) { return {r, n}; }

}  // namespace levychaos
