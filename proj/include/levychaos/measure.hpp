#pragma once

// Control measure m(dt,dx) = dt (σ² δ₀ + ν) and separable kernel factors g(t) h(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levychaos/combinatorics.hpp"
#include "levychaos/errors.hpp"

namespace levychaos {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Lévy measure

struct Atom {
  double x = 0;
  double lambda = 0;
};

/// Atoms x0·q^i with masses λ0·r^i, i >= 0.
struct PowerAtomFamily {
  double x0 = 1;
  double q = 0.5;
  double lambda0 = 1;
  double r = 0.5;
};

class LevyMeasure {
 public:
  LevyMeasure() = default;

  static LevyMeasure finite(std::vector<Atom> atoms) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Atom& a = atoms[i];
      if (!(a.x != 0) || !std::isfinite(a.x)) throw SchemaError("atom positions must be finite and nonzero");
      if (!(a.lambda > 0) || !std::isfinite(a.lambda)) throw SchemaError("atom masses must be positive");
      for (std::size_t j = 0; j < i; ++j) {
        if (atoms[j].x == a.x) throw SchemaError("atom positions must be distinct");
      }
    }
    LevyMeasure m;
    m.spec_ = std::move(atoms);
    return m;
  }

  static LevyMeasure power_family(PowerAtomFamily f) {
    if (!(f.x0 != 0) || !std::isfinite(f.x0)) throw SchemaError("power family needs x0 != 0");
    if (!(f.q > 0 && f.q < 1)) throw SchemaError("power family needs 0 < q < 1");
    if (!(f.r > 0 && f.r < 1)) throw SchemaError("power family needs 0 < r < 1");
    if (!(f.lambda0 > 0) || !std::isfinite(f.lambda0)) throw SchemaError("power family needs lambda0 > 0");
    if (!(f.r * f.q * f.q < 1)) throw SchemaError("power family must have finite second moment");
    LevyMeasure m;
    m.spec_ = f;
    return m;
  }

  bool is_family() const { return std::holds_alternative<PowerAtomFamily>(spec_); }
  bool is_empty() const { return !is_family() && atoms().empty(); }
  const std::vector<Atom>& atoms() const { return std::get<std::vector<Atom>>(spec_); }
  const PowerAtomFamily& family() const { return std::get<PowerAtomFamily>(spec_); }

  double total_mass() const {
    if (is_family()) return family().lambda0 / (1 - family().r);
    double s = 0;
    for (const auto& a : atoms()) s += a.lambda;
    return s;
  }

  /// Atom i of either variant.
  Atom atom(std::size_t i) const {
    if (!is_family()) return atoms().at(i);
    const auto& f = family();
    return {f.x0 * std::pow(f.q, static_cast<double>(i)), f.lambda0 * std::pow(f.r, static_cast<double>(i))};
  }

  /// Number of leading family atoms whose omitted tail has mass <= eps.
  std::size_t truncation_size(double eps) const {
    if (!is_family()) return atoms().size();
    const auto& f = family();
    std::size_t n = 0;
    double tail = total_mass();
    while (tail > eps) {
      tail -= f.lambda0 * std::pow(f.r, static_cast<double>(n));
      ++n;
    }
    return n;
  }

  /// Finite measure made of the first `truncation_size(eps)` atoms.
  LevyMeasure truncated(double eps) const {
    if (!is_family()) return *this;
    std::vector<Atom> a;
    for (std::size_t i = 0, n = truncation_size(eps); i < n; ++i) a.push_back(atom(i));
    LevyMeasure m;
    m.spec_ = std::move(a);
    return m;
  }

  friend bool operator==(const LevyMeasure& a, const LevyMeasure& b) {
    if (a.is_family() != b.is_family()) return false;
    if (a.is_family()) {
      const auto &x = a.family(), &y = b.family();
      return x.x0 == y.x0 && x.q == y.q && x.lambda0 == y.lambda0 && x.r == y.r;
    }
    const auto &x = a.atoms(), &y = b.atoms();
    return std::equal(x.begin(), x.end(), y.begin(), y.end(),
                      [](const Atom& u, const Atom& v) { return u.x == v.x && u.lambda == v.lambda; });
  }

 private:
  std::variant<std::vector<Atom>, PowerAtomFamily> spec_ = std::vector<Atom>{};
};

struct ControlMeasure {
  double sigma2 = 0;
  LevyMeasure nu;
  double T = 1;

  void validate() const {
    if (!(sigma2 >= 0) || !std::isfinite(sigma2)) throw SchemaError("sigma2 must be finite and >= 0");
    if (!(T > 0) || !std::isfinite(T)) throw SchemaError("horizon T must be positive");
  }
  friend bool operator==(const ControlMeasure&, const ControlMeasure&) = default;
};

/// The part of m seen by a measure class: no jumps for Brownian, no Gaussian slot for jumps.
inline ControlMeasure restrict(const ControlMeasure& m, MeasureClass cls) {
  ControlMeasure out = m;
  if (cls == MeasureClass::BrownianOnly) out.nu = LevyMeasure{};
  if (cls == MeasureClass::JumpOnly) out.sigma2 = 0;
  return out;
}

// ---------------------------------------------------------------------------
// Time factors

/// Real polynomial, ascending coefficients.
struct Polynomial {
  std::vector<double> c;

  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c(std::move(coeffs)) { trim(); }
  static Polynomial constant(double v) { return Polynomial({v}); }
  static Polynomial monomial(double coeff, int p) {
    std::vector<double> v(static_cast<std::size_t>(p) + 1, 0.0);
    v.back() = coeff;
    return Polynomial(std::move(v));
  }

  int degree() const { return c.empty() ? -1 : static_cast<int>(c.size()) - 1; }
  bool is_zero() const { return c.empty(); }

  double operator()(double t) const {
    double v = 0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
    return v;
  }

  Polynomial operator*(const Polynomial& o) const {
    if (is_zero() || o.is_zero()) return {};
    std::vector<double> r(c.size() + o.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
    }
    return Polynomial(std::move(r));
  }
  Polynomial operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c.size(), o.c.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) r[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i) r[i] += o.c[i];
    return Polynomial(std::move(r));
  }
  Polynomial operator-(const Polynomial& o) const { return *this + o * constant(-1); }
  Polynomial scaled(double s) const { return *this * constant(s); }

  /// Antiderivative vanishing at 0.
  Polynomial antiderivative() const {
    std::vector<double> r(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) r[i + 1] = c[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(r));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }
};

/// Factor exp(rate · t^alpha).
struct ExpTerm {
  double rate = 1;
  double alpha = 1;
  friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// g(t) = P_i(t) · exp(Σ rate·t^α) on [b_i, b_{i+1}); the last piece extends to infinity.
/// Closed under products. An `absolute` factor stands for |g|.
class TimeFactor {
 public:
  TimeFactor() : breaks_{0.0}, pieces_{Polynomial::constant(1)} {}

  static TimeFactor constant(double c) { return piecewise({0.0}, {Polynomial::constant(c)}); }
  static TimeFactor monomial(double coeff, int p) {
    if (p < 0) throw SchemaError("monomial power must be >= 0");
    return piecewise({0.0}, {Polynomial::monomial(coeff, p)});
  }
  /// coeff · exp(rate · t^alpha)
  static TimeFactor exp_pow(double alpha, double rate = 1, double coeff = 1) {
    if (!(alpha > 0)) throw SchemaError("exp_pow needs alpha > 0");
    TimeFactor g = constant(coeff);
    if (rate != 0) g.exps_.push_back({rate, alpha});
    return g;
  }
  static TimeFactor piecewise(std::vector<double> breaks, std::vector<Polynomial> pieces) {
    if (breaks.empty() || breaks.size() != pieces.size()) {
      throw SchemaError("piecewise polynomial needs one break per piece");
    }
    if (breaks[0] != 0) throw SchemaError("first break must be 0");
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      if (!(breaks[i] > breaks[i - 1])) throw SchemaError("breaks must be strictly increasing");
    }
    TimeFactor g;
    g.breaks_ = std::move(breaks);
    g.pieces_ = std::move(pieces);
    return g;
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }
  const std::vector<ExpTerm>& exp_terms() const { return exps_; }
  bool absolute() const { return absolute_; }
  bool is_polynomial() const { return exps_.empty(); }

  std::size_t piece_index(double t) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    return it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin() - 1);
  }
  const Polynomial& piece_at(double t) const { return pieces_[piece_index(t)]; }

  double exponent(double t) const {
    double e = 0;
    for (const auto& x : exps_) e += x.rate * std::pow(t, x.alpha);
    return e;
  }

  double operator()(double t) const {
    const double v = piece_at(t)(t) * (exps_.empty() ? 1.0 : std::exp(exponent(t)));
    return absolute_ ? std::abs(v) : v;
  }

  TimeFactor operator*(const TimeFactor& o) const {
    if (absolute_ != o.absolute_) throw SchemaError("cannot multiply absolute and signed time factors");
    std::vector<double> br = breaks_;
    br.insert(br.end(), o.breaks_.begin(), o.breaks_.end());
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    std::vector<Polynomial> pc;
    for (double b : br) pc.push_back(piece_at(b) * o.piece_at(b));
    TimeFactor out = piecewise(std::move(br), std::move(pc));
    out.exps_ = exps_;
    for (const auto& e : o.exps_) {
      auto it = std::find_if(out.exps_.begin(), out.exps_.end(),
                             [&](const ExpTerm& x) { return x.alpha == e.alpha; });
      if (it == out.exps_.end()) {
        out.exps_.push_back(e);
      } else {
        it->rate += e.rate;
      }
    }
    std::erase_if(out.exps_, [](const ExpTerm& x) { return x.rate == 0; });
    std::sort(out.exps_.begin(), out.exps_.end(),
              [](const ExpTerm& a, const ExpTerm& b) { return a.alpha < b.alpha; });
    out.absolute_ = absolute_;
    return out;
  }

  TimeFactor pow(int n) const {
    if (n < 0) throw BoundsError("negative power of a time factor");
    TimeFactor r = constant(1);
    r.absolute_ = absolute_;
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  TimeFactor abs() const {
    TimeFactor g = *this;
    g.absolute_ = true;
    return g;
  }

  TimeFactor scaled(double s) const {
    TimeFactor g = *this;
    for (auto& p : g.pieces_) p = p.scaled(s);
    return g;
  }

  friend bool operator==(const TimeFactor&, const TimeFactor&) = default;

 private:
  std::vector<double> breaks_;
  std::vector<Polynomial> pieces_;
  std::vector<ExpTerm> exps_;
  bool absolute_ = false;
};

namespace detail {

inline double quadrature(const auto& f, double a, double b, const char* what) {
  if (!(b > a)) return 0;
  double err = 0, l1 = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12, &err, &l1);
  if (std::isfinite(v) && err <= 1e-10 * std::max(l1, 1e-300)) return v;
  // Endpoint singularities in a derivative (t^alpha with alpha < 1) defeat the Kronrod
  // error estimate; double-exponential quadrature copes with them.
  double err2 = 0, l1_2 = 0;
  std::size_t levels = 0;
  const double v2 = boost::math::quadrature::tanh_sinh<double>().integrate(f, a, b, 1e-12, &err2, &l1_2, &levels);
  if (std::isfinite(v2) && err2 <= 1e-10 * std::max(l1_2, 1e-300)) return v2;
  if (std::isfinite(v) && err <= 1e-8 * std::max(l1, 1e-300)) return v;
  std::ostringstream os;
  os << what << ": quadrature on [" << a << ", " << b << "] did not converge (value " << v
     << ", error estimate " << std::min(err, err2) << ")";
  throw NumericalError(os.str());
}

/// Points in (a, b) where p changes sign.
inline std::vector<double> sign_changes(const Polynomial& p, double a, double b) {
  std::vector<double> out;
  if (p.degree() < 1) return out;
  const int grid = 64 * (p.degree() + 1);
  double x0 = a, f0 = p(a);
  for (int i = 1; i <= grid; ++i) {
    const double x1 = a + (b - a) * i / grid;
    const double f1 = p(x1);
    if ((f0 < 0 && f1 > 0) || (f0 > 0 && f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    if (f1 != 0) {
      x0 = x1;
      f0 = f1;
    }
  }
  return out;
}

/// ∫_a^b t^n e^{ct} dt, closed form; nullopt where the alternating sum would cancel badly.
inline std::optional<double> exp_monomial_integral(int n, double c, double a, double b) {
  if (n == 0) return std::exp(c * a) * std::expm1(c * (b - a)) / c;
  if (c * b < 2.0 * n + 2 || c * a < 0) return std::nullopt;
  auto F = [&](double t) {
    double s = 0, term = 1.0 / c;  // n!/(n-j)! / c^{j+1}
    for (int j = 0; j <= n; ++j) {
      s += ((j % 2) ? -term : term) * std::pow(t, n - j);
      term *= static_cast<double>(n - j) / c;
    }
    return std::exp(c * t) * s;
  };
  return F(b) - F(a);
}

/// ∫_a^b sign·P(t)·exp(E(t) - shift) dt for one polynomial piece.
inline double piece_integral(const TimeFactor& g, const Polynomial& p, double a, double b, double sign,
                             double shift, bool* used_quadrature) {
  if (p.is_zero() || !(b > a)) return 0;
  const auto& ex = g.exp_terms();
  if (ex.empty() && shift == 0) {
    const Polynomial P = p.antiderivative();
    return sign * (P(b) - P(a));
  }
  if (ex.size() == 1 && ex[0].alpha == 1 && shift == 0) {
    double s = 0;
    bool ok = true;
    for (int i = 0; i <= p.degree() && ok; ++i) {
      if (p.c[i] == 0) continue;
      auto v = exp_monomial_integral(i, ex[0].rate, a, b);
      if (!v) {
        ok = false;
      } else {
        s += p.c[i] * *v;
      }
    }
    if (ok) return sign * s;
  }
  if (used_quadrature) *used_quadrature = true;
  auto f = [&](double t) { return sign * p(t) * std::exp(g.exponent(t) - shift); };
  return quadrature(f, a, b, "time integral");
}

inline double time_integral_shifted(const TimeFactor& g, double T, double shift, bool* used_quadrature) {
  if (!(T > 0)) throw BoundsError("time horizon must be positive");
  double total = 0;
  const auto& br = g.breaks();
  for (std::size_t i = 0; i < br.size() && br[i] < T; ++i) {
    const double a = br[i];
    const double b = (i + 1 < br.size()) ? std::min(br[i + 1], T) : T;
    const Polynomial& p = g.pieces()[i];
    if (!g.absolute()) {
      total += piece_integral(g, p, a, b, 1.0, shift, used_quadrature);
      continue;
    }
    std::vector<double> cuts{a};
    for (double r : sign_changes(p, a, b)) cuts.push_back(r);
    cuts.push_back(b);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
      const double sign = p(mid) < 0 ? -1.0 : 1.0;
      total += piece_integral(g, p, cuts[s], cuts[s + 1], sign, shift, used_quadrature);
    }
  }
  return total;
}

}  // namespace detail

/// ∫_0^T g(t) dt.
inline double time_integral(const TimeFactor& g, double T, bool* used_quadrature = nullptr) {
  return detail::time_integral_shifted(g, T, 0.0, used_quadrature);
}

/// ∫_0^T g(t)^N dt.
inline double time_integral(const TimeFactor& g, int N, double T, bool* used_quadrature = nullptr) {
  if (N < 1) throw BoundsError("power must be >= 1");
  return time_integral(g.pow(N), T, used_quadrature);
}

/// log ∫_0^T g(t) dt for a positive integrand, evaluated without forming exp of the peak.
inline double log_time_integral(const TimeFactor& g, double T) {
  double shift = 0;
  if (!g.is_polynomial()) {
    shift = std::max(g.exponent(0), g.exponent(T));
    for (int i = 1; i < 1024; ++i) shift = std::max(shift, g.exponent(T * i / 1024.0));
  }
  const double v = detail::time_integral_shifted(g, T, shift, nullptr);
  if (!(v > 0)) throw NumericalError("log of a nonpositive time integral");
  return std::log(v) + shift;
}

/// Whether integrating g needs numerical quadrature.
inline bool needs_quadrature(const TimeFactor& g, double T) {
  bool q = false;
  time_integral(g, T, &q);
  return q;
}

// ---------------------------------------------------------------------------
// Space factors

/// h(x) with h(0) = h0 and, at atom i, h(x_i) = values[i] · scale · |x_i|^beta.
/// Without a table the values are 1 (pure power law); beta = 0, scale = 1 gives a plain table.
struct SpaceFactor {
  double h0 = 1;
  std::optional<std::vector<double>> values;
  double scale = 1;
  double beta = 0;

  static SpaceFactor tabulated(double h0, std::vector<double> v) { return {h0, std::move(v), 1, 0}; }
  static SpaceFactor power_law(double h0, double beta, double scale = 1) {
    return {h0, std::nullopt, scale, beta};
  }
  static SpaceFactor constant(double c) { return {c, std::nullopt, c, 0}; }

  double at_atom(std::size_t i, double x) const {
    double v = scale * (beta == 0 ? 1.0 : std::pow(std::abs(x), beta));
    if (values) v *= values->at(i);
    return v;
  }

  SpaceFactor operator*(const SpaceFactor& o) const {
    SpaceFactor r{h0 * o.h0, std::nullopt, scale * o.scale, beta + o.beta};
    if (values && o.values) {
      if (values->size() != o.values->size()) throw SchemaError("tabulated space factors differ in length");
      std::vector<double> v(values->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (*values)[i] * (*o.values)[i];
      r.values = std::move(v);
    } else if (values) {
      r.values = values;
    } else if (o.values) {
      r.values = o.values;
    }
    return r;
  }

  SpaceFactor pow(int n) const {
    SpaceFactor r{1, std::nullopt, 1, 0};
    for (int i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  SpaceFactor abs() const {
    SpaceFactor r = *this;
    r.h0 = std::abs(h0);
    r.scale = std::abs(scale);
    if (r.values) {
      for (auto& v : *r.values) v = std::abs(v);
    }
    return r;
  }

  SpaceFactor scaled(double s) const {
    SpaceFactor r = *this;
    r.h0 *= s;
    r.scale *= s;
    return r;
  }

  friend bool operator==(const SpaceFactor&, const SpaceFactor&) = default;
};

/// Check that a space factor can be evaluated on ν.
inline void check_space_factor(const SpaceFactor& h, const LevyMeasure& nu) {
  if (!h.values) return;
  if (nu.is_family()) throw SchemaError("tabulated space factor cannot be used with a power family");
  if (h.values->size() != nu.atoms().size()) {
    throw SchemaError("tabulated space factor has " + std::to_string(h.values->size()) +
                      " values but the measure has " + std::to_string(nu.atoms().size()) + " atoms");
  }
}

/// ν(h) = ∫ h dν; ±inf when the family series diverges.
inline double nu_integral(const SpaceFactor& h, const LevyMeasure& nu) {
  check_space_factor(h, nu);
  if (!nu.is_family()) {
    double s = 0;
    for (std::size_t i = 0; i < nu.atoms().size(); ++i) s += nu.atoms()[i].lambda * h.at_atom(i, nu.atoms()[i].x);
    return s;
  }
  const auto& f = nu.family();
  const double lead = f.lambda0 * h.scale * std::pow(std::abs(f.x0), h.beta);
  if (lead == 0) return 0;
  const double ratio = f.r * std::pow(f.q, h.beta);
  if (ratio >= 1) return lead > 0 ? kInf : -kInf;
  return lead / (1 - ratio);
}

/// ν(∏ h_j^{e_j}).
inline double nu_power_integral(const std::vector<SpaceFactor>& factors, const std::vector<int>& exponents,
                                const LevyMeasure& nu) {
  if (factors.empty() || factors.size() != exponents.size()) {
    throw BoundsError("need one exponent per space factor");
  }
  SpaceFactor h{1, std::nullopt, 1, 0};
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (exponents[i] < 0) throw BoundsError("exponents must be >= 0");
    h = h * factors[i].pow(exponents[i]);
  }
  return nu_integral(h, nu);
}

// ---------------------------------------------------------------------------
// Kernel factors

enum class Domain { Full, R0 };

struct KernelFactor {
  TimeFactor time;
  SpaceFactor space;
  Domain domain = Domain::Full;

  /// h(0) as seen by the Gaussian slot.
  double effective_h0() const { return domain == Domain::R0 ? 0.0 : space.h0; }

  KernelFactor abs() const { return {time.abs(), space.abs(), domain}; }
  KernelFactor scaled(double s) const { return {time, space.scaled(s), domain}; }

  friend bool operator==(const KernelFactor&, const KernelFactor&) = default;
};

/// Pointwise product; restricted to R0 if any factor is, or if `domain` says so.
inline KernelFactor pointwise_product(const std::vector<KernelFactor>& fs, Domain domain = Domain::Full) {
  if (fs.empty()) throw BoundsError("empty factor product");
  KernelFactor out = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) {
    out.time = out.time * fs[i].time;
    out.space = out.space * fs[i].space;
    if (fs[i].domain == Domain::R0) out.domain = Domain::R0;
  }
  if (domain == Domain::R0) out.domain = Domain::R0;
  return out;
}

/// ∫ ∏ f_j dm over (0,T] × ℝ (Full) or (0,T] × ℝ₀ (R0).
inline double m_product_integral(const std::vector<KernelFactor>& factors, const ControlMeasure& m,
                                 Domain domain = Domain::Full, bool* used_quadrature = nullptr) {
  const KernelFactor p = pointwise_product(factors, domain);
  const double ti = time_integral(p.time, m.T, used_quadrature);
  if (ti == 0) return 0;
  double total = 0;
  if (m.sigma2 > 0 && p.domain == Domain::Full) total += m.sigma2 * p.space.h0 * ti;
  if (!m.nu.is_empty()) {
    const double nv = nu_integral(p.space, m.nu);
    if (nv != 0) total += ti * nv;
  }
  return total;
}

/// ∫ f^N dm over the requested domain.
inline double m_power_integral(const KernelFactor& f, int N, const ControlMeasure& m,
                               Domain domain = Domain::Full, bool* used_quadrature = nullptr) {
  if (N < 1) throw BoundsError("power must be >= 1");
  return m_product_integral(std::vector<KernelFactor>(static_cast<std::size_t>(N), f), m, domain,
                            used_quadrature);
}

}  // namespace levychaos
