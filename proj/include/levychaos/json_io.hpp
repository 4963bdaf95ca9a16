#pragma once

// Scenario files and result serialization.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "levychaos/errors.hpp"
#include "levychaos/measure.hpp"
#include "levychaos/moments.hpp"
#include "levychaos/product_formula.hpp"
#include "levychaos/simulator.hpp"

namespace levychaos {

using Json = nlohmann::ordered_json;

struct ScenarioOptions {
  MeasureClass measure_class = MeasureClass::General;
  std::vector<int> orders;
  std::vector<double> T_grid;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 42;

  friend bool operator==(const ScenarioOptions&, const ScenarioOptions&) = default;
};

struct ScenarioSpec {
  ControlMeasure measure;
  std::vector<TensorKernel> kernels;
  ScenarioOptions options;
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void dump_to(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << "," << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump_to(os, it.value(), indent, depth + 1);
      }
      os << nl << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      bool scalar_only = true;
      for (const auto& v : j) scalar_only = scalar_only && !v.is_structured();
      if (scalar_only) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << (indent > 0 ? ", " : ",");
          dump_to(os, j[i], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[" << nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << "," << nl;
        os << pad;
        dump_to(os, j[i], indent, depth + 1);
      }
      os << nl << close << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serialize with doubles at 17 significant digits and infinities as "inf".
inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::dump_to(os, j, indent, 0);
  return os.str();
}

inline std::string rational_to_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

inline Rational rational_from_string(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw SchemaError("malformed rational '" + s + "'");
  }
}

inline std::string to_string(MeasureClass c) {
  switch (c) {
    case MeasureClass::BrownianOnly:
      return "brownian";
    case MeasureClass::JumpOnly:
      return "jump";
    default:
      return "general";
  }
}

inline MeasureClass measure_class_from_string(const std::string& s) {
  if (s == "general") return MeasureClass::General;
  if (s == "brownian") return MeasureClass::BrownianOnly;
  if (s == "jump") return MeasureClass::JumpOnly;
  throw SchemaError("unknown measure class '" + s + "' (general, brownian, jump)");
}

// ---------------------------------------------------------------------------
// Reading helpers

namespace detail {

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw SchemaError("unknown field '" + it.key() + "' in " + where);
  }
}

inline double number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaError(where + " must be a number");
}

inline double number_at(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError(where + " is missing '" + key + "'");
  return number(j.at(key), where + "." + key);
}

inline double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

inline int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where + " must be an integer");
  return j.get<int>();
}

inline std::vector<double> number_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline std::vector<int> int_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array");
  std::vector<int> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(integer(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

inline Json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measure

inline Json to_json(const ControlMeasure& m) {
  Json nu = Json::object();
  if (m.nu.is_family()) {
    const auto& f = m.nu.family();
    nu["power_family"] = {{"x0", f.x0}, {"q", f.q}, {"lambda0", f.lambda0}, {"r", f.r}};
  } else {
    Json atoms = Json::array();
    for (const auto& a : m.nu.atoms()) atoms.push_back({{"x", a.x}, {"lambda", a.lambda}});
    nu["atoms"] = atoms;
  }
  return {{"sigma2", m.sigma2}, {"T", m.T}, {"nu", nu}};
}

inline ControlMeasure measure_from_json(const Json& j) {
  detail::check_keys(j, "measure", {"sigma2", "T", "nu"});
  ControlMeasure m;
  m.sigma2 = detail::number_or(j, "sigma2", 0.0, "measure");
  m.T = detail::number_at(j, "T", "measure");
  if (j.contains("nu")) {
    const Json& nu = j.at("nu");
    detail::check_keys(nu, "measure.nu", {"atoms", "power_family"});
    if (nu.contains("atoms") && nu.contains("power_family")) {
      throw SchemaError("measure.nu takes either 'atoms' or 'power_family'");
    }
    if (nu.contains("power_family")) {
      const Json& f = nu.at("power_family");
      detail::check_keys(f, "measure.nu.power_family", {"x0", "q", "lambda0", "r"});
      const std::string w = "measure.nu.power_family";
      m.nu = LevyMeasure::power_family({detail::number_at(f, "x0", w), detail::number_at(f, "q", w),
                                        detail::number_at(f, "lambda0", w), detail::number_at(f, "r", w)});
    } else if (nu.contains("atoms")) {
      const Json& a = nu.at("atoms");
      if (!a.is_array()) throw SchemaError("measure.nu.atoms must be an array");
      std::vector<Atom> atoms;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string w = "measure.nu.atoms[" + std::to_string(i) + "]";
        detail::check_keys(a[i], w, {"x", "lambda"});
        atoms.push_back({detail::number_at(a[i], "x", w), detail::number_at(a[i], "lambda", w)});
      }
      m.nu = LevyMeasure::finite(std::move(atoms));
    }
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Factors

inline Json to_json(const TimeFactor& g) {
  const auto& pieces = g.pieces();
  const auto& ex = g.exp_terms();
  const bool single = pieces.size() == 1;
  if (!g.absolute() && single && ex.empty()) {
    const auto& c = pieces[0].c;
    if (c.size() <= 1) return {{"kind", "constant"}, {"c", c.empty() ? 0.0 : c[0]}};
    if (std::count(c.begin(), c.end(), 0.0) == static_cast<long>(c.size()) - 1) {
      return {{"kind", "monomial"}, {"coeff", c.back()}, {"power", static_cast<int>(c.size()) - 1}};
    }
  }
  if (!g.absolute() && single && ex.size() == 1 && pieces[0].degree() == 0) {
    return {{"kind", "exp_pow"}, {"alpha", ex[0].alpha}, {"rate", ex[0].rate}, {"coeff", pieces[0].c[0]}};
  }
  Json pcs = Json::array();
  for (const auto& p : pieces) {
    Json c = Json::array();
    for (double v : p.c) c.push_back(v);
    pcs.push_back(c);
  }
  if (!g.absolute() && ex.empty()) return {{"kind", "piecewise_poly"}, {"breaks", g.breaks()}, {"pieces", pcs}};
  Json exps = Json::array();
  for (const auto& e : ex) exps.push_back({{"rate", e.rate}, {"alpha", e.alpha}});
  return {{"kind", "general"}, {"breaks", g.breaks()}, {"pieces", pcs}, {"exp_terms", exps}, {"absolute", g.absolute()}};
}

inline TimeFactor time_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw SchemaError(where + " needs a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  auto pieces_from = [&](const Json& arr) {
    if (!arr.is_array()) throw SchemaError(where + ".pieces must be an array");
    std::vector<Polynomial> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.emplace_back(detail::number_list(arr[i], where + ".pieces[" + std::to_string(i) + "]"));
    }
    return out;
  };
  if (kind == "constant") {
    detail::check_keys(j, where, {"kind", "c"});
    return TimeFactor::constant(detail::number_or(j, "c", 1.0, where));
  }
  if (kind == "monomial") {
    detail::check_keys(j, where, {"kind", "coeff", "power"});
    if (!j.contains("power")) throw SchemaError(where + " is missing 'power'");
    return TimeFactor::monomial(detail::number_or(j, "coeff", 1.0, where), detail::integer(j.at("power"), where + ".power"));
  }
  if (kind == "exp_pow") {
    detail::check_keys(j, where, {"kind", "alpha", "rate", "coeff"});
    return TimeFactor::exp_pow(detail::number_at(j, "alpha", where), detail::number_or(j, "rate", 1.0, where),
                               detail::number_or(j, "coeff", 1.0, where));
  }
  if (kind == "piecewise_poly") {
    detail::check_keys(j, where, {"kind", "breaks", "pieces"});
    if (!j.contains("breaks") || !j.contains("pieces")) throw SchemaError(where + " needs 'breaks' and 'pieces'");
    return TimeFactor::piecewise(detail::number_list(j.at("breaks"), where + ".breaks"), pieces_from(j.at("pieces")));
  }
  if (kind == "general") {
    detail::check_keys(j, where, {"kind", "breaks", "pieces", "exp_terms", "absolute"});
    if (!j.contains("breaks") || !j.contains("pieces")) throw SchemaError(where + " needs 'breaks' and 'pieces'");
    TimeFactor g = TimeFactor::piecewise(detail::number_list(j.at("breaks"), where + ".breaks"), pieces_from(j.at("pieces")));
    if (j.contains("exp_terms")) {
      const Json& e = j.at("exp_terms");
      if (!e.is_array()) throw SchemaError(where + ".exp_terms must be an array");
      for (std::size_t i = 0; i < e.size(); ++i) {
        const std::string w = where + ".exp_terms[" + std::to_string(i) + "]";
        detail::check_keys(e[i], w, {"rate", "alpha"});
        g = g * TimeFactor::exp_pow(detail::number_at(e[i], "alpha", w), detail::number_at(e[i], "rate", w));
      }
    }
    if (j.contains("absolute")) {
      if (!j.at("absolute").is_boolean()) throw SchemaError(where + ".absolute must be a boolean");
      if (j.at("absolute").get<bool>()) g = g.abs();
    }
    return g;
  }
  throw SchemaError(where + ": unknown time kind '" + kind + "'");
}

inline Json to_json(const SpaceFactor& h) {
  Json j{{"h0", h.h0}};
  if (h.values) j["values"] = *h.values;
  if (h.beta != 0) j["beta"] = h.beta;
  if (h.scale != 1) j["scale"] = h.scale;
  return j;
}

inline SpaceFactor space_from_json(const Json& j, const std::string& where) {
  detail::check_keys(j, where, {"h0", "values", "beta", "scale"});
  SpaceFactor h;
  h.h0 = detail::number_or(j, "h0", 0.0, where);
  if (j.contains("values")) h.values = detail::number_list(j.at("values"), where + ".values");
  h.beta = detail::number_or(j, "beta", 0.0, where);
  h.scale = detail::number_or(j, "scale", 1.0, where);
  return h;
}

inline Json to_json(const KernelFactor& f) {
  return {{"time", to_json(f.time)}, {"space", to_json(f.space)}, {"domain", f.domain == Domain::R0 ? "r0" : "full"}};
}

inline KernelFactor factor_from_json(const Json& j, const std::string& where) {
  detail::check_keys(j, where, {"time", "space", "domain"});
  KernelFactor f;
  f.time = j.contains("time") ? time_from_json(j.at("time"), where + ".time") : TimeFactor::constant(1);
  if (!j.contains("space")) throw SchemaError(where + " is missing 'space'");
  f.space = space_from_json(j.at("space"), where + ".space");
  if (j.contains("domain")) {
    const Json& d = j.at("domain");
    if (d == "full") {
      f.domain = Domain::Full;
    } else if (d == "r0") {
      f.domain = Domain::R0;
    } else {
      throw SchemaError(where + ".domain must be \"full\" or \"r0\"");
    }
  }
  return f;
}

inline Json factors_json(const std::vector<KernelFactor>& fs) {
  Json a = Json::array();
  for (const auto& f : fs) a.push_back(to_json(f));
  return a;
}

inline std::vector<KernelFactor> factors_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + " must be an array");
  std::vector<KernelFactor> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(factor_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json to_json(const TensorKernel& k) { return {{"label", k.label}, {"factors", factors_json(k.factors)}}; }

// ---------------------------------------------------------------------------
// Scenario

inline Json to_json(const ScenarioSpec& s) {
  Json kernels = Json::array();
  for (const auto& k : s.kernels) kernels.push_back(to_json(k));
  Json opt{{"measure_class", to_string(s.options.measure_class)},
           {"n_paths", s.options.n_paths},
           {"seed", s.options.seed}};
  if (!s.options.orders.empty()) opt["orders"] = s.options.orders;
  if (!s.options.T_grid.empty()) opt["T_grid"] = s.options.T_grid;
  return {{"measure", to_json(s.measure)}, {"kernels", kernels}, {"options", opt}};
}

/// Either "kernels" (tensor kernels) or "factors" (each an order-1 kernel) must be present.
inline ScenarioSpec scenario_from_json(const Json& j) {
  detail::check_keys(j, "scenario", {"measure", "kernels", "factors", "options"});
  ScenarioSpec s;
  if (!j.contains("measure")) throw SchemaError("scenario is missing 'measure'");
  s.measure = measure_from_json(j.at("measure"));
  if (j.contains("kernels") == j.contains("factors")) {
    throw SchemaError("scenario needs exactly one of 'kernels' or 'factors'");
  }
  if (j.contains("kernels")) {
    const Json& ks = j.at("kernels");
    if (!ks.is_array() || ks.empty()) throw SchemaError("scenario.kernels must be a nonempty array");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const std::string w = "kernels[" + std::to_string(i) + "]";
      detail::check_keys(ks[i], w, {"label", "factors"});
      TensorKernel k;
      k.label = ks[i].contains("label") ? ks[i].at("label").get<std::string>() : "f" + std::to_string(i + 1);
      if (!ks[i].contains("factors")) throw SchemaError(w + " is missing 'factors'");
      k.factors = factors_from_json(ks[i].at("factors"), w + ".factors");
      if (k.factors.empty()) throw SchemaError(w + " has no factors");
      s.kernels.push_back(std::move(k));
    }
  } else {
    const auto fs = factors_from_json(j.at("factors"), "factors");
    if (fs.empty()) throw SchemaError("scenario.factors must be nonempty");
    for (std::size_t i = 0; i < fs.size(); ++i) s.kernels.push_back({{fs[i]}, "f" + std::to_string(i + 1)});
  }
  if (j.contains("options")) {
    const Json& o = j.at("options");
    detail::check_keys(o, "options", {"measure_class", "orders", "T_grid", "n_paths", "seed"});
    if (o.contains("measure_class")) {
      if (!o.at("measure_class").is_string()) throw SchemaError("options.measure_class must be a string");
      s.options.measure_class = measure_class_from_string(o.at("measure_class").get<std::string>());
    }
    if (o.contains("orders")) s.options.orders = detail::int_list(o.at("orders"), "options.orders");
    if (o.contains("T_grid")) s.options.T_grid = detail::number_list(o.at("T_grid"), "options.T_grid");
    if (o.contains("n_paths")) {
      if (!o.at("n_paths").is_number_unsigned()) throw SchemaError("options.n_paths must be a positive integer");
      s.options.n_paths = o.at("n_paths").get<std::size_t>();
    }
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned()) throw SchemaError("options.seed must be a nonnegative integer");
      s.options.seed = o.at("seed").get<std::uint64_t>();
    }
  }
  for (const auto& k : s.kernels) {
    for (const auto& f : k.factors) check_space_factor(f.space, s.measure.nu);
  }
  return s;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Results

inline Json to_json(const ExponentPair& ep) { return {{"orders", ep.orders}, {"l", ep.l}, {"l_o", ep.l_o}}; }

inline ExponentPair exponents_from_json(const Json& j) {
  detail::check_keys(j, "exponents", {"orders", "l", "l_o"});
  return {detail::int_list(j.at("orders"), "orders"), detail::int_list(j.at("l"), "l"), detail::int_list(j.at("l_o"), "l_o")};
}

inline Json to_json(const StarTerm& t) {
  Json comps = Json::array();
  for (const auto& c : t.components) {
    comps.push_back({{"weight", rational_to_string(c.weight)},
                     {"scalar", detail::number_json(c.scalar)},
                     {"factors", factors_json(c.factors)}});
  }
  return {{"exponents", to_json(t.exponents)},
          {"coefficient", rational_to_string(t.coefficient)},
          {"scalar", detail::number_json(t.scalar())},
          {"divergent", t.divergent},
          {"quadrature", t.quadrature},
          {"components", comps}};
}

inline Json to_json(const ChaosExpansion& e) {
  Json levels = Json::array();
  for (const auto& [k, terms] : e.terms_by_order) {
    Json ts = Json::array();
    for (const auto& t : terms) ts.push_back(to_json(t));
    levels.push_back({{"k", k}, {"count", terms.size()}, {"terms", ts}});
  }
  return {{"measure_class", to_string(e.measure_class)}, {"orders", e.orders}, {"levels", levels}};
}

inline ChaosExpansion expansion_from_json(const Json& j) {
  detail::check_keys(j, "expansion", {"measure_class", "orders", "levels"});
  ChaosExpansion e;
  e.measure_class = measure_class_from_string(j.at("measure_class").get<std::string>());
  e.orders = detail::int_list(j.at("orders"), "orders");
  for (const auto& level : j.at("levels")) {
    detail::check_keys(level, "level", {"k", "count", "terms"});
    auto& list = e.terms_by_order[detail::integer(level.at("k"), "k")];
    for (const auto& tj : level.at("terms")) {
      detail::check_keys(tj, "term", {"exponents", "coefficient", "scalar", "divergent", "quadrature", "components"});
      StarTerm t;
      t.exponents = exponents_from_json(tj.at("exponents"));
      t.coefficient = rational_from_string(tj.at("coefficient").get<std::string>());
      t.divergent = tj.at("divergent").get<bool>();
      t.quadrature = tj.at("quadrature").get<bool>();
      for (const auto& cj : tj.at("components")) {
        detail::check_keys(cj, "component", {"weight", "scalar", "factors"});
        t.components.push_back({rational_from_string(cj.at("weight").get<std::string>()),
                                detail::number(cj.at("scalar"), "scalar"),
                                factors_from_json(cj.at("factors"), "factors")});
      }
      list.push_back(std::move(t));
    }
  }
  return e;
}

inline Json to_json(const L2Report& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"exponents", to_json(e.exponents)},
                       {"term", format_exponents(e.exponents)},
                       {"norm2", detail::number_json(e.norm2)},
                       {"finite", e.finite}});
  }
  return {{"passed", r.passed}, {"entries", entries}};
}

inline Json to_json(const CumulantSequence& c) {
  Json v = Json::array();
  for (double x : c.values) v.push_back(detail::number_json(x));
  return {{"normalization", c.normalization == CumulantSequence::Normalization::Raw ? "raw" : "standardized"},
          {"values", v}};
}

inline Json to_json(const Statistic& s) {
  Json j{{"statistic", s.name}, {"empirical", s.mean}, {"se", s.se}};
  j["target"] = s.target ? detail::number_json(*s.target) : Json(nullptr);
  j["z_score"] = s.z_score ? detail::number_json(*s.z_score) : Json(nullptr);
  if (s.target_divergent) j["target_divergent"] = true;
  return j;
}

inline Json to_json(const EmpiricalMoments& m) {
  Json stats = Json::array();
  for (const auto& s : m.statistics) stats.push_back(to_json(s));
  Json j{{"n_paths", m.n_paths}, {"seed", m.seed}, {"rng", m.rng}};
  if (m.truncated) j["truncation"] = {{"tail_mass", m.tail_mass}, {"bias_bound", m.truncation_bias}};
  j["statistics"] = stats;
  return j;
}

}  // namespace levychaos
