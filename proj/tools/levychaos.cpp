// levychaos: command-line front end.
//
// Exit codes: 0 ok, 2 bad input, 3 divergence / square-integrability failure,
// 4 validation failure, 5 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levychaos/combinatorics.hpp"
#include "levychaos/json_io.hpp"
#include "levychaos/measure.hpp"
#include "levychaos/moments.hpp"
#include "levychaos/product_formula.hpp"
#include "levychaos/simulator.hpp"

namespace {

using namespace levychaos;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitMath = 3;
constexpr int kExitValidation = 4;
constexpr int kExitNumeric = 5;

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw SchemaError("cannot write '" + out + "'");
  f << text;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw SchemaError("bad horizon grid '" + s + "' (expected a:b:n)");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != static_cast<int>(parts[2])) {
    throw SchemaError("bad horizon grid '" + s + "' (expected a:b:n)");
  }
  const int n = static_cast<int>(parts[2]);
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(n == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * i / (n - 1));
  return grid;
}

const KernelFactor& first_factor(const ScenarioSpec& s) {
  if (s.kernels.empty() || s.kernels[0].order() != 1) {
    throw SchemaError("this command needs an order-1 kernel (a 'factors' entry) first");
  }
  return s.kernels[0].factors[0];
}

// ---------------------------------------------------------------------------

struct CountArgs {
  int n = 0;
  std::vector<int> m;
  std::optional<int> k;
  std::string method = "recursive";
  std::string cls = "general";
  bool check = false;
};

int cmd_count(const CountArgs& a) {
  if (static_cast<int>(a.m.size()) != a.n) throw SchemaError("--n must equal the length of --m");
  validate_orders(a.m);
  const MeasureClass cls = measure_class_from_string(a.cls);
  const int total = std::accumulate(a.m.begin(), a.m.end(), 0);
  if (a.k && (*a.k < 0 || *a.k > total)) throw SchemaError("--k must lie in [0, sum of m]");

  std::vector<std::string> methods;
  if (a.method == "all") {
    methods = cls == MeasureClass::BrownianOnly ? std::vector<std::string>{"brownian", "enumerate"}
                                                : std::vector<std::string>{"recursive", "weakcomp", "genfunc", "enumerate"};
  } else if (a.method == "recursive" || a.method == "weakcomp" || a.method == "genfunc" || a.method == "enumerate") {
    methods = {cls == MeasureClass::BrownianOnly && a.method != "enumerate" ? "brownian" : a.method};
  } else {
    throw SchemaError("unknown method '" + a.method + "'");
  }

  std::vector<ExponentPair> all;
  if (std::find(methods.begin(), methods.end(), "enumerate") != methods.end()) all = enumerate_dn(a.m);

  auto count = [&](const std::string& method, int k) -> BigInt {
    if (method == "recursive") return count_dn_recursive(k, a.m);
    if (method == "weakcomp") return count_dn_weakcomp(k, a.m);
    if (method == "genfunc") return count_dn_genfunc(k, a.m);
    if (method == "brownian") return count_dn_brownian(k, a.m);
    BigInt c = 0;
    for (const auto& ep : all) {
      if (ep.total_l() == k && survives(ep, cls)) ++c;
    }
    return c;
  };

  std::cout << "k";
  for (const auto& method : methods) std::cout << "," << method;
  if (methods.size() > 1) std::cout << ",agree";
  std::cout << "\n";
  bool all_agree = true;
  for (int k = a.k.value_or(0); k <= a.k.value_or(total); ++k) {
    std::cout << k;
    std::optional<BigInt> first;
    bool agree = true;
    for (const auto& method : methods) {
      const BigInt c = count(method, k);
      std::cout << "," << c;
      if (!first) first = c;
      agree = agree && c == *first;
    }
    if (methods.size() > 1) std::cout << "," << (agree ? "true" : "false");
    std::cout << "\n";
    all_agree = all_agree && agree;
  }
  if (a.check && !all_agree) {
    std::cerr << "counting methods disagree\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_expand(const std::string& spec_path, bool force, const std::string& out) {
  const ScenarioSpec s = scenario_from_json(read_json_file(spec_path));
  const MeasureClass cls = s.options.measure_class;
  const L2Report report = check_l2_condition(s.kernels, s.measure, cls);
  if (!report.passed && !force) {
    std::cerr << "square-integrability condition fails for:\n";
    for (const auto& e : report.failures()) std::cerr << "  " << format_exponents(e.exponents) << "\n";
    return kExitMath;
  }
  const ChaosExpansion e = expand_product(s.kernels, s.measure, cls, /*force=*/true);
  Json j;
  j["measure_class"] = to_string(cls);
  j["l2_condition"] = report.passed;
  j["expectation"] = detail::number_json(e.expectation());
  j["second_moment"] = detail::number_json(expansion_second_moment(e, s.measure));
  j["expansion"] = to_json(e);
  emit(dump(j) + "\n", out);
  return kExitOk;
}

int cmd_moments(const std::string& spec_path, int order, const std::string& out) {
  const ScenarioSpec s = scenario_from_json(read_json_file(spec_path));
  const KernelFactor& f = first_factor(s);
  std::vector<int> orders = s.options.orders;
  if (order > 0) {
    orders.clear();
    for (int n = 1; n <= order; ++n) orders.push_back(n);
  }
  if (orders.empty()) orders = {1, 2, 3, 4};
  Json mom = Json::array();
  for (int n : orders) mom.push_back({{"N", n}, {"moment", detail::number_json(moment_I1(f, n, s.measure, s.options.measure_class))}});
  Json j{{"moments", mom}};
  emit(dump(j) + "\n", out);
  return kExitOk;
}

int cmd_cumulants(const std::string& spec_path, int order, bool standardized, const std::string& out) {
  const ScenarioSpec s = scenario_from_json(read_json_file(spec_path));
  if (order < 1) order = s.options.orders.empty() ? 4 : *std::max_element(s.options.orders.begin(), s.options.orders.end());
  CumulantSequence c = cumulants_I1(first_factor(s), order, s.measure, s.options.measure_class);
  if (standardized) c = c.standardized();
  emit(dump(to_json(c)) + "\n", out);
  return kExitOk;
}

int cmd_clt(const std::string& spec_path, const std::string& grid, int order, const std::string& out) {
  const ScenarioSpec s = scenario_from_json(read_json_file(spec_path));
  const KernelFactor& f = first_factor(s);
  const std::vector<double> T = grid.empty() ? s.options.T_grid : parse_grid(grid);
  if (T.empty()) throw SchemaError("no horizon grid given (--T a:b:n or options.T_grid)");
  const CltScanResult r = clt_scan(f.time, f.space, s.measure, order, T);
  std::ostringstream os;
  os << "T,N,ratio,target\n";
  for (std::size_t i = 0; i < r.orders.size(); ++i) {
    for (std::size_t t = 0; t < T.size(); ++t) {
      os << detail::format_double(T[t]) << "," << r.orders[i] << "," << detail::format_double(r.ratios[i][t]) << ","
         << detail::format_double(r.limit_targets[i]) << "\n";
    }
  }
  std::string text = os.str();
  std::erase(text, '"');
  emit(text, out);
  return kExitOk;
}

int cmd_simulate(const std::string& spec_path, std::optional<std::size_t> paths, std::optional<std::uint64_t> seed,
                 bool validate, const std::string& out) {
  const ScenarioSpec s = scenario_from_json(read_json_file(spec_path));
  const EmpiricalMoments em = empirical_product_moments(s.kernels, s.measure, paths.value_or(s.options.n_paths),
                                                        seed.value_or(s.options.seed), s.options.measure_class);
  Json j = to_json(em);
  if (validate) j["passed"] = em.max_abs_z() <= 4.0;
  emit(dump(j) + "\n", out);
  if (validate && em.max_abs_z() > 4.0) return kExitValidation;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaos expansions of products of multiple integrals driven by a Levy random measure"};
  app.require_subcommand(1);

  CountArgs count;
  auto* c = app.add_subcommand("count", "Count terms of the product formula");
  c->add_option("--n", count.n, "Number of factors")->required();
  c->add_option("--m", count.m, "Orders m_1,...,m_N")->required()->delimiter(',');
  c->add_option("--k", count.k, "Only this chaos order");
  c->add_option("--method", count.method, "recursive | weakcomp | genfunc | enumerate | all");
  c->add_option("--class", count.cls, "general | brownian | jump");
  c->add_flag("--check", count.check, "Fail when the methods disagree");

  std::string spec, out, grid;
  bool force = false, standardized = false;
  int order = 0;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;

  auto* e = app.add_subcommand("expand", "Expand a product of multiple integrals");
  e->add_option("--spec", spec, "Scenario JSON")->required();
  e->add_flag("--force", force, "Expand even if the square-integrability check fails");
  e->add_option("--out", out, "Output file (default stdout)");

  auto* mo = app.add_subcommand("moments", "Moments of I_1(f)");
  mo->add_option("--spec", spec, "Scenario JSON")->required();
  mo->add_option("--order", order, "Highest order");
  mo->add_option("--out", out, "Output file");

  auto* cu = app.add_subcommand("cumulants", "Cumulants of I_1(f)");
  cu->add_option("--spec", spec, "Scenario JSON")->required();
  cu->add_option("--order", order, "Highest order");
  cu->add_flag("--standardized", standardized, "Divide by kappa_2^(N/2)");
  cu->add_option("--out", out, "Output file");

  auto* cl = app.add_subcommand("clt", "Standardized cumulants over a horizon grid (CSV)");
  cl->add_option("--spec", spec, "Scenario JSON")->required();
  cl->add_option("--T", grid, "Horizon grid a:b:n");
  cl->add_option("--order", order, "Highest cumulant order (>= 3)")->required();
  cl->add_option("--out", out, "Output file");

  auto* si = app.add_subcommand("simulate", "Monte Carlo moments of the product");
  auto* va = app.add_subcommand("validate", "Monte Carlo check against the product formula");
  for (auto* sub : {si, va}) {
    sub->add_option("--spec", spec, "Scenario JSON")->required();
    sub->add_option("--paths", paths, "Number of paths");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--out", out, "Output file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitSchema;
  }

  try {
    if (*c) return cmd_count(count);
    if (*e) return cmd_expand(spec, force, out);
    if (*mo) return cmd_moments(spec, order, out);
    if (*cu) return cmd_cumulants(spec, order, standardized, out);
    if (*cl) return cmd_clt(spec, grid, order, out);
    if (*si) return cmd_simulate(spec, paths, seed, false, out);
    if (*va) return cmd_simulate(spec, paths, seed, true, out);
  } catch (const SchemaError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSchema;
  } catch (const BoundsError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSchema;
  } catch (const UnsupportedKernelError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSchema;
  } catch (const DivergenceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitMath;
  } catch (const NumericalError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitSchema;
  }
  return kExitOk;
}
