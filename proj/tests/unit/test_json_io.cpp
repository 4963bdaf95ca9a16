#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "levychaos/json_io.hpp"
#include "support/properties.hpp"

using namespace levychaos;

namespace {

std::string scenario(const std::string& name) { return std::string(LEVYCHAOS_SCENARIO_DIR) + "/" + name; }

const char* kMeasure = R"("measure": {"sigma2": 0.5, "T": 2.0, "nu": {"atoms": [{"x": 1.0, "lambda": 1.0}]}})";

Json parse(const std::string& text) { return parse_json_text(text, "test"); }

}  // namespace

TEST_CASE("number formatting") {
  CHECK(detail::format_double(1.0) == "1.0");
  CHECK(detail::format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(detail::format_double(-2.5e-20)) == -2.5e-20);
  CHECK(detail::format_double(kInf) == "\"inf\"");
  CHECK(detail::format_double(-kInf) == "\"-inf\"");
  CHECK(detail::format_double(std::nan("")) == "\"nan\"");
  CHECK(dump(Json{{"a", 3.0}, {"b", Json::array({1, 2})}}) == "{\n  \"a\": 3.0,\n  \"b\": [1, 2]\n}");
}

TEST_CASE("rationals and measure classes") {
  CHECK(rational_to_string(Rational(6, 4)) == "3/2");
  CHECK(rational_to_string(Rational(5)) == "5/1");
  CHECK(rational_from_string("3/2") == Rational(3, 2));
  CHECK(rational_from_string("-7") == Rational(-7));
  CHECK_THROWS_AS(rational_from_string("x/2"), SchemaError);
  for (auto c : {MeasureClass::General, MeasureClass::BrownianOnly, MeasureClass::JumpOnly}) {
    CHECK(measure_class_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(measure_class_from_string("levy"), SchemaError);
}

TEST_CASE("scenario parsing") {
  SECTION("factor shorthand") {
    const auto s = scenario_from_json(parse(std::string("{") + kMeasure + R"(,
      "factors": [{"time": {"kind": "monomial", "coeff": 2.0, "power": 1}, "space": {"h0": 1.0, "values": [3.0]}},
                  {"time": {"kind": "constant", "c": 1.0}, "space": {"h0": 0.0, "values": [1.0]}, "domain": "r0"}]})"));
    REQUIRE(s.kernels.size() == 2);
    CHECK(s.kernels[0].label == "f1");
    CHECK(s.kernels[0].order() == 1);
    CHECK(s.kernels[0].factors[0].time(1.5) == 3.0);
    CHECK(s.kernels[1].factors[0].domain == Domain::R0);
    CHECK(s.options.measure_class == MeasureClass::General);
    CHECK(s.options.seed == 42);
    CHECK(s.measure.T == 2.0);
    CHECK(s.measure.sigma2 == 0.5);
  }
  SECTION("schema errors") {
    const std::string f = R"({"time": {"kind": "constant", "c": 1.0}, "space": {"h0": 1.0, "values": [1.0]}})";
    CHECK_THROWS_AS(scenario_from_json(parse(std::string("{") + kMeasure + "}")), SchemaError);
    CHECK_THROWS_AS(scenario_from_json(parse(std::string("{") + kMeasure + R"(, "factors": [)" + f +
                                             R"(], "kernels": [{"factors": [)" + f + "]}]}")),
                    SchemaError);
    CHECK_THROWS_AS(scenario_from_json(parse(std::string("{") + kMeasure + R"(, "factors": [)" + f +
                                             R"(], "options": {"paths": 10}})")),
                    SchemaError);
    // two tabulated values for a one-atom measure
    CHECK_THROWS_AS(scenario_from_json(parse(std::string("{") + kMeasure + R"(, "factors": [{"time": {"kind": "constant", "c": 1.0},
        "space": {"h0": 1.0, "values": [1.0, 2.0]}}]})")),
                    SchemaError);
    CHECK_THROWS_AS(scenario_from_json(parse(std::string("{") + kMeasure + R"(, "factors": [{"time": {"kind": "sine"},
        "space": {"h0": 1.0}}]})")),
                    SchemaError);
    CHECK_THROWS_AS(parse("{\"measure\": "), SchemaError);
  }
  SECTION("unknown fields are rejected") {
    try {
      scenario_from_json(read_json_file(scenario("invalid_unknown_field.json")));
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("drift") != std::string::npos);
    }
  }
}

TEST_CASE("bundled scenarios load and round trip") {
  for (const char* name : {"brownian_n2.json", "poisson_n2.json", "mixed_n3.json", "poisson.json", "exp1.json", "mix.json",
                           "l2_counterexample.json"}) {
    INFO(name);
    const ScenarioSpec s = scenario_from_json(read_json_file(scenario(name)));
    CHECK(scenario_from_json(parse(dump(to_json(s)))) == s);
  }
  const auto b = scenario_from_json(read_json_file(scenario("brownian_n2.json")));
  CHECK(b.options.measure_class == MeasureClass::BrownianOnly);
  CHECK(b.kernels[0].order() == 2);
  const auto fam = scenario_from_json(read_json_file(scenario("l2_counterexample.json")));
  CHECK(fam.measure.nu.is_family());
}

TEST_CASE("expansions round trip") {
  const auto s = scenario_from_json(read_json_file(scenario("mixed_n3.json")));
  const ChaosExpansion e = expand_product(s.kernels, s.measure, s.options.measure_class);
  const ChaosExpansion back = expansion_from_json(parse(dump(to_json(e))));
  CHECK(back == e);
  CHECK(back.expectation() == e.expectation());
}

TEST_CASE("cli properties") {
  for (const auto& r : levychaos::testing::cli_properties()) {
    INFO(r.name << ": " << r.failures << "/" << r.cases << " failed; " << r.first_failure);
    CHECK(r.passed());
  }
}
