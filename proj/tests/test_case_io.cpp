#include <gtest/gtest.h>

#include <functional>

#include "fixtures.hpp"
#include "marketlcp/case_io.hpp"
#include "marketlcp/error.hpp"

using namespace marketlcp;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "metadata": {"name": "mini"},
  "network": {
    "buses": [{"id": 1, "reference": true}, {"id": 2}],
    "lines": [{"from": 1, "to": 2, "reactance_pu": 0.1}]
  },
  "generators": [
    {"id": "g1", "bus": 1, "blocks": [{"size_mw": 10, "price_per_mwh": 20}]}
  ],
  "demands": [
    {"id": "d2", "bus": 2, "min_demand_mw": 0, "blocks": [{"size_mw": 5, "price_per_mwh": 30}]}
  ]
})";

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error thrown";
  return Error(ErrorCode::AssertionFailed, "none");
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST(ParseCase, BundledCounts) {
  const auto file = parse_case_file(bundled_case("ieee30.json"));
  const auto& c = file.market;
  EXPECT_EQ(c.network.buses.size(), 30u);
  EXPECT_EQ(c.network.lines.size(), 41u);
  EXPECT_EQ(c.generators.size(), 5u);
  const auto dispatchable =
      std::count_if(c.demands.begin(), c.demands.end(), [](const auto& d) { return d.dispatchable; });
  EXPECT_EQ(dispatchable, 6);
  EXPECT_EQ(c.demands.size() - static_cast<std::size_t>(dispatchable), 16u);
  EXPECT_EQ(c.network.reference_bus(), 0);
  EXPECT_EQ(c.generators[static_cast<std::size_t>(find_generator(c, "g13"))].kind, UnitKind::Wind);
}

TEST(ParseCase, LineSusceptanceIsReciprocalReactance) {
  const auto c = fixtures::bundled("ieee30.json");
  const auto& l = c.network.lines[0];
  EXPECT_EQ(c.network.buses[static_cast<std::size_t>(l.from)].number, 1);
  EXPECT_EQ(c.network.buses[static_cast<std::size_t>(l.to)].number, 2);
  EXPECT_DOUBLE_EQ(l.reactance_pu, 0.0575);
  EXPECT_NEAR(l.susceptance_pu(), 17.391, 1e-3);
  EXPECT_DOUBLE_EQ(l.capacity_mw, 100.0);
}

TEST(ParseCase, DefaultsAndBlockCost) {
  auto text = replace(kMinimal, R"("price_per_mwh": 20)", R"("block_cost_per_h": 200)");
  const auto c = parse_case_text(text).market;
  EXPECT_DOUBLE_EQ(c.network.mva_base, 100.0);
  EXPECT_DOUBLE_EQ(c.network.lines[0].capacity_mw, 100.0);
  EXPECT_DOUBLE_EQ(c.generators[0].unit_capacity_mw, 10.0);
  EXPECT_DOUBLE_EQ(c.generators[0].blocks[0].price_per_mwh, 20.0);
  EXPECT_TRUE(c.demands[0].dispatchable);
}

TEST(ParseCase, EmptyGeneratorsIsValidationError) {
  auto text = replace(kMinimal, R"([
    {"id": "g1", "bus": 1, "blocks": [{"size_mw": 10, "price_per_mwh": 20}]}
  ])", "[]");
  EXPECT_EQ(error_of([&] { parse_case_text(text); }).code(), ErrorCode::ValidationError);
}

TEST(ParseCase, MalformedJsonReportsPosition) {
  const auto e = error_of([] { parse_case_text("{\n  \"schema_version\": 1,\n  \"network\": ,\n}"); });
  EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
}

TEST(ParseCase, TypeErrorNamesPath) {
  auto text = replace(kMinimal, R"("reactance_pu": 0.1)", R"("reactance_pu": "x")");
  const auto e = error_of([&] { parse_case_text(text); });
  EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  EXPECT_NE(std::string(e.what()).find("reactance_pu"), std::string::npos) << e.what();
}

TEST(ParseCase, UnknownFieldsWarnOrFail) {
  auto text = replace(kMinimal, R"("name": "mini")", R"("name": "mini", "colour": "red")");
  const auto lax = parse_case_text(text);
  ASSERT_FALSE(lax.warnings.empty());
  ParseOptions strict;
  strict.strict = true;
  EXPECT_EQ(error_of([&] { parse_case_text(text, strict); }).code(), ErrorCode::SchemaError);
}

TEST(ParseCase, SchemaVersion) {
  auto wrong = replace(kMinimal, R"("schema_version": 1)", R"("schema_version": 2)");
  EXPECT_EQ(error_of([&] { parse_case_text(wrong); }).code(), ErrorCode::VersionError);
  auto missing = replace(kMinimal, R"("schema_version": 1,)", "");
  EXPECT_EQ(error_of([&] { parse_case_text(missing); }).code(), ErrorCode::VersionError);
}

TEST(ParseCase, UnknownBusAndDuplicateIds) {
  auto unknown = replace(kMinimal, R"("to": 2)", R"("to": 7)");
  EXPECT_EQ(error_of([&] { parse_case_text(unknown); }).code(), ErrorCode::ValidationError);
  auto dup = replace(kMinimal, R"({"id": 2})", R"({"id": 1})");
  EXPECT_EQ(error_of([&] { parse_case_text(dup); }).code(), ErrorCode::ValidationError);
}

TEST(ParseCase, PerturbationSection) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(,
  "perturbation": {"curtailments": [{"unit": "d2", "kappa": 0.25}]}
)");
  const auto file = parse_case_text(text);
  ASSERT_TRUE(file.perturbation.has_value());
  EXPECT_DOUBLE_EQ(file.perturbation->curtailments.at({0, 0}), 0.25);
  auto bad = replace(text, "0.25", "1.5");
  EXPECT_EQ(error_of([&] { parse_case_text(bad); }).code(), ErrorCode::ValidationError);
  auto wind = replace(text, R"("curtailments": [{"unit": "d2", "kappa": 0.25}])",
                      R"("wind_deltas": [{"unit": "g1", "delta": 0.25}])");
  EXPECT_EQ(error_of([&] { parse_case_text(wind); }).code(),
            ErrorCode::SpecTargetsConventionalUnit);
}

TEST(RoundTrip, BundledCases) {
  for (const char* name : {"ieee30.json", "tiny2bus.json", "onebus.json"}) {
    const auto file = parse_case_file(bundled_case(name));
    const auto again = parse_case_text(emit_case(file));
    EXPECT_EQ(again.market, file.market) << name;
    EXPECT_EQ(again.perturbation, file.perturbation) << name;
    EXPECT_EQ(emit_case(again), emit_case(file)) << name;
  }
}

TEST(RoundTrip, RandomCases) {
  Rng rng(61);
  for (int t = 0; t < 200; ++t) {
    fixtures::RandomCaseOptions opts;
    opts.wind = t % 2 == 0;
    CaseFile file;
    file.market = fixtures::random_case(rng, opts);
    file.market.name = "random-" + std::to_string(t);
    if (opts.wind) {
      PerturbationSpec spec;
      set_wind_delta(spec, file.market, 0, rng.uniform(0.01, 0.9));
      file.perturbation = spec;
    }
    const auto again = parse_case_text(emit_case(file));
    ASSERT_EQ(again.market, file.market) << "case " << t;
    ASSERT_EQ(again.perturbation, file.perturbation) << "case " << t;
  }
}
