#include <doctest.h>

#include "cello/config.hpp"
#include "cello/error.hpp"
#include "support/fixtures.hpp"

using namespace cello;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped config equals the built-in defaults") {
    const auto cfg = load_config(fixture::source_dir() / "data" / "config.json");
    const EngineConfig defaults;
    CHECK(cfg.classifier == defaults.classifier);
    CHECK(cfg.feedback == defaults.feedback);
    CHECK(fs::equivalent(cfg.instruction_catalog, defaults.instruction_catalog));
    CHECK(defaults.classifier.bow.angle_tolerance_deg == 10.0);
    CHECK(defaults.classifier.bow.low_threshold == 0.15);
    CHECK(defaults.classifier.bow.high_threshold == 0.85);
    CHECK(defaults.feedback.persistence_ms == 5000);
    CHECK(defaults.feedback.min_display_ms == 3000);
    CHECK(defaults.feedback.flicker_allowance_ms == 500);
    CHECK(defaults.classifier.confidence_gate == 0.0);
  }

  TEST_CASE("json round-trip and partial documents") {
    EngineConfig cfg;
    cfg.classifier.bow.angle_tolerance_deg = 14.5;
    cfg.feedback.min_display_ms = 2500;
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
    const auto partial = config_from_json(Json::parse(R"({"version": 1, "bow": {"high_threshold": 0.8}})"));
    CHECK(partial.classifier.bow.high_threshold == 0.8);
    CHECK(partial.classifier.bow.low_threshold == 0.15);
    CHECK(config_from_json(Json::object()) == EngineConfig{});
  }

  TEST_CASE("relative catalog paths resolve against the config directory") {
    const auto cfg = config_from_json(Json::parse(R"({"instruction_catalog": "x/y.json"})"), "/some/dir");
    CHECK(cfg.instruction_catalog == fs::path("/some/dir/x/y.json"));
  }

  TEST_CASE("document errors") {
    CHECK(code_of([] { config_from_json(Json::parse(R"({"version": 2})")); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([] { config_from_json(Json::parse(R"({"bow": {"angle": 3}})")); }) == ErrorCode::BadConfig);
    CHECK(code_of([] { config_from_json(Json::parse(R"({"bow": {"low_threshold": "low"}})")); }) ==
          ErrorCode::BadConfig);
    CHECK(code_of([] { config_from_json(Json::parse(R"({"colour": 1})")); }) == ErrorCode::BadConfig);
    CHECK(code_of([] { config_from_json(Json::parse(R"({"bow": {"low_threshold": 0.9}})")); }) ==
          ErrorCode::BadConfig);
    CHECK(code_of([] { config_from_json(Json::parse(R"({"bow": {"angle_tolerance_deg": 91}})")); }) ==
          ErrorCode::BadConfig);
    CHECK(code_of([] { config_from_json(Json::parse("[1]")); }) == ErrorCode::BadConfig);
    CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::IoError);
  }

  TEST_CASE("session overrides") {
    const EngineConfig base;
    CHECK(apply_overrides(base, Json()) == base);
    CHECK(apply_overrides(base, Json::object()) == base);
    const auto wide = apply_overrides(base, Json::parse(R"({"angle_tolerance_deg": 20})"));
    CHECK(wide.classifier.bow.angle_tolerance_deg == 20.0);
    CHECK(wide.feedback == base.feedback);
    const auto quick = apply_overrides(base, Json::parse(R"({"persistence_ms": 2000, "confidence_gate": 0.4})"));
    CHECK(quick.feedback.persistence_ms == 2000);
    CHECK(quick.classifier.confidence_gate == 0.4);
    CHECK(code_of([&] { apply_overrides(base, Json::parse(R"({"low_threshold": 0.9})")); }) == ErrorCode::BadConfig);
    CHECK(code_of([&] { apply_overrides(base, Json::parse(R"({"tolerance": 20})")); }) == ErrorCode::BadConfig);
    CHECK(code_of([&] { apply_overrides(base, Json::parse(R"({"persistence_ms": 1.5})")); }) == ErrorCode::BadConfig);
    CHECK(code_of([&] { apply_overrides(base, Json::parse(R"({"angle_tolerance_deg": "wide"})")); }) ==
          ErrorCode::BadConfig);
    CHECK(code_of([&] { apply_overrides(base, Json::parse("[]")); }) == ErrorCode::BadConfig);
  }
}
