#include "cello/config.hpp"

#include <fstream>

#include "cello/error.hpp"

#ifndef CELLO_DEFAULT_DATA_DIR
#define CELLO_DEFAULT_DATA_DIR "data"
#endif

namespace cello {

namespace {

[[noreturn]] void bad_config(const std::string& detail) { throw Error(ErrorCode::BadConfig, detail); }

void check_keys(const Json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad_config(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) bad_config(std::string("unknown ") + where + " key '" + key + "'");
  }
}

double number(const Json& v, const std::string& key) {
  if (!v.is_number()) bad_config(key + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) bad_config(key + " must be an integer");
  return v.get<std::int64_t>();
}

// Applies one recognized flat key; returns false if the key is unknown.
bool apply_field(EngineConfig& cfg, const std::string& key, const Json& v) {
  if (key == "angle_tolerance_deg") {
    cfg.classifier.bow.angle_tolerance_deg = number(v, key);
  } else if (key == "low_threshold") {
    cfg.classifier.bow.low_threshold = number(v, key);
  } else if (key == "high_threshold") {
    cfg.classifier.bow.high_threshold = number(v, key);
  } else if (key == "persistence_ms") {
    cfg.feedback.persistence_ms = integer(v, key);
  } else if (key == "min_display_ms") {
    cfg.feedback.min_display_ms = integer(v, key);
  } else if (key == "flicker_allowance_ms") {
    cfg.feedback.flicker_allowance_ms = integer(v, key);
  } else if (key == "hand_origin_index") {
    const std::int64_t idx = integer(v, key);
    if (idx < 0) bad_config("hand_origin_index must be non-negative");
    cfg.classifier.hand_origin_index = static_cast<std::size_t>(idx);
  } else if (key == "confidence_gate") {
    cfg.classifier.confidence_gate = number(v, key);
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::filesystem::path EngineConfig::default_data_dir() { return CELLO_DEFAULT_DATA_DIR; }

std::filesystem::path EngineConfig::default_instruction_catalog() {
  return default_data_dir() / "instructions.json";
}

void EngineConfig::validate() const {
  classifier.validate();
  feedback.validate();
  if (instruction_catalog.empty()) bad_config("instruction catalog path is empty");
}

EngineConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config", {"version", "bow", "feedback", "classifier", "instruction_catalog"});
  if (doc.contains("version")) {
    if (integer(doc["version"], "version") != kConfigVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported config version");
    }
  }
  EngineConfig cfg;
  if (doc.contains("bow")) {
    check_keys(doc["bow"], "bow", {"angle_tolerance_deg", "low_threshold", "high_threshold"});
    for (const auto& [key, value] : doc["bow"].items()) apply_field(cfg, key, value);
  }
  if (doc.contains("feedback")) {
    check_keys(doc["feedback"], "feedback",
               {"persistence_ms", "min_display_ms", "flicker_allowance_ms"});
    for (const auto& [key, value] : doc["feedback"].items()) apply_field(cfg, key, value);
  }
  if (doc.contains("classifier")) {
    check_keys(doc["classifier"], "classifier", {"hand_origin_index", "confidence_gate"});
    for (const auto& [key, value] : doc["classifier"].items()) apply_field(cfg, key, value);
  }
  if (doc.contains("instruction_catalog")) {
    if (!doc["instruction_catalog"].is_string()) bad_config("instruction_catalog must be a path");
    std::filesystem::path p = doc["instruction_catalog"].get<std::string>();
    cfg.instruction_catalog = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  cfg.validate();
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad_config("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

Json config_to_json(const EngineConfig& cfg) {
  return Json{
      {"version", kConfigVersion},
      {"bow", {{"angle_tolerance_deg", cfg.classifier.bow.angle_tolerance_deg},
               {"low_threshold", cfg.classifier.bow.low_threshold},
               {"high_threshold", cfg.classifier.bow.high_threshold}}},
      {"feedback", {{"persistence_ms", cfg.feedback.persistence_ms},
                    {"min_display_ms", cfg.feedback.min_display_ms},
                    {"flicker_allowance_ms", cfg.feedback.flicker_allowance_ms}}},
      {"classifier", {{"hand_origin_index", cfg.classifier.hand_origin_index},
                      {"confidence_gate", cfg.classifier.confidence_gate}}},
      {"instruction_catalog", cfg.instruction_catalog.string()},
  };
}

EngineConfig apply_overrides(const EngineConfig& base, const Json& overrides) {
  if (overrides.is_null()) return base;
  if (!overrides.is_object()) bad_config("config overrides must be an object");
  EngineConfig cfg = base;
  for (const auto& [key, value] : overrides.items()) {
    if (!apply_field(cfg, key, value)) bad_config("unknown config override '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace cello
