#pragma once

#include <filesystem>

#include "cello/classify.hpp"
#include "cello/feedback.hpp"
#include "cello/json.hpp"

namespace cello {

inline constexpr int kConfigVersion = 1;

// Everything a session is parameterized by, as one versioned document:
//   {"version": 1,
//    "bow": {"angle_tolerance_deg", "low_threshold", "high_threshold"},
//    "feedback": {"persistence_ms", "min_display_ms", "flicker_allowance_ms"},
//    "classifier": {"hand_origin_index", "confidence_gate"},
//    "instruction_catalog": "path"}
// Every field is optional and defaults as in the structs.
struct EngineConfig {
  ClassifierConfig classifier;
  FeedbackConfig feedback;
  std::filesystem::path instruction_catalog = default_instruction_catalog();

  // Throws Error(BadConfig).
  void validate() const;

  static std::filesystem::path default_data_dir();
  static std::filesystem::path default_instruction_catalog();

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Relative catalog paths resolve against base_dir. Throws Error(BadConfig)
// or Error(VersionMismatch).
EngineConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir = {});
// Throws Error(IoError) plus the above.
EngineConfig load_config(const std::filesystem::path& path);
Json config_to_json(const EngineConfig& cfg);

// Per-session overrides with flat keys: angle_tolerance_deg, low_threshold,
// high_threshold, persistence_ms, min_display_ms, flicker_allowance_ms,
// hand_origin_index, confidence_gate. Throws Error(BadConfig) on unknown
// keys, wrong types, or an invalid result.
EngineConfig apply_overrides(const EngineConfig& base, const Json& overrides);

}  // namespace cello
