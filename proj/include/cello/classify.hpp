#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "cello/features.hpp"
#include "cello/geometry.hpp"
#include "cello/ingest.hpp"
#include "cello/json.hpp"
#include "cello/neuralnet.hpp"

namespace cello {

enum class WristClass { Normal, Supinated, OverPronated, Undetected };
enum class ElbowClass { Normal, TooLow, TooHigh, Undetected };
enum class Correctness { Correct, Incorrect, NotApplicable };

const char* to_string(WristClass c);
const char* to_string(ElbowClass c);
const char* to_string(Correctness c);

struct WristVerdict {
  WristClass cls = WristClass::Undetected;
  std::optional<std::vector<double>> probabilities;  // present iff detected

  friend bool operator==(const WristVerdict&, const WristVerdict&) = default;
};

struct ElbowVerdict {
  ElbowClass cls = ElbowClass::Undetected;
  std::optional<std::vector<double>> probabilities;

  friend bool operator==(const ElbowVerdict&, const ElbowVerdict&) = default;
};

struct DetectionFlags {
  bool hand = false;
  bool pose = false;
  bool bow = false;
  bool strings = false;

  friend bool operator==(const DetectionFlags&, const DetectionFlags&) = default;
};

// Per-aspect correctness; drives the blue/orange annotation colors.
struct CorrectnessFlags {
  Correctness wrist = Correctness::NotApplicable;
  Correctness elbow = Correctness::NotApplicable;
  Correctness bow_height = Correctness::NotApplicable;
  Correctness bow_angle = Correctness::NotApplicable;

  friend bool operator==(const CorrectnessFlags&, const CorrectnessFlags&) = default;
};

struct FrameResult {
  std::int64_t t_ms = 0;
  WristVerdict wrist;
  ElbowVerdict elbow;
  BowAssessment bow;
  DetectionFlags detected;
  CorrectnessFlags flags;

  // Both boxes were seen but do not overlap.
  bool bow_out_of_zone() const { return detected.bow && detected.strings && !bow.in_zone; }

  friend bool operator==(const FrameResult&, const FrameResult&) = default;
};

// bow_height is Incorrect when the bow is out of the playing zone, since
// that is itself a placement error; it is NotApplicable only when a box is
// missing.
CorrectnessFlags derive_flags(const FrameResult& result);

struct ClassifierConfig {
  BowConfig bow;
  std::size_t hand_origin_index = kDefaultHandOrigin;
  // Predictions whose top probability is below this are reported as
  // Undetected. 0 disables the gate.
  double confidence_gate = 0.0;

  // Throws Error(BadConfig).
  void validate() const;

  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

/**
 * Per-frame posture classifier. Binds the two models and the bow
 * configuration once; classify() is const and safe to call concurrently.
 *
 * Models map their outputs to posture classes by label name, so a wrist
 * model must be 42 -> ... -> 3 with labels {normal, supinated,
 * over_pronated} in any order, and an elbow model 9 -> ... -> 3 with
 * {normal, too_low, too_high}.
 */
class PostureClassifier {
 public:
  // Throws Error(ModelShapeMismatch) or Error(BadConfig).
  PostureClassifier(std::shared_ptr<const MlpModel> wrist_model,
                    std::shared_ptr<const MlpModel> elbow_model, ClassifierConfig cfg = {});

  FrameResult classify(const FramePacket& packet) const;

  const ClassifierConfig& config() const { return cfg_; }
  const MlpModel& wrist_model() const { return *wrist_; }
  const MlpModel& elbow_model() const { return *elbow_; }

 private:
  std::shared_ptr<const MlpModel> wrist_;
  std::shared_ptr<const MlpModel> elbow_;
  ClassifierConfig cfg_;
  std::array<WristClass, 3> wrist_map_{};
  std::array<ElbowClass, 3> elbow_map_{};
};

// Convenience wrapper; validates the models on every call.
FrameResult classify_frame(const FramePacket& packet, const MlpModel& wrist_model,
                           const MlpModel& elbow_model, const BowConfig& cfg);

Json result_to_json(const FrameResult& result);

}  // namespace cello
