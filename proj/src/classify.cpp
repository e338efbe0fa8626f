#include "cello/classify.hpp"

#include <algorithm>
#include <string>

#include "cello/error.hpp"

namespace cello {

namespace {

template <typename Class, std::size_t N>
std::array<Class, 3> map_labels(const MlpModel& model, std::size_t expected_inputs,
                                const char* role,
                                const std::array<std::pair<const char*, Class>, N>& names) {
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelShapeMismatch, std::string(role) + " model: " + e.what());
  }
  if (model.input_size() != expected_inputs || model.output_size() != 3) {
    throw Error(ErrorCode::ModelShapeMismatch,
                std::string(role) + " model must map " + std::to_string(expected_inputs) +
                    " inputs to 3 classes");
  }
  std::array<Class, 3> out{};
  std::array<bool, N> seen{};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string& label = model.class_labels()[i];
    const auto it = std::find_if(names.begin(), names.end(),
                                 [&](const auto& entry) { return label == entry.first; });
    if (it == names.end() || seen[static_cast<std::size_t>(it - names.begin())]) {
      throw Error(ErrorCode::ModelShapeMismatch,
                  std::string(role) + " model has unexpected class label '" + label + "'");
    }
    seen[static_cast<std::size_t>(it - names.begin())] = true;
    out[i] = it->second;
  }
  return out;
}

Correctness correctness(bool detected, bool correct) {
  if (!detected) return Correctness::NotApplicable;
  return correct ? Correctness::Correct : Correctness::Incorrect;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json probabilities_json(const std::optional<std::vector<double>>& p) {
  return p ? Json(*p) : Json(nullptr);
}

}  // namespace

const char* to_string(WristClass c) {
  switch (c) {
    case WristClass::Normal: return "normal";
    case WristClass::Supinated: return "supinated";
    case WristClass::OverPronated: return "over_pronated";
    case WristClass::Undetected: return "undetected";
  }
  return "undetected";
}

const char* to_string(ElbowClass c) {
  switch (c) {
    case ElbowClass::Normal: return "normal";
    case ElbowClass::TooLow: return "too_low";
    case ElbowClass::TooHigh: return "too_high";
    case ElbowClass::Undetected: return "undetected";
  }
  return "undetected";
}

const char* to_string(Correctness c) {
  switch (c) {
    case Correctness::Correct: return "correct";
    case Correctness::Incorrect: return "incorrect";
    case Correctness::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

CorrectnessFlags derive_flags(const FrameResult& r) {
  CorrectnessFlags f;
  f.wrist = correctness(r.wrist.cls != WristClass::Undetected, r.wrist.cls == WristClass::Normal);
  f.elbow = correctness(r.elbow.cls != ElbowClass::Undetected, r.elbow.cls == ElbowClass::Normal);
  const bool boxes = r.detected.bow && r.detected.strings;
  f.bow_height = correctness(boxes, r.bow.height == BowHeight::Ok);
  f.bow_angle = correctness(r.bow.in_zone, r.bow.angle == BowAngle::Correct);
  return f;
}

void ClassifierConfig::validate() const {
  bow.validate();
  if (hand_origin_index >= kHandLandmarkCount) {
    throw Error(ErrorCode::BadConfig, "hand origin index must be below 21");
  }
  if (!(confidence_gate >= 0.0 && confidence_gate < 1.0)) {
    throw Error(ErrorCode::BadConfig, "confidence gate must lie in [0, 1)");
  }
}

PostureClassifier::PostureClassifier(std::shared_ptr<const MlpModel> wrist_model,
                                     std::shared_ptr<const MlpModel> elbow_model,
                                     ClassifierConfig cfg)
    : wrist_(std::move(wrist_model)), elbow_(std::move(elbow_model)), cfg_(cfg) {
  if (!wrist_ || !elbow_) throw Error(ErrorCode::ModelShapeMismatch, "both models are required");
  cfg_.validate();
  wrist_map_ = map_labels<WristClass, 3>(*wrist_, kHandFeatureSize, "wrist",
                                         {{{"normal", WristClass::Normal},
                                           {"supinated", WristClass::Supinated},
                                           {"over_pronated", WristClass::OverPronated}}});
  elbow_map_ = map_labels<ElbowClass, 3>(*elbow_, kElbowFeatureSize, "elbow",
                                         {{{"normal", ElbowClass::Normal},
                                           {"too_low", ElbowClass::TooLow},
                                           {"too_high", ElbowClass::TooHigh}}});
}

FrameResult PostureClassifier::classify(const FramePacket& packet) const {
  FrameResult r;
  r.t_ms = packet.t_ms;
  r.detected = {packet.hand.has_value(), packet.pose.has_value(), packet.bow.has_value(),
                packet.strings.has_value()};

  if (packet.hand) {
    try {
      const HandFeatureVector f = normalize_hand(*packet.hand, cfg_.hand_origin_index);
      std::vector<double> p = forward(*wrist_, f.values);
      const std::size_t k = argmax(p);
      if (p[k] >= cfg_.confidence_gate) {
        r.wrist = {wrist_map_[k], std::move(p)};
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateHand) throw;
    }
  }

  if (packet.pose && !packet.pose->degenerate()) {
    try {
      const ElbowFeatureVector f = elbow_features(*packet.pose);
      std::vector<double> p = forward(*elbow_, f.values);
      const std::size_t k = argmax(p);
      if (p[k] >= cfg_.confidence_gate) {
        r.elbow = {elbow_map_[k], std::move(p)};
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegeneratePose) throw;
    }
  }

  r.bow = classify_bow(packet.bow, packet.strings, cfg_.bow);
  r.flags = derive_flags(r);
  return r;
}

FrameResult classify_frame(const FramePacket& packet, const MlpModel& wrist_model,
                           const MlpModel& elbow_model, const BowConfig& cfg) {
  // Non-owning handles; the classifier does not outlive this call.
  const PostureClassifier classifier(
      std::shared_ptr<const MlpModel>(std::shared_ptr<const MlpModel>(), &wrist_model),
      std::shared_ptr<const MlpModel>(std::shared_ptr<const MlpModel>(), &elbow_model),
      ClassifierConfig{cfg});
  return classifier.classify(packet);
}

Json result_to_json(const FrameResult& r) {
  return Json{
      {"t_ms", r.t_ms},
      {"wrist", {{"class", to_string(r.wrist.cls)},
                 {"probabilities", probabilities_json(r.wrist.probabilities)}}},
      {"elbow", {{"class", to_string(r.elbow.cls)},
                 {"probabilities", probabilities_json(r.elbow.probabilities)}}},
      {"bow", {{"in_zone", r.bow.in_zone},
               {"height", to_string(r.bow.height)},
               {"angle", to_string(r.bow.angle)},
               {"zone_position", optional_number(r.bow.zone_position)},
               {"deviation_deg", optional_number(r.bow.deviation_deg)}}},
      {"detected", {{"hand", r.detected.hand},
                    {"pose", r.detected.pose},
                    {"bow", r.detected.bow},
                    {"strings", r.detected.strings}}},
      {"flags", {{"wrist", to_string(r.flags.wrist)},
                 {"elbow", to_string(r.flags.elbow)},
                 {"bow_height", to_string(r.flags.bow_height)},
                 {"bow_angle", to_string(r.flags.bow_angle)}}},
  };
}

}  // namespace cello
