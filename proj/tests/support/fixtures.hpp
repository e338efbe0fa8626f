#pragma once

#include <filesystem>
#include <string>

#include "cello/ingest.hpp"
#include "cello/neuralnet.hpp"

namespace fixture {

inline std::filesystem::path source_dir() { return CELLO_SOURCE_DIR; }
inline std::filesystem::path path(const std::string& name) { return source_dir() / "tests" / "fixtures" / name; }

inline const cello::MlpModel& wrist_model() {
  static const cello::MlpModel m = cello::load_model(path("wrist_model.json"));
  return m;
}

inline const cello::MlpModel& elbow_model() {
  static const cello::MlpModel m = cello::load_model(path("elbow_model.json"));
  return m;
}

inline const std::vector<cello::FramePacket>& stream() {
  static const std::vector<cello::FramePacket> s = cello::read_stream(path("session.jsonl"));
  return s;
}

}  // namespace fixture

#include <memory>

#include "cello/pipeline.hpp"
#include "cello/synth.hpp"

namespace fixture {

inline std::shared_ptr<const cello::Engine> engine() {
  static const auto e = std::make_shared<const cello::Engine>(
      cello::Engine::load(path("wrist_model.json"), path("elbow_model.json"), cello::EngineConfig{}));
  return e;
}

// Hand at a given on-screen rotation, placed inside the frame.
inline cello::HandLandmarks posed_hand(double rotation_deg) {
  cello::HandLandmarks h = cello::rotate_hand(cello::canonical_hand_template(), rotation_deg);
  for (auto& p : h) p = p + cello::Vec2{0.45, 0.55};
  return h;
}

// Upper arm roughly horizontal, forearm slightly lowered.
inline cello::PoseTriplet level_arm() {
  return {{0.30, 0.40, 0.0}, {0.56, 0.40, 0.05}, {0.78, 0.46, 0.12}};
}

// Packet whose every aspect is correct, given the fixture models.
inline cello::FramePacket correct_packet(std::int64_t t_ms) {
  cello::FramePacket p;
  p.t_ms = t_ms;
  p.hand = posed_hand(0.0);
  p.pose = level_arm();
  p.strings = cello::OrientedBox::make(0.5, 0.5, 0.4, 0.06, 80.0);
  p.bow = cello::OrientedBox::make(0.5, 0.5, 0.5, 0.02, -10.0);
  return p;
}

inline cello::FramePacket supinated_packet(std::int64_t t_ms) {
  cello::FramePacket p = correct_packet(t_ms);
  p.hand = posed_hand(35.0);
  return p;
}

}  // namespace fixture
