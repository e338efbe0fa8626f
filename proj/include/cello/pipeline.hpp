#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cello/classify.hpp"
#include "cello/config.hpp"
#include "cello/digest.hpp"
#include "cello/feedback.hpp"
#include "cello/ingest.hpp"
#include "cello/json.hpp"
#include "cello/session.hpp"

namespace cello {

enum class Color { Blue, Orange, None };

const char* to_string(Color color);

// Annotation color per aspect: blue when correct, orange when incorrect.
struct Colors {
  Color wrist = Color::None;
  Color elbow = Color::None;
  Color bow_height = Color::None;
  Color bow_angle = Color::None;

  friend bool operator==(const Colors&, const Colors&) = default;
};

Colors colors_for(const CorrectnessFlags& flags);

// Everything the client needs to redraw after one frame.
struct FrameMessage {
  FrameResult result;
  std::vector<Instruction> instructions;
  Colors colors;
};

// {"type":"frame_result","t_ms":n,"result":{...},"instructions":[...],"colors":{...}}
Json frame_message_to_json(const FrameMessage& message);

/**
 * Models, configuration and catalog shared by every session of a process.
 * Immutable after construction.
 */
struct Engine {
  std::shared_ptr<const MlpModel> wrist_model;
  std::shared_ptr<const MlpModel> elbow_model;
  std::string wrist_model_digest;
  std::string elbow_model_digest;
  EngineConfig config;
  InstructionCatalog catalog;

  // Loads both models and the catalog named by cfg. Throws Error.
  static Engine load(const std::filesystem::path& wrist_path,
                     const std::filesystem::path& elbow_path, EngineConfig cfg);
  static Engine from_models(MlpModel wrist, MlpModel elbow, EngineConfig cfg,
                            InstructionCatalog catalog);
};

// Digest of a model's canonical serialized form.
std::string model_digest(const MlpModel& model);

/**
 * One practice session: classify, then debounce feedback, then tally.
 * Frames must arrive in strictly increasing t_ms.
 */
class SessionPipeline {
 public:
  // Throws Error(ModelShapeMismatch) or Error(BadConfig).
  SessionPipeline(const Engine& engine, const EngineConfig& cfg);

  // Throws Error(NonMonotonicTime) without touching any session state.
  FrameMessage process(const FramePacket& packet);

  // Throws Error(EmptySession).
  SessionSummary summary() const { return summarize(accumulator_); }

  const SessionAccumulator& accumulator() const { return accumulator_; }
  const FeedbackTracker& feedback() const { return feedback_; }
  const EngineConfig& config() const { return cfg_; }
  std::string stream_digest() const;

 private:
  EngineConfig cfg_;
  PostureClassifier classifier_;
  FeedbackTracker feedback_;
  SessionAccumulator accumulator_;
  Sha256 digest_;
};

// Instruction display changes: {"t_ms": n, "displayed": [{"category", "text",
// "shown_since_ms"}]}, one entry each time the displayed list changes.
Json timeline_entry(std::int64_t t_ms, const std::vector<Instruction>& displayed);

struct ReplayResult {
  std::vector<Json> frames;    // frame_result messages
  std::vector<Json> timeline;  // see timeline_entry
  SessionSummary summary;
  std::string stream_digest;
};

// Offline session over a recorded stream. Throws Error(EmptySession) for an
// empty stream and Error(NonMonotonicTime) for out-of-order packets.
ReplayResult replay(std::span<const FramePacket> packets, const Engine& engine,
                    const EngineConfig& cfg);

// Writes <dir>/frames.jsonl, <dir>/timeline.jsonl and <dir>/summary.json.
// Creates dir if needed. Throws Error(IoError).
void write_replay_outputs(const ReplayResult& result, const std::filesystem::path& dir);

// Canonical text of summary.json: two-space indented, trailing newline.
std::string summary_file_text(const SessionSummary& summary);

}  // namespace cello
