#include "cello/pipeline.hpp"

#include <fstream>

#include "cello/error.hpp"

namespace cello {

namespace {

Color color_of(Correctness c) {
  switch (c) {
    case Correctness::Correct: return Color::Blue;
    case Correctness::Incorrect: return Color::Orange;
    case Correctness::NotApplicable: return Color::None;
  }
  return Color::None;
}

bool same_display(const std::vector<Instruction>& a, const std::vector<Instruction>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].category != b[i].category || a[i].shown_since_ms != b[i].shown_since_ms) return false;
  }
  return true;
}

}  // namespace

const char* to_string(Color color) {
  switch (color) {
    case Color::Blue: return "blue";
    case Color::Orange: return "orange";
    case Color::None: return "none";
  }
  return "none";
}

Colors colors_for(const CorrectnessFlags& flags) {
  return {color_of(flags.wrist), color_of(flags.elbow), color_of(flags.bow_height),
          color_of(flags.bow_angle)};
}

Json frame_message_to_json(const FrameMessage& m) {
  return Json{{"type", "frame_result"},
              {"t_ms", m.result.t_ms},
              {"result", result_to_json(m.result)},
              {"instructions", instructions_to_json(m.instructions)},
              {"colors", {{"wrist", to_string(m.colors.wrist)},
                          {"elbow", to_string(m.colors.elbow)},
                          {"bow_height", to_string(m.colors.bow_height)},
                          {"bow_angle", to_string(m.colors.bow_angle)}}}};
}

std::string model_digest(const MlpModel& model) {
  return sha256_hex(model_to_json(model).dump() + "\n");
}

Engine Engine::from_models(MlpModel wrist, MlpModel elbow, EngineConfig cfg,
                           InstructionCatalog catalog) {
  cfg.validate();
  Engine engine{std::make_shared<const MlpModel>(std::move(wrist)),
                std::make_shared<const MlpModel>(std::move(elbow)),
                {},
                {},
                std::move(cfg),
                std::move(catalog)};
  engine.wrist_model_digest = model_digest(*engine.wrist_model);
  engine.elbow_model_digest = model_digest(*engine.elbow_model);
  // Surface shape problems at load time rather than on the first frame.
  PostureClassifier(engine.wrist_model, engine.elbow_model, engine.config.classifier);
  return engine;
}

Engine Engine::load(const std::filesystem::path& wrist_path,
                    const std::filesystem::path& elbow_path, EngineConfig cfg) {
  InstructionCatalog catalog = InstructionCatalog::load(cfg.instruction_catalog);
  return from_models(load_model(wrist_path), load_model(elbow_path), std::move(cfg),
                     std::move(catalog));
}

SessionPipeline::SessionPipeline(const Engine& engine, const EngineConfig& cfg)
    : cfg_(cfg),
      classifier_(engine.wrist_model, engine.elbow_model, cfg.classifier),
      feedback_(cfg.feedback, engine.catalog) {}

FrameMessage SessionPipeline::process(const FramePacket& packet) {
  const auto& last = feedback_.state().last_t_ms;
  if (last && packet.t_ms <= *last) {
    throw Error(ErrorCode::NonMonotonicTime,
                "frame at " + std::to_string(packet.t_ms) + " ms does not follow " +
                    std::to_string(*last) + " ms");
  }
  FrameMessage message;
  message.result = classifier_.classify(packet);
  message.instructions = feedback_.update(message.result);
  accumulator_.accumulate(message.result);
  message.colors = colors_for(message.result.flags);
  digest_.update(serialize_frame(packet));
  digest_.update("\n");
  return message;
}

std::string SessionPipeline::stream_digest() const { return digest_.hex_digest(); }

Json timeline_entry(std::int64_t t_ms, const std::vector<Instruction>& displayed) {
  Json shown = Json::array();
  for (const Instruction& ins : displayed) {
    shown.push_back(Json{{"category", to_string(ins.category)},
                         {"text", ins.text},
                         {"shown_since_ms", ins.shown_since_ms}});
  }
  return Json{{"t_ms", t_ms}, {"displayed", std::move(shown)}};
}

ReplayResult replay(std::span<const FramePacket> packets, const Engine& engine,
                    const EngineConfig& cfg) {
  SessionPipeline pipeline(engine, cfg);
  ReplayResult out;
  std::vector<Instruction> previous;
  for (const FramePacket& packet : packets) {
    FrameMessage message = pipeline.process(packet);
    if (!same_display(previous, message.instructions)) {
      out.timeline.push_back(timeline_entry(packet.t_ms, message.instructions));
      previous = message.instructions;
    }
    out.frames.push_back(frame_message_to_json(message));
  }
  out.summary = pipeline.summary();
  out.stream_digest = pipeline.stream_digest();
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::string jsonl(const std::vector<Json>& lines) {
  std::string text;
  for (const Json& line : lines) {
    text += line.dump();
    text += '\n';
  }
  return text;
}

}  // namespace

std::string summary_file_text(const SessionSummary& summary) {
  return summary_to_json(summary).dump(2) + "\n";
}

void write_replay_outputs(const ReplayResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "frames.jsonl", jsonl(result.frames));
  write_text(dir / "timeline.jsonl", jsonl(result.timeline));
  write_text(dir / "summary.json", summary_file_text(result.summary));
}

}  // namespace cello
