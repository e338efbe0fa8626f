#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cello/config.hpp"
#include "cello/error.hpp"
#include "cello/ingest.hpp"
#include "cello/latency.hpp"
#include "cello/neuralnet.hpp"
#include "cello/pipeline.hpp"
#include "cello/service.hpp"
#include "cello/session.hpp"
#include "cello/synth.hpp"

namespace fs = std::filesystem;
using namespace cello;

namespace {

struct EngineArgs {
  std::string wrist_model;
  std::string elbow_model;
  std::string config;

  void add_to(CLI::App* cmd, bool from_env) {
    auto* w = cmd->add_option("--wrist-model", wrist_model, "Wrist model file")->required();
    auto* e = cmd->add_option("--elbow-model", elbow_model, "Elbow model file")->required();
    auto* c = cmd->add_option("--config", config, "Engine config file");
    if (from_env) {
      w->envname("CELLO_WRIST_MODEL");
      e->envname("CELLO_ELBOW_MODEL");
      c->envname("CELLO_CONFIG");
    }
  }

  EngineConfig load_cfg() const { return config.empty() ? EngineConfig{} : load_config(config); }
  Engine load_engine() const { return Engine::load(wrist_model, elbow_model, load_cfg()); }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

SynthTask parse_task(const std::string& name) {
  if (name == "wrist") return SynthTask::Wrist;
  if (name == "elbow") return SynthTask::Elbow;
  throw Error(ErrorCode::BadRequest, "task must be wrist or elbow, got '" + name + "'");
}

// Accepts "n=1000 seed=7" as separate tokens or comma-joined.
SynthSpec parse_synth(SynthTask task, const std::vector<std::string>& tokens) {
  SynthSpec spec;
  spec.task = task;
  for (const std::string& token : tokens) {
    std::stringstream parts(token);
    std::string kv;
    while (std::getline(parts, kv, ',')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::BadRequest, "expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      try {
        if (key == "n") spec.n_per_class = std::stoull(value);
        else if (key == "seed") spec.seed = std::stoull(value);
        else if (key == "sigma") spec.noise_sigma = std::stod(value);
        else throw Error(ErrorCode::BadRequest, "unknown synth key '" + key + "'");
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::BadRequest, "bad value for synth key '" + key + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

std::vector<std::size_t> parse_layers(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream parts(text);
  std::string item;
  while (std::getline(parts, item, ',')) {
    try {
      sizes.push_back(std::stoull(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadRequest, "bad layer size '" + item + "'");
    }
  }
  return sizes;
}

std::pair<std::string, unsigned short> parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::BadRequest, "expected host:port, got '" + text + "'");
  int port = 0;
  try {
    port = std::stoi(text.substr(colon + 1));
  } catch (const std::logic_error&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::BadRequest, "bad port in '" + text + "'");
  return {text.substr(0, colon), static_cast<unsigned short>(port)};
}

std::set<std::string> read_users(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::set<std::string> users;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!is_valid_identifier(line)) throw Error(ErrorCode::BadConfig, "invalid user id '" + line + "'");
    users.insert(line);
  }
  return users;
}

// --- replay ---------------------------------------------------------------

struct ReplayArgs {
  EngineArgs engine;
  std::string stream;
  std::string out;
  std::string store;
  std::string user = "replay";
};

int run_replay(const ReplayArgs& a) {
  Engine engine = a.engine.load_engine();
  const std::vector<FramePacket> packets = read_stream(fs::path(a.stream));
  ReplayResult result = replay(packets, engine, engine.config);
  write_replay_outputs(result, a.out);
  if (!a.store.empty()) {
    SessionRecord record;
    record.session_id = "replay-" + result.stream_digest.substr(0, 16);
    record.user_id = a.user;
    record.started_at = iso8601_now();
    record.config = config_to_json(engine.config);
    record.wrist_model_digest = engine.wrist_model_digest;
    record.elbow_model_digest = engine.elbow_model_digest;
    record.stream_digest = result.stream_digest;
    record.summary = result.summary;
    SessionStore(a.store).persist(record);
  }
  std::cout << "frames: " << result.frames.size() << "\n"
            << "timeline entries: " << result.timeline.size() << "\n"
            << "stream digest: " << result.stream_digest << "\n"
            << "outputs: " << a.out << "\n";
  return 0;
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
  std::string task;
  std::vector<std::string> synth;
  std::string dataset;
  std::string layers;
  TrainConfig train;
  std::string out;
  std::string report;
};

int run_train(TrainArgs a) {
  const SynthTask task = parse_task(a.task);
  LabeledDataset data;
  if (!a.dataset.empty()) {
    std::ifstream in(a.dataset);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.dataset);
    data = read_dataset(in);
  } else {
    data = generate(parse_synth(task, a.synth));
  }
  const auto sizes = a.layers.empty() ? default_layer_sizes(task) : parse_layers(a.layers);

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(data, sizes, a.train);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_model(result.model, fs::path(a.out));
  const TrainReport& r = result.report;
  Json report{{"task", a.task},
              {"layer_sizes", sizes},
              {"parameter_count", r.parameter_count},
              {"train_size", r.train_size},
              {"val_size", r.val_size},
              {"train_acc", r.train_acc},
              {"val_acc", r.val_acc},
              {"model_digest", model_digest(result.model)},
              {"loss_curve", r.loss_curve}};
  if (!a.report.empty()) write_file(a.report, report.dump(2) + "\n");

  std::cout << "task: " << a.task << "\n"
            << "parameter count: " << r.parameter_count << "\n"
            << std::fixed << std::setprecision(4) << "train_acc: " << r.train_acc << "\n"
            << "val_acc: " << r.val_acc << "\n"
            << std::setprecision(2) << "training time: " << seconds << " s\n"
            << "model digest: " << model_digest(result.model) << "\n";
  return 0;
}

// --- synth / stream ---------------------------------------------------------

struct SynthArgs {
  std::string task;
  std::vector<std::string> params;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  LabeledDataset data = generate(parse_synth(parse_task(a.task), a.params));
  std::ostringstream text;
  write_dataset(data, text);
  write_file(a.out, text.str());
  std::cout << "samples: " << data.size() << "\n";
  return 0;
}

int run_stream(const StreamSpec& spec, const std::string& out) {
  std::string text;
  const auto packets = generate_stream(spec);
  for (const FramePacket& p : packets) text += serialize_frame(p) + "\n";
  write_file(out, text);
  std::cout << "frames: " << packets.size() << "\n";
  return 0;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
  EngineArgs engine;
  std::string stream;
  int repetitions = 3;
  bool json = false;
};

int run_bench(const BenchArgs& a) {
  if (a.repetitions < 1) throw Error(ErrorCode::BadRequest, "repetitions must be at least 1");
  Engine engine = a.engine.load_engine();
  const std::vector<FramePacket> packets = read_stream(fs::path(a.stream));
  if (packets.empty()) throw Error(ErrorCode::EmptySession, "stream has no frames");

  std::vector<LatencyStats> runs;
  std::vector<double> all;
  for (int rep = 0; rep < a.repetitions; ++rep) {
    SessionPipeline pipeline(engine, engine.config);
    std::vector<double> durations;
    durations.reserve(packets.size());
    for (const FramePacket& p : packets) {
      const auto t0 = std::chrono::steady_clock::now();
      pipeline.process(p);
      const auto t1 = std::chrono::steady_clock::now();
      durations.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    runs.push_back(latency_stats(durations));
    all.insert(all.end(), durations.begin(), durations.end());
  }
  const LatencyStats aggregate = latency_stats(all);

  if (a.json) {
    Json doc{{"stage", "engine (classify + feedback + accumulate), detectors excluded"},
             {"runs", Json::array()},
             {"aggregate", latency_to_json(aggregate)}};
    for (const auto& r : runs) doc["runs"].push_back(latency_to_json(r));
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  auto line = [](const std::string& label, const LatencyStats& s) {
    std::cout << std::left << std::setw(10) << label << std::right << std::fixed
              << std::setprecision(2) << " frames=" << s.frames << " mean=" << s.mean_us
              << "us p50=" << s.p50_us << "us p95=" << s.p95_us << "us p99=" << s.p99_us
              << "us fps=" << std::setprecision(0) << s.frames_per_second << "\n";
  };
  std::cout << "engine stage only (detectors excluded)\n";
  for (std::size_t i = 0; i < runs.size(); ++i) line("run " + std::to_string(i + 1), runs[i]);
  line("aggregate", aggregate);
  return 0;
}

// --- serve / drive ----------------------------------------------------------

struct ServeArgs {
  EngineArgs engine;
  std::string listen = "127.0.0.1:8765";
  std::string store;
  std::string users;
};

int run_serve(const ServeArgs& a) {
  const auto [host, port] = parse_endpoint(a.listen);
  auto engine = std::make_shared<const Engine>(a.engine.load_engine());
  ServiceOptions options;
  if (!a.users.empty()) options.users = read_users(a.users);
  auto store = a.store.empty() ? nullptr : std::make_shared<SessionStore>(a.store);
  SessionService service(engine, store, options);
  WebSocketServer server(service, host, port);
  server.run(true, [&] { std::cout << "listening on " << host << ":" << server.port() << std::endl; });
  std::cout << "shut down" << std::endl;
  return 0;
}

struct DriveArgs {
  std::string connect = "127.0.0.1:8765";
  std::string stream;
  std::string user = "cli";
  std::string out;
};

// Plays a recorded stream through a running service, one message per frame.
int run_drive(const DriveArgs& a) {
  const auto [host, port] = parse_endpoint(a.connect);
  const std::vector<FramePacket> packets = read_stream(fs::path(a.stream));
  WebSocketClient client(host, port);
  auto expect = [](const Json& reply, const char* type) {
    if (reply.value("type", "") == "error") {
      throw Error(ErrorCode::BadRequest, "server error " + reply.value("code", "") + ": " +
                                             reply.value("detail", ""));
    }
    if (reply.value("type", "") != type) throw Error(ErrorCode::BadRequest, "unexpected reply");
  };
  Json started = client.request({{"type", "start"}, {"user", a.user}});
  expect(started, "started");
  const std::string token = started["token"];
  std::string frames;
  for (const FramePacket& p : packets) {
    Json reply = client.request({{"type", "frame"}, {"token", token}, {"packet", frame_to_json(p)}});
    expect(reply, "frame_result");
    frames += reply.dump() + "\n";
  }
  Json summary = client.request({{"type", "end"}, {"token", token}});
  expect(summary, "summary");
  if (!a.out.empty()) {
    write_file(fs::path(a.out) / "frames.jsonl", frames);
    write_file(fs::path(a.out) / "summary.json",
               summary_file_text(summary_from_json(summary["summary"])));
  }
  std::cout << "session: " << token << "\n"
            << "frames: " << packets.size() << "\n"
            << "p95 engine latency: " << summary["latency"]["p95_us"].get<double>() << " us\n";
  return 0;
}

// --- inspection ---------------------------------------------------------------

int run_history(const std::string& store, const std::string& user) {
  for (const SessionRecord& r : SessionStore(store).list_history(user)) {
    std::cout << r.started_at << "  " << r.session_id << "  frames=" << r.summary.total_frames
              << "  duration_ms=" << r.summary.duration_ms << "\n";
  }
  return 0;
}

int run_show(const std::string& store, const std::string& session) {
  std::cout << record_to_json(SessionStore(store).load(session)).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cello posture evaluation engine"};
  app.require_subcommand(1);

  ReplayArgs replay_args;
  auto* replay_cmd = app.add_subcommand("replay", "Evaluate a recorded landmark stream");
  replay_cmd->add_option("--stream", replay_args.stream, "Frame stream (JSONL)")->required();
  replay_args.engine.add_to(replay_cmd, false);
  replay_cmd->add_option("--out", replay_args.out, "Output directory")->required();
  replay_cmd->add_option("--store", replay_args.store, "Also persist a session record here");
  replay_cmd->add_option("--user", replay_args.user, "User id for the stored record");

  TrainArgs train_args;
  train_args.train.seed = 7;
  auto* train_cmd = app.add_subcommand("train", "Train a posture classifier");
  train_cmd->add_option("task", train_args.task, "wrist or elbow")->required();
  auto* synth_opt = train_cmd->add_option("--synth", train_args.synth, "Synthetic data: n=,seed=,sigma=")
                        ->expected(0, -1);
  train_cmd->add_option("--dataset", train_args.dataset, "Labeled dataset (JSONL)")->excludes(synth_opt);
  train_cmd->add_option("--layers", train_args.layers, "Layer sizes, e.g. 42,24,3");
  train_cmd->add_option("--epochs", train_args.train.epochs);
  train_cmd->add_option("--lr", train_args.train.learning_rate);
  train_cmd->add_option("--batch", train_args.train.batch_size);
  train_cmd->add_option("--momentum", train_args.train.momentum);
  train_cmd->add_option("--val-fraction", train_args.train.validation_fraction);
  train_cmd->add_option("--seed", train_args.train.seed, "Training seed");
  train_cmd->add_option("--out", train_args.out, "Model file")->required();
  train_cmd->add_option("--report", train_args.report, "Training report (JSON)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labeled dataset");
  synth_cmd->add_option("task", synth_args.task, "wrist or elbow")->required();
  synth_cmd->add_option("params", synth_args.params, "n=,seed=,sigma=");
  synth_cmd->add_option("--out", synth_args.out, "Dataset file")->required();

  StreamSpec stream_spec;
  std::string stream_out;
  auto* stream_cmd = app.add_subcommand("stream", "Write a synthetic practice stream");
  stream_cmd->add_option("--seed", stream_spec.seed);
  stream_cmd->add_option("--duration-ms", stream_spec.duration_ms);
  stream_cmd->add_option("--interval-ms", stream_spec.frame_interval_ms);
  stream_cmd->add_option("--dropout", stream_spec.dropout_probability);
  stream_cmd->add_option("--noise", stream_spec.noise_sigma);
  stream_cmd->add_option("--out", stream_out, "Stream file")->required();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Measure per-frame engine latency");
  bench_cmd->add_option("--stream", bench_args.stream)->required();
  bench_args.engine.add_to(bench_cmd, false);
  bench_cmd->add_option("--repetitions", bench_args.repetitions);
  bench_cmd->add_flag("--json", bench_args.json, "Machine-readable output");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the WebSocket session service");
  serve_args.engine.add_to(serve_cmd, true);
  serve_cmd->add_option("--listen", serve_args.listen, "host:port")->envname("CELLO_LISTEN");
  serve_cmd->add_option("--store", serve_args.store, "Session store directory")->envname("CELLO_STORE");
  serve_cmd->add_option("--users", serve_args.users, "File of allowed user ids")->envname("CELLO_USERS");

  DriveArgs drive_args;
  auto* drive_cmd = app.add_subcommand("drive", "Play a stream through a running service");
  drive_cmd->add_option("--connect", drive_args.connect, "host:port");
  drive_cmd->add_option("--stream", drive_args.stream)->required();
  drive_cmd->add_option("--user", drive_args.user);
  drive_cmd->add_option("--out", drive_args.out, "Output directory");

  std::string store_dir, user_id, session_id;
  auto* history_cmd = app.add_subcommand("history", "List stored sessions of a user");
  history_cmd->add_option("--store", store_dir)->required();
  history_cmd->add_option("--user", user_id)->required();
  auto* show_cmd = app.add_subcommand("show", "Print a stored session record");
  show_cmd->add_option("--store", store_dir)->required();
  show_cmd->add_option("session", session_id)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*replay_cmd) return run_replay(replay_args);
    if (*train_cmd) return run_train(train_args);
    if (*synth_cmd) return run_synth(synth_args);
    if (*stream_cmd) return run_stream(stream_spec, stream_out);
    if (*bench_cmd) return run_bench(bench_args);
    if (*serve_cmd) return run_serve(serve_args);
    if (*drive_cmd) return run_drive(drive_args);
    if (*history_cmd) return run_history(store_dir, user_id);
    if (*show_cmd) return run_show(store_dir, session_id);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
