// Prints one PASS/FAIL line per acceptance criterion and exits 1 if any fail.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "cello/feedback.hpp"
#include "cello/geometry.hpp"
#include "cello/neuralnet.hpp"
#include "cello/pipeline.hpp"
#include "cello/synth.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"

using namespace cello;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> engine_args() {
  return {"--wrist-model", fixture::path("wrist_model.json").string(), "--elbow-model",
          fixture::path("elbow_model.json").string()};
}

proc::Result cli(std::vector<std::string> args, bool with_engine) {
  args.insert(args.begin(), proc::cli_path());
  if (with_engine)
    for (auto& a : engine_args()) args.push_back(a);
  return proc::run(args);
}

Outcome geometry() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  int disagreements = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = gen::random_box(rng);
    const auto b = gen::random_box(rng);
    const auto v = oracle::raster_intersects(oracle::box_of(a), oracle::box_of(b), 2048);
    if (v.intersects == obb_intersects(a, b)) continue;
    ++disagreements;
    if (v.margin >= 2.0 / 2048) return {false, fmt("pair %d disagrees with margin %.3g", i, v.margin)};
  }
  const double s = seconds_since(t0);
  return {s < 30.0, fmt("10000 pairs, %d near-contact disagreements, %.2f s", disagreements, s)};
}

Outcome gradients() {
  const auto t0 = Clock::now();
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> sizes{2 + rng.below(5)};
    const std::size_t hidden = 1 + rng.below(2);
    for (std::size_t h = 0; h < hidden; ++h) sizes.push_back(2 + rng.below(6));
    sizes.push_back(2 + rng.below(3));
    const auto m = oracle::random_model(rng, sizes);
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> x(sizes.front());
      for (auto& v : x) v = rng.uniform(-2.0, 2.0);
      xs.push_back(x);
      ys.push_back(rng.below(sizes.back()));
    }
    const auto analytic = loss_and_gradients(m, xs, ys).gradients;
    const auto numeric = oracle::numeric_gradients(m, xs, ys, 1e-5);
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric, 1e-6));
  }
  const double s = seconds_since(t0);
  return {worst < 1e-4 && s < 10.0, fmt("50 models, worst relative error %.2e, %.2f s", worst, s)};
}

Outcome training(SynthTask task) {
  SynthSpec spec;
  spec.task = task;
  spec.seed = 7;
  spec.n_per_class = 1000;
  spec.noise_sigma = 0.03;
  const auto data = generate(spec);
  const auto t0 = Clock::now();
  const auto r = train(data, default_layer_sizes(task), TrainConfig{});
  const double s = seconds_since(t0);
  return {r.report.val_acc >= 0.95 && s < 60.0,
          fmt("held-out accuracy %.4f, %.1f s", r.report.val_acc, s)};
}

Outcome budgets() {
  Rng rng(1);
  const auto w = oracle::random_model(rng, default_layer_sizes(SynthTask::Wrist)).parameter_count();
  const auto e = oracle::random_model(rng, default_layer_sizes(SynthTask::Elbow)).parameter_count();
  return {w == 1107 && e == 445, fmt("wrist %zu, elbow %zu", w, e)};
}

// Start of the streak that is active at frame i, walking back while the
// gap to the previous active frame stays under the allowance.
std::int64_t streak_start(const std::vector<oracle::ErrorFrame>& f, std::size_t i, std::size_t cat,
                          std::int64_t allowance) {
  std::int64_t start = f[i].t_ms;
  for (std::size_t j = i; j-- > 0;) {
    if (!f[j].active[cat]) continue;
    if (start - f[j].t_ms >= allowance) break;
    start = f[j].t_ms;
  }
  return start;
}

Outcome feedback() {
  const auto t0 = Clock::now();
  const FeedbackConfig cfg;
  const auto& catalog = fixture::engine()->catalog;
  Rng rng(5000);
  std::size_t onsets = 0;
  for (int s = 0; s < 1000; ++s) {
    const auto frames = oracle::random_error_stream(rng, 10000);
    const auto want = oracle::reference_feedback(frames, cfg.persistence_ms, cfg.min_display_ms,
                                                 cfg.flicker_allowance_ms, FeedbackConfig::kMaxDisplayed);
    FeedbackTracker tracker(cfg, catalog);
    std::vector<oracle::Shown> prev;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& d = tracker.update(frames[i].t_ms, ActiveErrors(frames[i].active.to_ulong()));
      std::vector<oracle::Shown> got;
      for (const auto& ins : d) got.push_back({static_cast<std::size_t>(ins.category), ins.shown_since_ms});
      if (got != want[i]) return {false, fmt("stream %d frame %zu differs from the reference", s, i)};
      if (got.size() > FeedbackConfig::kMaxDisplayed) return {false, fmt("stream %d frame %zu shows %zu", s, i, got.size())};
      for (const auto& g : got) {
        const bool fresh = std::none_of(prev.begin(), prev.end(),
                                        [&](const oracle::Shown& p) { return p == g; });
        if (!fresh) continue;
        ++onsets;
        if (g.since != frames[i].t_ms || !frames[i].active[g.category] ||
            frames[i].t_ms - streak_start(frames, i, g.category, cfg.flicker_allowance_ms) < cfg.persistence_ms)
          return {false, fmt("stream %d frame %zu shows an instruction early", s, i)};
      }
      for (const auto& p : prev) {
        const bool kept = std::any_of(got.begin(), got.end(), [&](const oracle::Shown& g) { return g == p; });
        if (!kept && frames[i].t_ms - p.since < cfg.min_display_ms)
          return {false, fmt("stream %d frame %zu removes an instruction early", s, i)};
      }
      prev = std::move(got);
    }
  }
  return {true, fmt("1000 streams x 10000 frames, %zu onsets, %.1f s", onsets, seconds_since(t0))};
}

int read_port(proc::Child& child) {
  for (int i = 0; i < 20; ++i) {
    const auto line = child.read_line(10s);
    if (!line) return -1;
    if (line->rfind("listening on ", 0) == 0) return std::stoi(line->substr(line->rfind(':') + 1));
  }
  return -1;
}

Outcome replay_and_live(const fs::path& work) {
  const std::string stream = fixture::path("session.jsonl").string();
  for (const char* run : {"a", "b"}) {
    if (cli({"replay", "--stream", stream, "--out", (work / run).string()}, true).exit_code != 0)
      return {false, "replay command failed"};
  }
  for (const char* name : {"frames.jsonl", "timeline.jsonl", "summary.json"}) {
    if (slurp(work / "a" / name) != slurp(work / "b" / name))
      return {false, std::string(name) + " differs between runs"};
  }

  auto args = std::vector<std::string>{proc::cli_path(), "serve", "--listen", "127.0.0.1:0"};
  for (auto& a : engine_args()) args.push_back(a);
  proc::Child server(args);
  const int port = read_port(server);
  if (port <= 0) return {false, "service did not start"};
  const auto d = cli({"drive", "--connect", "127.0.0.1:" + std::to_string(port), "--stream", stream,
                      "--out", (work / "live").string()},
                     false);
  server.signal(SIGTERM);
  server.wait(10s);
  if (d.exit_code != 0) return {false, "drive failed: " + d.output};

  const auto replayed = lines_of(work / "a" / "frames.jsonl");
  const auto live = lines_of(work / "live" / "frames.jsonl");
  if (replayed.size() != live.size()) return {false, "frame counts differ"};
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (Json::parse(live[i]) != Json::parse(replayed[i])) return {false, fmt("frame %zu differs", i)};
  }
  if (slurp(work / "live" / "summary.json") != slurp(work / "a" / "summary.json"))
    return {false, "summaries differ"};
  return {true, fmt("2 replays identical, %zu live frames equal", live.size())};
}

Outcome summary_math() {
  const auto engine = fixture::engine();
  const auto& packets = fixture::stream();
  const auto base = replay(packets, *engine, engine->config).summary;

  std::vector<FramePacket> injected;
  Rng rng(31);
  for (const auto& p : packets) {
    FramePacket q = p;
    q.t_ms = p.t_ms * 2;
    injected.push_back(q);
    if (rng.uniform() < 0.25) injected.push_back(FramePacket{q.t_ms + 1, {}, {}, {}, {}});
  }
  const auto more = replay(injected, *engine, engine->config).summary;

  double worst = 0.0;
  bool raw_changed = false;
  for (std::size_t s = 0; s < base.sections.size(); ++s) {
    for (const auto* sum : {&base, &more}) {
      double total = 0.0;
      for (const auto& c : sum->sections[s].classes) total += c.normalized_percent.value_or(0.0);
      if (sum->sections[s].detected_frames > 0) worst = std::max(worst, std::abs(total - 100.0));
    }
    for (std::size_t c = 0; c < base.sections[s].classes.size(); ++c) {
      const auto& x = base.sections[s].classes[c];
      const auto& y = more.sections[s].classes[c];
      if (x.normalized_percent != y.normalized_percent)
        return {false, "normalized percentage changed in " + base.sections[s].name};
      if (x.raw_percent != y.raw_percent) raw_changed = true;
    }
  }
  return {worst <= 0.01 && raw_changed,
          fmt("max |sum-100| %.2e, %zu frames injected, raw shares moved", worst,
              injected.size() - packets.size())};
}

Outcome latency() {
  const auto r = cli({"bench", "--stream", fixture::path("session.jsonl").string(), "--repetitions", "3",
                      "--json"},
                     true);
  if (r.exit_code != 0) return {false, "bench failed: " + r.output};
  const Json doc = Json::parse(r.output);
  const double p95 = doc["aggregate"]["p95_us"].get<double>();
  return {p95 < 5000.0, fmt("p95 %.1f us over %d frames", p95, doc["aggregate"]["frames"].get<int>())};
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / ("cello-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geometry oracle", geometry},
      {"gradient correctness", gradients},
      {"training wrist", [] { return training(SynthTask::Wrist); }},
      {"training elbow", [] { return training(SynthTask::Elbow); }},
      {"parameter budgets", budgets},
      {"feedback timing", feedback},
      {"replay determinism and live equivalence", [&] { return replay_and_live(work); }},
      {"summary math", summary_math},
      {"engine latency", latency},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << "  (" << o.detail << ")" << std::endl;
  }
  fs::remove_all(work);
  std::cout << failures << " of " << criteria.size() << " criteria failed" << std::endl;
  return failures ? 1 : 0;
}
