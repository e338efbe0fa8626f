#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "cello/features.hpp"
#include "cello/synth.hpp"

using namespace cello;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

// Template normalized with plain loops, read from the shipped data file.
std::vector<std::array<double, 2>> normalized_template() {
  std::ifstream in(std::string(CELLO_SOURCE_DIR) + "/data/hand_template.json");
  const Json doc = Json::parse(in);
  std::vector<std::array<double, 2>> pts;
  for (const auto& p : doc.at("landmarks")) pts.push_back({p[0].get<double>(), p[1].get<double>()});
  double r = 0;
  for (auto& p : pts) {
    p[0] -= doc["landmarks"][0][0].get<double>();
    p[1] -= doc["landmarks"][0][1].get<double>();
    r = std::max(r, std::hypot(p[0], p[1]));
  }
  for (auto& p : pts) p = {p[0] / r, p[1] / r};
  return pts;
}

// Least-squares planar rotation mapping the template onto the sample,
// counterclockwise on screen (y down).
double wrist_angle(const std::vector<double>& x, const std::vector<std::array<double, 2>>& tpl) {
  double cross = 0, dotp = 0;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    const double px = x[2 * i], py = x[2 * i + 1];
    cross += px * tpl[i][1] - py * tpl[i][0];
    dotp += px * tpl[i][0] + py * tpl[i][1];
  }
  return std::atan2(cross, dotp) / kRad;
}

double elbow_elevation(const std::vector<double>& x) { return std::asin(-x[4]) / kRad; }

std::size_t nearest_band(double angle, const std::vector<AngleBand>& bands) {
  std::size_t best = 0;
  double best_d = 1e300;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const double d = angle < bands[k].lo_deg ? bands[k].lo_deg - angle
                     : angle > bands[k].hi_deg ? angle - bands[k].hi_deg
                                               : 0.0;
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

double oracle_accuracy(const LabeledDataset& data, SynthTask task) {
  const auto bands = SynthBands{}.for_task(task);
  const auto tpl = normalized_template();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double a = task == SynthTask::Wrist ? wrist_angle(data.inputs[i], tpl) : elbow_elevation(data.inputs[i]);
    hits += nearest_band(a, bands) == data.labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("generation is deterministic") {
    for (auto task : {SynthTask::Wrist, SynthTask::Elbow}) {
      const auto a = generate({task, 50, 0.03, 99});
      const auto b = generate({task, 50, 0.03, 99});
      CHECK(a.inputs == b.inputs);
      CHECK(a.labels == b.labels);
      CHECK(generate({task, 50, 0.03, 100}).inputs != a.inputs);
    }
  }

  TEST_CASE("cardinality and labels") {
    for (auto task : {SynthTask::Wrist, SynthTask::Elbow}) {
      const auto d = generate({task, 100, 0.03, 1});
      REQUIRE(d.size() == 300);
      std::array<int, 3> counts{};
      for (auto y : d.labels) counts.at(y)++;
      CHECK(counts == std::array<int, 3>{100, 100, 100});
      CHECK(d.class_labels == class_labels(task));
      const std::size_t width = task == SynthTask::Wrist ? kHandFeatureSize : kElbowFeatureSize;
      for (const auto& x : d.inputs) REQUIRE(x.size() == width);
    }
    CHECK(wrist_class_labels() == std::vector<std::string>{"normal", "supinated", "over_pronated"});
    CHECK(elbow_class_labels() == std::vector<std::string>{"normal", "too_low", "too_high"});
  }

  TEST_CASE("zero noise is perfectly recoverable from the generating parameter") {
    for (auto task : {SynthTask::Wrist, SynthTask::Elbow}) {
      const auto d = generate({task, 300, 0.0, 5});
      CHECK(oracle_accuracy(d, task) == 1.0);
    }
  }

  TEST_CASE("oracle accuracy falls as noise grows") {
    for (auto task : {SynthTask::Wrist, SynthTask::Elbow}) {
      const double a0 = oracle_accuracy(generate({task, 1000, 0.0, 6}), task);
      const double a1 = oracle_accuracy(generate({task, 1000, 0.03, 6}), task);
      const double a2 = oracle_accuracy(generate({task, 1000, 0.1, 6}), task);
      CHECK(a0 >= a1);
      CHECK(a1 >= a2);
      CHECK(a2 < a0);
    }
  }

  TEST_CASE("generated vectors satisfy feature invariants") {
    const auto w = generate({SynthTask::Wrist, 200, 0.1, 2});
    for (const auto& x : w.inputs) {
      double r = 0;
      for (std::size_t i = 0; i < 21; ++i) r = std::max(r, std::hypot(x[2 * i], x[2 * i + 1]));
      REQUIRE(r == doctest::Approx(1.0).epsilon(1e-12));
      REQUIRE(x[0] == 0.0);
      REQUIRE(x[1] == 0.0);
    }
    const auto e = generate({SynthTask::Elbow, 200, 0.1, 2});
    for (const auto& x : e.inputs) {
      REQUIRE(x[0] >= 0.0);
      REQUIRE(x[0] <= std::numbers::pi);
      REQUIRE(x[1] > 0.0);
      REQUIRE(x[2] > 0.0);
      REQUIRE(std::hypot(x[3], x[4], x[5]) == doctest::Approx(1.0).epsilon(1e-9));
      REQUIRE(std::hypot(x[6], x[7], x[8]) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("rotate_hand turns counterclockwise on screen") {
    HandLandmarks h{};
    h[1] = {1.0, 0.0};
    const auto r = rotate_hand(h, 90.0);
    CHECK(std::abs(r[1].x) <= 1e-12);
    CHECK(r[1].y == doctest::Approx(-1.0));
  }

  TEST_CASE("scripted stream") {
    StreamSpec spec;
    spec.seed = 3;
    spec.duration_ms = 4000;
    const auto a = generate_stream(spec);
    CHECK(a.size() == 100);
    for (std::size_t i = 1; i < a.size(); ++i) REQUIRE(a[i].t_ms > a[i - 1].t_ms);
    CHECK(generate_stream(spec) == a);
    CHECK(a.front().t_ms == 0);
  }

  TEST_CASE("bad spec") {
    CHECK_THROWS(generate({SynthTask::Wrist, 0, 0.03, 1}));
    CHECK_THROWS(generate({SynthTask::Wrist, 10, -0.1, 1}));
  }
}
