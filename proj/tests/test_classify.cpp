#include <doctest.h>

#include "cello/classify.hpp"
#include "cello/error.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace cello;

namespace {

std::shared_ptr<const MlpModel> shared(const MlpModel& m) { return std::make_shared<const MlpModel>(m); }

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("empty packet") {
    const auto r = classify_frame(FramePacket{42, {}, {}, {}, {}}, fixture::wrist_model(), fixture::elbow_model(), {});
    CHECK(r.t_ms == 42);
    CHECK(r.wrist.cls == WristClass::Undetected);
    CHECK_FALSE(r.wrist.probabilities.has_value());
    CHECK(r.elbow.cls == ElbowClass::Undetected);
    CHECK_FALSE(r.elbow.probabilities.has_value());
    CHECK_FALSE(r.bow.in_zone);
    CHECK(r.bow.height == BowHeight::NotApplicable);
    CHECK(r.bow.angle == BowAngle::NotApplicable);
    CHECK(r.flags == CorrectnessFlags{});
    CHECK(r.detected == DetectionFlags{});
    CHECK_FALSE(r.bow_out_of_zone());
  }

  TEST_CASE("hand only") {
    Rng rng(51);
    FramePacket p;
    p.t_ms = 1;
    p.hand = gen::random_hand(rng);
    const auto r = classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {});
    CHECK(r.wrist.cls != WristClass::Undetected);
    REQUIRE(r.wrist.probabilities.has_value());
    CHECK(r.wrist.probabilities->size() == 3);
    CHECK(r.flags.wrist != Correctness::NotApplicable);
    CHECK(r.elbow.cls == ElbowClass::Undetected);
    CHECK(r.flags.elbow == Correctness::NotApplicable);
    CHECK(r.flags.bow_height == Correctness::NotApplicable);
    CHECK(r.flags.bow_angle == Correctness::NotApplicable);
  }

  TEST_CASE("degenerate detections are undetected") {
    FramePacket p;
    p.hand = HandLandmarks{};
    p.hand->fill({0.3, 0.3});
    p.pose = PoseTriplet{{0.1, 0.1, 0}, {0.1, 0.1, 0}, {0.4, 0.4, 0}};
    const auto r = classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {});
    CHECK(r.wrist.cls == WristClass::Undetected);
    CHECK(r.elbow.cls == ElbowClass::Undetected);
    CHECK(r.detected.hand);
    CHECK(r.detected.pose);
  }

  TEST_CASE("fixture stream matches the hand-composed evaluation") {
    const PostureClassifier engine(shared(fixture::wrist_model()), shared(fixture::elbow_model()));
    std::size_t in_zone = 0, wrist_seen = 0;
    for (const auto& p : fixture::stream()) {
      const auto got = engine.classify(p);
      REQUIRE(got == oracle::compose_frame(p, fixture::wrist_model(), fixture::elbow_model(), BowConfig{}));
      REQUIRE(got == classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {}));
      in_zone += got.bow.in_zone;
      wrist_seen += got.wrist.cls != WristClass::Undetected;
    }
    CHECK(in_zone > 0);
    CHECK(wrist_seen > 0);
  }

  TEST_CASE("random packets match the hand-composed evaluation") {
    Rng rng(52);
    BowConfig cfg;
    cfg.angle_tolerance_deg = 25;
    for (int i = 0; i < 2000; ++i) {
      const auto p = gen::random_packet(rng, i);
      REQUIRE(classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), cfg) ==
              oracle::compose_frame(p, fixture::wrist_model(), fixture::elbow_model(), cfg));
    }
  }

  TEST_CASE("classes survive a shift of the output bias") {
    MlpModel shifted = fixture::wrist_model();
    for (double& b : shifted.layers().back().biases) b += 7.5;
    MlpModel eshifted = fixture::elbow_model();
    for (double& b : eshifted.layers().back().biases) b -= 3.25;
    for (const auto& p : fixture::stream()) {
      const auto a = classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {});
      const auto b = classify_frame(p, shifted, eshifted, {});
      REQUIRE(a.wrist.cls == b.wrist.cls);
      REQUIRE(a.elbow.cls == b.elbow.cls);
    }
  }

  TEST_CASE("categories are independent") {
    Rng rng(53);
    for (int i = 0; i < 500; ++i) {
      auto p = gen::random_packet(rng, i);
      const auto base = classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {});
      auto q = p;
      q.bow = gen::random_box(rng);
      q.strings = rng.uniform() < 0.5 ? std::optional<OrientedBox>{} : std::optional{gen::random_box(rng)};
      const auto bow_moved = classify_frame(q, fixture::wrist_model(), fixture::elbow_model(), {});
      REQUIRE(bow_moved.wrist == base.wrist);
      REQUIRE(bow_moved.elbow == base.elbow);
      REQUIRE(bow_moved.flags.wrist == base.flags.wrist);
      REQUIRE(bow_moved.flags.elbow == base.flags.elbow);
      auto s = p;
      s.hand = gen::random_hand(rng);
      s.pose = gen::random_pose(rng);
      const auto body_moved = classify_frame(s, fixture::wrist_model(), fixture::elbow_model(), {});
      REQUIRE(body_moved.bow == base.bow);
      REQUIRE(body_moved.flags.bow_height == base.flags.bow_height);
      REQUIRE(body_moved.flags.bow_angle == base.flags.bow_angle);
    }
  }

  TEST_CASE("out of zone marks bow height incorrect") {
    FramePacket p;
    p.strings = OrientedBox::make(0.2, 0.2, 0.1, 0.05, 0);
    p.bow = OrientedBox::make(0.8, 0.8, 0.1, 0.05, 0);
    const auto r = classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {});
    CHECK(r.bow_out_of_zone());
    CHECK(r.flags.bow_height == Correctness::Incorrect);
    CHECK(r.flags.bow_angle == Correctness::NotApplicable);
  }

  TEST_CASE("confidence gate") {
    ClassifierConfig cfg;
    cfg.confidence_gate = 0.999999;
    const PostureClassifier gated(shared(fixture::wrist_model()), shared(fixture::elbow_model()), cfg);
    const MlpModel flat({42, 3}, {"normal", "supinated", "over_pronated"});
    const PostureClassifier uniform(shared(flat), shared(fixture::elbow_model()), ClassifierConfig{{}, 0, 0.5});
    Rng rng(54);
    FramePacket p;
    p.hand = gen::random_hand(rng);
    CHECK(uniform.classify(p).wrist.cls == WristClass::Undetected);
    CHECK_FALSE(uniform.classify(p).wrist.probabilities.has_value());
    CHECK_NOTHROW(gated.classify(p));
  }

  TEST_CASE("engine construction errors") {
    const MlpModel wrong_in({40, 3}, {"normal", "supinated", "over_pronated"});
    const MlpModel wrong_labels({42, 3}, {"normal", "supinated", "sideways"});
    const MlpModel four({9, 4}, {"normal", "too_low", "too_high", "x"});
    auto code = [](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::IoError;
    };
    const auto em = shared(fixture::elbow_model());
    const auto wm = shared(fixture::wrist_model());
    CHECK(code([&] { PostureClassifier(shared(wrong_in), em); }) == ErrorCode::ModelShapeMismatch);
    CHECK(code([&] { PostureClassifier(shared(wrong_labels), em); }) == ErrorCode::ModelShapeMismatch);
    CHECK(code([&] { PostureClassifier(wm, shared(four)); }) == ErrorCode::ModelShapeMismatch);
    CHECK(code([&] { PostureClassifier(em, wm); }) == ErrorCode::ModelShapeMismatch);
    CHECK(code([&] { PostureClassifier(wm, em, ClassifierConfig{{10, 0.9, 0.2}}); }) == ErrorCode::BadConfig);
  }

  TEST_CASE("label order in the model file does not matter") {
    // Swap output rows 1 and 2 together with their labels.
    Json doc = model_to_json(fixture::wrist_model());
    auto& last = doc["layers"].back();
    std::swap(last["w"][1], last["w"][2]);
    std::swap(last["b"][1], last["b"][2]);
    doc["class_labels"] = {"normal", "over_pronated", "supinated"};
    const MlpModel m = model_from_json(doc);
    for (const auto& p : fixture::stream()) {
      REQUIRE(classify_frame(p, m, fixture::elbow_model(), {}).wrist.cls ==
              classify_frame(p, fixture::wrist_model(), fixture::elbow_model(), {}).wrist.cls);
    }
  }
}
