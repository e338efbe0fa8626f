#include "cello/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cello/error.hpp"
#include "cello/features.hpp"
#include "cello/rng.hpp"

namespace cello {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Mirrors data/hand_template.json; a test keeps the two in sync.
constexpr HandLandmarks kHandTemplate = {{
    {0.00, 0.00},                                                        // wrist base
    {-0.10, -0.08}, {-0.18, -0.18}, {-0.24, -0.27}, {-0.29, -0.35},      // thumb
    {-0.09, -0.38}, {-0.11, -0.52}, {-0.12, -0.61}, {-0.13, -0.69},      // index
    {0.00, -0.40},  {0.00, -0.56},  {0.00, -0.66},  {0.00, -0.75},       // middle
    {0.08, -0.37},  {0.10, -0.51},  {0.11, -0.60},  {0.12, -0.67},       // ring
    {0.15, -0.32},  {0.19, -0.42},  {0.21, -0.49},  {0.23, -0.55},       // pinky
}};

double hand_radius(const HandLandmarks& hand) {
  double r = 0.0;
  for (const Vec2& p : hand) r = std::max(r, norm(p - hand[0]));
  return r;
}

double draw(Rng& rng, const AngleBand& band) { return rng.uniform(band.lo_deg, band.hi_deg); }

// Unit direction with the given elevation above horizontal (screen up is -y)
// and azimuth rotating from +x toward +z.
Vec3 direction(double elevation_deg, double azimuth_deg) {
  const double e = elevation_deg * kDegToRad;
  const double a = azimuth_deg * kDegToRad;
  return {std::cos(e) * std::cos(a), -std::sin(e), std::cos(e) * std::sin(a)};
}

Vec3 jitter(Rng& rng, Vec3 p, double sigma) {
  return {p.x + sigma * rng.normal(), p.y + sigma * rng.normal(), p.z + sigma * rng.normal()};
}

HandLandmarks noisy_hand(Rng& rng, double angle_deg, double sigma) {
  HandLandmarks hand = rotate_hand(kHandTemplate, angle_deg);
  const double scale = sigma * hand_radius(kHandTemplate);
  for (Vec2& p : hand) {
    p.x += scale * rng.normal();
    p.y += scale * rng.normal();
  }
  return hand;
}

PoseTriplet arm_pose(Rng& rng, Vec3 shoulder, double elevation_deg, double sigma) {
  const double upper = rng.uniform(0.22, 0.32);
  const double fore = rng.uniform(0.20, 0.30);
  const Vec3 elbow = shoulder + upper * direction(elevation_deg, rng.uniform(-30.0, 30.0));
  const Vec3 wrist = elbow + fore * direction(rng.uniform(-60.0, 45.0), rng.uniform(-90.0, 90.0));
  const double s = sigma * upper;
  return {jitter(rng, shoulder, s), jitter(rng, elbow, s), jitter(rng, wrist, s)};
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

enum class BowState { Ok, TooHigh, TooLow, AngleOff, OutOfZone };

template <typename T, std::size_t N>
T pick(Rng& rng, const std::array<std::pair<T, double>, N>& weighted) {
  double u = rng.uniform();
  for (const auto& [value, weight] : weighted) {
    if (u < weight) return value;
    u -= weight;
  }
  return weighted.back().first;
}

OrientedBox place_bow(Rng& rng, const OrientedBox& strings, BowState state) {
  const Vec2 u = strings.major_axis();
  const Vec2 dir = u.y < 0.0 ? u : Vec2{-u.x, -u.y};
  const Vec2 bridge = strings.center() - (strings.w() / 2.0) * dir;

  double p = rng.uniform(0.3, 0.7);
  double crossing_angle = rng.uniform(84.0, 96.0);
  switch (state) {
    case BowState::Ok: break;
    case BowState::TooHigh: p = rng.uniform(0.9, 0.99); break;
    case BowState::TooLow: p = rng.uniform(0.01, 0.1); break;
    case BowState::AngleOff:
      crossing_angle = rng.uniform(0.0, 1.0) < 0.5 ? rng.uniform(58.0, 70.0) : rng.uniform(110.0, 122.0);
      break;
    case BowState::OutOfZone:
      p = rng.uniform(0.0, 1.0) < 0.5 ? rng.uniform(1.3, 1.6) : rng.uniform(-0.6, -0.3);
      break;
  }
  const Vec2 crossing = bridge + (p * strings.w()) * dir;
  const OrientedBox probe =
      OrientedBox::make(0.0, 0.0, 1.0, 0.5, strings.theta_deg() + crossing_angle);
  const double slide = state == BowState::OutOfZone ? 0.0 : rng.uniform(-0.06, 0.06);
  const Vec2 center = crossing + slide * probe.major_axis();
  return OrientedBox::make(center.x, center.y, rng.uniform(0.26, 0.32), rng.uniform(0.02, 0.03),
                           probe.theta_deg());
}

}  // namespace

const char* to_string(SynthTask task) { return task == SynthTask::Wrist ? "wrist" : "elbow"; }

void SynthSpec::validate() const {
  if (n_per_class == 0) throw Error(ErrorCode::BadConfig, "n_per_class must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::BadConfig, "noise_sigma must be non-negative");
  }
}

std::vector<AngleBand> SynthBands::for_task(SynthTask task) const {
  if (task == SynthTask::Wrist) return {wrist_normal, wrist_supinated, wrist_over_pronated};
  return {elbow_normal, elbow_too_low, elbow_too_high};
}

const std::vector<std::string>& wrist_class_labels() {
  static const std::vector<std::string> labels = {"normal", "supinated", "over_pronated"};
  return labels;
}

const std::vector<std::string>& elbow_class_labels() {
  static const std::vector<std::string> labels = {"normal", "too_low", "too_high"};
  return labels;
}

const HandLandmarks& canonical_hand_template() { return kHandTemplate; }

std::vector<std::size_t> default_layer_sizes(SynthTask task) {
  if (task == SynthTask::Wrist) return {kHandFeatureSize, 24, 3};
  return {kElbowFeatureSize, 34, 3};
}

const std::vector<std::string>& class_labels(SynthTask task) {
  return task == SynthTask::Wrist ? wrist_class_labels() : elbow_class_labels();
}

HandLandmarks rotate_hand(const HandLandmarks& hand, double angle_deg) {
  const double c = std::cos(angle_deg * kDegToRad);
  const double s = std::sin(angle_deg * kDegToRad);
  HandLandmarks out;
  for (std::size_t i = 0; i < hand.size(); ++i) {
    const Vec2 d = hand[i] - hand[0];
    out[i] = hand[0] + Vec2{c * d.x + s * d.y, -s * d.x + c * d.y};
  }
  return out;
}

LabeledDataset generate(const SynthSpec& spec, const SynthBands& bands) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledDataset data;
  data.class_labels =
      class_labels(spec.task);
  const std::vector<AngleBand> per_class = bands.for_task(spec.task);

  for (std::size_t label = 0; label < per_class.size(); ++label) {
    for (std::size_t k = 0; k < spec.n_per_class; ++k) {
      const double angle = draw(rng, per_class[label]);
      if (spec.task == SynthTask::Wrist) {
        const HandFeatureVector f = normalize_hand(noisy_hand(rng, angle, spec.noise_sigma));
        data.inputs.emplace_back(f.values.begin(), f.values.end());
      } else {
        const PoseTriplet pose = arm_pose(rng, Vec3{}, angle, spec.noise_sigma);
        const ElbowFeatureVector f = elbow_features(pose);
        data.inputs.emplace_back(f.values.begin(), f.values.end());
      }
      data.labels.push_back(label);
    }
  }
  return data;
}

std::vector<FramePacket> generate_stream(const StreamSpec& spec, const SynthBands& bands) {
  if (spec.frame_interval_ms <= 0 || spec.duration_ms <= 0) {
    throw Error(ErrorCode::BadConfig, "stream duration and frame interval must be positive");
  }
  Rng rng(spec.seed);
  const double scale = std::pow(10.0, spec.decimals);
  const auto wrist_bands = bands.for_task(SynthTask::Wrist);
  const auto elbow_bands = bands.for_task(SynthTask::Elbow);
  const OrientedBox strings = OrientedBox::make(0.50, 0.62, 0.30, 0.07, 80.0);
  const Vec3 shoulder{0.62, 0.30, 0.0};

  std::vector<FramePacket> packets;
  std::int64_t segment_end = 0;
  double wrist_angle = 0.0;
  double elevation = 0.0;
  double hand_scale = 0.15;
  BowState bow_state = BowState::Ok;
  OrientedBox bow = strings;

  for (std::int64_t t = 0; t < spec.duration_ms; t += spec.frame_interval_ms) {
    if (t >= segment_end) {
      segment_end = t + static_cast<std::int64_t>(rng.uniform(3000.0, 9000.0));
      const auto wrist_class = pick<std::size_t, 3>(rng, {{{0, 0.5}, {1, 0.3}, {2, 0.2}}});
      const auto elbow_class = pick<std::size_t, 3>(rng, {{{0, 0.6}, {1, 0.2}, {2, 0.2}}});
      wrist_angle = draw(rng, wrist_bands[wrist_class]);
      elevation = draw(rng, elbow_bands[elbow_class]);
      hand_scale = rng.uniform(0.12, 0.18);
      bow_state = pick<BowState, 5>(rng, {{{BowState::Ok, 0.4},
                                           {BowState::TooHigh, 0.15},
                                           {BowState::TooLow, 0.15},
                                           {BowState::AngleOff, 0.15},
                                           {BowState::OutOfZone, 0.15}}});
      bow = place_bow(rng, strings, bow_state);
    }

    FramePacket packet;
    packet.t_ms = t;

    if (rng.uniform() >= spec.dropout_probability) {
      // Bowing stroke: the hand travels along the bow.
      const double phase = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 2400.0);
      const Vec2 base = bow.center() + (0.08 * phase) * bow.major_axis();
      HandLandmarks hand = noisy_hand(rng, wrist_angle + rng.normal(0.0, 1.0), spec.noise_sigma);
      const double r = hand_radius(kHandTemplate);
      for (Vec2& p : hand) {
        p = base + (hand_scale / r) * p;
        p = {round_to(p.x, scale), round_to(p.y, scale)};
      }
      packet.hand = hand;
    }
    if (rng.uniform() >= spec.dropout_probability) {
      PoseTriplet pose = arm_pose(rng, shoulder, elevation + rng.normal(0.0, 1.0), spec.noise_sigma);
      for (Vec3* p : {&pose.shoulder, &pose.elbow, &pose.wrist}) {
        *p = {round_to(p->x, scale), round_to(p->y, scale), round_to(p->z, scale)};
      }
      packet.pose = pose;
    }
    if (rng.uniform() >= spec.dropout_probability) {
      packet.strings = OrientedBox::make(
          round_to(strings.cx() + rng.normal(0.0, 0.002), scale),
          round_to(strings.cy() + rng.normal(0.0, 0.002), scale), round_to(strings.w(), scale),
          round_to(strings.h(), scale), round_to(normalize_half_turn(strings.theta_deg() + rng.normal(0.0, 0.3)), scale));
    }
    if (rng.uniform() >= 2.0 * spec.dropout_probability) {
      packet.bow = OrientedBox::make(
          round_to(bow.cx() + rng.normal(0.0, 0.002), scale),
          round_to(bow.cy() + rng.normal(0.0, 0.002), scale), round_to(bow.w(), scale),
          round_to(bow.h(), scale), round_to(normalize_half_turn(bow.theta_deg() + rng.normal(0.0, 0.5)), scale));
    }
    packets.push_back(std::move(packet));
  }
  return packets;
}

}  // namespace cello
