#pragma once

#include <cmath>
#include <numbers>

#include "cello/geometry.hpp"
#include "cello/ingest.hpp"
#include "cello/rng.hpp"
#include "cello/types.hpp"

namespace gen {

inline cello::OrientedBox random_box(cello::Rng& rng) {
  const double w = rng.uniform(0.02, 0.3);
  return cello::OrientedBox::make(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), w,
                                  rng.uniform(0.005, w), rng.uniform(-90.0, 90.0));
}

// A strings box and the point at fraction p along its axis, measured from
// the bridge end.
inline cello::Vec2 zone_point(const cello::OrientedBox& strings, double p) {
  const cello::Vec2 a = strings.major_axis();
  cello::Vec2 e1 = strings.center() + (strings.w() / 2) * a;
  cello::Vec2 e2 = strings.center() - (strings.w() / 2) * a;
  if (e2.y < e1.y || (e2.y == e1.y && e2.x < e1.x)) std::swap(e1, e2);
  // e1 is now the fingerboard end.
  return e2 + p * (e1 - e2);
}

// Bow of length 0.5 centered on the strings axis at fraction p, crossing at
// axis angle `angle_deg`.
inline cello::OrientedBox bow_across(const cello::OrientedBox& strings, double p,
                                     double angle_deg, double h = 0.02) {
  const cello::Vec2 c = zone_point(strings, p);
  return cello::OrientedBox::make(c.x, c.y, 0.5, h, strings.theta_deg() - angle_deg);
}

inline cello::OrientedBox default_strings() {
  return cello::OrientedBox::make(0.5, 0.5, 0.4, 0.06, 80.0);
}

inline cello::HandLandmarks random_hand(cello::Rng& rng) {
  cello::HandLandmarks h;
  for (auto& p : h) p = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
  return h;
}

inline cello::PoseTriplet random_pose(cello::Rng& rng) {
  auto pt = [&] {
    return cello::Vec3{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(-0.3, 0.3)};
  };
  return {pt(), pt(), pt()};
}

// Valid packet with each detection present with probability 0.7.
inline cello::FramePacket random_packet(cello::Rng& rng, std::int64_t t_ms) {
  cello::FramePacket p;
  p.t_ms = t_ms;
  if (rng.uniform() < 0.7) p.hand = random_hand(rng);
  if (rng.uniform() < 0.7) p.pose = random_pose(rng);
  if (rng.uniform() < 0.7) p.bow = random_box(rng);
  if (rng.uniform() < 0.7) p.strings = random_box(rng);
  return p;
}

}  // namespace gen
