#include "cello/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cello/error.hpp"

namespace cello {

namespace {

constexpr double kDegenerateHandRadius = 1e-9;
constexpr double kDegenerateLimbLength = 1e-12;

}  // namespace

HandFeatureVector normalize_hand(std::span<const Vec2> points, std::size_t origin_index) {
  if (points.size() != kHandLandmarkCount) {
    throw Error(ErrorCode::ShapeMismatch,
                "hand needs 21 landmarks, got " + std::to_string(points.size()));
  }
  if (origin_index >= kHandLandmarkCount) {
    throw Error(ErrorCode::ShapeMismatch, "hand origin index out of range");
  }

  const Vec2 origin = points[origin_index];
  double radius = 0.0;
  for (const Vec2& p : points) radius = std::max(radius, norm(p - origin));
  if (radius <= kDegenerateHandRadius) {
    throw Error(ErrorCode::DegenerateHand, "all hand landmarks coincide");
  }

  HandFeatureVector out;
  for (std::size_t i = 0; i < kHandLandmarkCount; ++i) {
    const Vec2 rel = points[i] - origin;
    out.values[2 * i] = rel.x / radius;
    out.values[2 * i + 1] = rel.y / radius;
  }
  return out;
}

ElbowFeatureVector elbow_features(const PoseTriplet& pose) {
  const Vec3 to_shoulder = pose.shoulder - pose.elbow;
  const Vec3 to_wrist = pose.wrist - pose.elbow;
  const double upper = norm(to_shoulder);
  const double fore = norm(to_wrist);
  if (upper <= kDegenerateLimbLength || fore <= kDegenerateLimbLength ||
      norm(pose.shoulder - pose.wrist) <= kDegenerateLimbLength) {
    throw Error(ErrorCode::DegeneratePose, "pose landmarks coincide");
  }

  const double cosine = std::clamp(dot(to_shoulder, to_wrist) / (upper * fore), -1.0, 1.0);
  const Vec3 u_se = (-1.0 / upper) * to_shoulder;
  const Vec3 u_we = (-1.0 / fore) * to_wrist;

  ElbowFeatureVector out;
  out.values = {std::acos(cosine), upper, fore, u_se.x, u_se.y, u_se.z, u_we.x, u_we.y, u_we.z};
  return out;
}

}  // namespace cello
