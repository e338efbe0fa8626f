#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "cello/types.hpp"

namespace cello {

inline constexpr std::size_t kHandFeatureSize = 2 * kHandLandmarkCount;
inline constexpr std::size_t kElbowFeatureSize = 9;

// Landmark 0 (wrist base) of the standard 21-point hand topology.
inline constexpr std::size_t kDefaultHandOrigin = 0;

// Per-landmark (x, y) after moving the origin landmark to (0, 0) and scaling
// the farthest landmark to unit distance. Flattened in landmark-index order.
struct HandFeatureVector {
  std::array<double, kHandFeatureSize> values{};
};

// [joint_angle_rad, |shoulder-elbow|, |elbow-wrist|,
//  unit(elbow - shoulder) xyz, unit(elbow - wrist) xyz]
struct ElbowFeatureVector {
  std::array<double, kElbowFeatureSize> values{};
};

// Throws Error(ShapeMismatch) unless exactly 21 points and origin_index < 21;
// Error(DegenerateHand) when every landmark lies within 1e-9 of the origin.
// Depth is deliberately not an input: hand landmark depth is too noisy.
HandFeatureVector normalize_hand(std::span<const Vec2> points,
                                 std::size_t origin_index = kDefaultHandOrigin);

// Throws Error(DegeneratePose) when two of the points coincide.
ElbowFeatureVector elbow_features(const PoseTriplet& pose);

}  // namespace cello
