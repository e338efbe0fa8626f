#pragma once

#include <array>
#include <optional>

#include "cello/types.hpp"

namespace cello {

/**
 * Rotated rectangle in normalized image coordinates.
 *
 * Always held in canonical form: w >= h and theta_deg in [-90, 90), where
 * theta_deg is the major-axis rotation measured counterclockwise on screen
 * from the image x-axis. Because image y points down, the major axis is
 * (cos t, -sin t) in image coordinates.
 */
class OrientedBox {
 public:
  // Canonicalizes any (w, h, theta) labelling of the same rectangle.
  // Throws Error(InvalidBox) for non-finite values or non-positive extents.
  static OrientedBox make(double cx, double cy, double w, double h, double theta_deg);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double theta_deg() const { return theta_deg_; }

  Vec2 center() const { return {cx_, cy_}; }
  Vec2 major_axis() const;  // unit length
  Vec2 minor_axis() const;  // major axis turned 90 degrees counterclockwise on screen

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;

 private:
  OrientedBox(double cx, double cy, double w, double h, double theta_deg)
      : cx_(cx), cy_(cy), w_(w), h_(h), theta_deg_(theta_deg) {}

  double cx_;
  double cy_;
  double w_;
  double h_;
  double theta_deg_;
};

// Maps any angle in degrees into [-90, 90).
double normalize_half_turn(double theta_deg);

// Corners in counterclockwise order as seen on screen, starting from the
// corner at -major/-minor.
std::array<Vec2, 4> obb_corners(const OrientedBox& box);

// Closed-rectangle overlap by the separating-axis test; touching counts.
bool obb_intersects(const OrientedBox& a, const OrientedBox& b);

// Acute angle between the two major axes, in [0, 90] degrees.
double axis_angle_between(const OrientedBox& a, const OrientedBox& b);

// Axes closer than this to parallel have no well-conditioned crossing point.
inline constexpr double kParallelLimitDeg = 2.0;

// Where the bow centerline crosses the string-zone major axis: 0 at the
// bridge end, 1 at the fingerboard end (the axis endpoint with smaller image
// y; on a horizontal axis, the one with smaller x). Clamped to [0, 1].
// Returns nullopt when the axes are within kParallelLimitDeg of parallel.
// Throws Error(NotIntersecting) when the boxes do not overlap.
std::optional<double> zone_position(const OrientedBox& bow, const OrientedBox& strings);

// Projection of the bow center onto the zone axis, same parameterization and
// clamping as zone_position. Used when the crossing is ill-conditioned.
double zone_projection(const OrientedBox& bow, const OrientedBox& strings);

struct BowConfig {
  double angle_tolerance_deg = 10.0;
  double low_threshold = 0.15;
  double high_threshold = 0.85;

  // Throws Error(BadConfig).
  void validate() const;

  friend bool operator==(const BowConfig&, const BowConfig&) = default;
};

enum class BowHeight { Ok, TooHigh, TooLow, NotApplicable };
enum class BowAngle { Correct, Incorrect, NotApplicable };

const char* to_string(BowHeight height);
const char* to_string(BowAngle angle);

struct BowAssessment {
  bool in_zone = false;
  BowHeight height = BowHeight::NotApplicable;
  BowAngle angle = BowAngle::NotApplicable;
  std::optional<double> zone_position;  // present iff in_zone
  std::optional<double> deviation_deg;  // |90 - axis angle|, present iff in_zone

  friend bool operator==(const BowAssessment&, const BowAssessment&) = default;
};

// Total: missing or disjoint boxes resolve to an out-of-zone assessment.
BowAssessment classify_bow(const std::optional<OrientedBox>& bow,
                           const std::optional<OrientedBox>& strings,
                           const BowConfig& cfg);

}  // namespace cello
