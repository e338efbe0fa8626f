#include "cello/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cello/error.hpp"

namespace cello {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Slack on the separating-axis comparison so that boxes which touch exactly
// are not split apart by rounding in the rotated axes.
constexpr double kContactSlack = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Unit vector along the string-zone axis pointing from the bridge end to the
// fingerboard end.
Vec2 zone_direction(const OrientedBox& strings) {
  const Vec2 u = strings.major_axis();
  return u.y < 0.0 ? u : Vec2{-u.x, -u.y};
}

double zone_fraction(const OrientedBox& strings, double offset_along_axis) {
  const double half = strings.w() / 2.0;
  return clamp01((offset_along_axis + half) / strings.w());
}

}  // namespace

double normalize_half_turn(double theta_deg) {
  if (theta_deg >= -90.0 && theta_deg < 90.0) return theta_deg;
  double r = std::fmod(theta_deg + 90.0, 180.0);
  if (r < 0.0) r += 180.0;
  if (r >= 180.0) r -= 180.0;
  return r - 90.0;
}

OrientedBox OrientedBox::make(double cx, double cy, double w, double h, double theta_deg) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h) ||
      !std::isfinite(theta_deg)) {
    throw Error(ErrorCode::InvalidBox, "oriented box has a non-finite field");
  }
  if (w <= 0.0 || h <= 0.0) {
    throw Error(ErrorCode::InvalidBox, "oriented box extents must be positive");
  }
  if (w < h) {
    std::swap(w, h);
    theta_deg += 90.0;
  }
  return OrientedBox(cx, cy, w, h, normalize_half_turn(theta_deg));
}

Vec2 OrientedBox::major_axis() const {
  const double t = theta_deg_ * kDegToRad;
  return {std::cos(t), -std::sin(t)};
}

Vec2 OrientedBox::minor_axis() const {
  const double t = theta_deg_ * kDegToRad;
  return {-std::sin(t), -std::cos(t)};
}

std::array<Vec2, 4> obb_corners(const OrientedBox& box) {
  const Vec2 c = box.center();
  const Vec2 a = (box.w() / 2.0) * box.major_axis();
  const Vec2 b = (box.h() / 2.0) * box.minor_axis();
  return {c - a - b, c + a - b, c + a + b, c - a + b};
}

bool obb_intersects(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 d = b.center() - a.center();
  const std::array<Vec2, 4> axes = {a.major_axis(), a.minor_axis(), b.major_axis(),
                                    b.minor_axis()};
  auto radius = [](const OrientedBox& box, Vec2 axis) {
    return box.w() / 2.0 * std::abs(dot(box.major_axis(), axis)) +
           box.h() / 2.0 * std::abs(dot(box.minor_axis(), axis));
  };
  for (const Vec2& axis : axes) {
    if (std::abs(dot(d, axis)) > radius(a, axis) + radius(b, axis) + kContactSlack) {
      return false;
    }
  }
  return true;
}

double axis_angle_between(const OrientedBox& a, const OrientedBox& b) {
  const double diff = std::fmod(std::abs(a.theta_deg() - b.theta_deg()), 180.0);
  return std::min(diff, 180.0 - diff);
}

std::optional<double> zone_position(const OrientedBox& bow, const OrientedBox& strings) {
  if (!obb_intersects(bow, strings)) {
    throw Error(ErrorCode::NotIntersecting, "bow and string boxes do not overlap");
  }
  if (axis_angle_between(bow, strings) < kParallelLimitDeg) return std::nullopt;

  const Vec2 dir = zone_direction(strings);
  const Vec2 bow_axis = bow.major_axis();
  // strings.center + t * dir lies on the bow centerline.
  const double t = cross(bow.center() - strings.center(), bow_axis) / cross(dir, bow_axis);
  return zone_fraction(strings, t);
}

double zone_projection(const OrientedBox& bow, const OrientedBox& strings) {
  const Vec2 dir = zone_direction(strings);
  return zone_fraction(strings, dot(bow.center() - strings.center(), dir));
}

void BowConfig::validate() const {
  if (!(low_threshold > 0.0 && low_threshold < high_threshold && high_threshold < 1.0)) {
    throw Error(ErrorCode::BadConfig, "bow thresholds must satisfy 0 < low < high < 1");
  }
  if (!(angle_tolerance_deg > 0.0 && angle_tolerance_deg < 45.0)) {
    throw Error(ErrorCode::BadConfig, "angle tolerance must lie in (0, 45) degrees");
  }
}

const char* to_string(BowHeight height) {
  switch (height) {
    case BowHeight::Ok: return "ok";
    case BowHeight::TooHigh: return "too_high";
    case BowHeight::TooLow: return "too_low";
    case BowHeight::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

const char* to_string(BowAngle angle) {
  switch (angle) {
    case BowAngle::Correct: return "correct";
    case BowAngle::Incorrect: return "incorrect";
    case BowAngle::NotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

BowAssessment classify_bow(const std::optional<OrientedBox>& bow,
                           const std::optional<OrientedBox>& strings, const BowConfig& cfg) {
  BowAssessment out;
  if (!bow || !strings || !obb_intersects(*bow, *strings)) return out;

  out.in_zone = true;
  const double deviation = std::abs(90.0 - axis_angle_between(*bow, *strings));
  out.deviation_deg = deviation;
  out.angle = deviation <= cfg.angle_tolerance_deg ? BowAngle::Correct : BowAngle::Incorrect;

  const std::optional<double> crossing = zone_position(*bow, *strings);
  const double p = crossing ? *crossing : zone_projection(*bow, *strings);
  out.zone_position = p;
  if (p < cfg.low_threshold) {
    out.height = BowHeight::TooLow;
  } else if (p > cfg.high_threshold) {
    out.height = BowHeight::TooHigh;
  } else {
    out.height = BowHeight::Ok;
  }
  return out;
}

}  // namespace cello
