#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace cello {

// Normalized image coordinates; y points down.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

// Normalized image coordinates plus detector-relative depth.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }

inline constexpr std::size_t kHandLandmarkCount = 21;

using HandLandmarks = std::array<Vec2, kHandLandmarkCount>;

// Bow-side arm as reported by the body landmark detector.
struct PoseTriplet {
  Vec3 shoulder;
  Vec3 elbow;
  Vec3 wrist;

  // True when any two of the three points coincide exactly.
  bool degenerate() const {
    return shoulder == elbow || elbow == wrist || shoulder == wrist;
  }

  friend bool operator==(const PoseTriplet&, const PoseTriplet&) = default;
};

}  // namespace cello
