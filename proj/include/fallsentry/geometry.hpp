#pragma once

// Handcrafted geometric quantities: head displacement, head angle,
// nose-to-ankle distance and its percentage change.

#include <cmath>
#include <numbers>
#include <optional>

#include "fallsentry/error.hpp"
#include "fallsentry/pose_stream.hpp"

namespace fallsentry {

inline constexpr double kDefaultVisibilityMin = 0.5;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline constexpr Point to_point(const LandmarkPoint& p) noexcept { return {p.x, p.y}; }

/// Per-frame features. Each is absent when its inputs were not usable.
struct FeatureValues {
  std::optional<double> head_angle_deg;  // [0, 180]
  std::optional<double> dist_ankle_px;   // >= 0
  std::optional<double> pct_change;      // percent, >= -100

  bool operator==(const FeatureValues&) const = default;
};

inline double euclidean(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

/// A landmark is usable when the frame has a pose and the landmark's
/// visibility reaches `visibility_min`.
inline std::optional<Point> usable_point(const PoseFrame& frame, KeypointId id,
                                         double visibility_min = kDefaultVisibilityMin) {
  if (!frame.has_pose()) return std::nullopt;
  const auto& p = frame.at(id);
  if (p.visibility < visibility_min) return std::nullopt;
  return to_point(p);
}

/// The topology has no neck keypoint; the shoulder midpoint stands in for it.
inline std::optional<Point> neck_point(const PoseFrame& frame,
                                       double visibility_min = kDefaultVisibilityMin) {
  const auto left = usable_point(frame, KeypointId::LEFT_SHOULDER, visibility_min);
  const auto right = usable_point(frame, KeypointId::RIGHT_SHOULDER, visibility_min);
  if (!left || !right) return std::nullopt;
  return Point{(left->x + right->x) / 2.0, (left->y + right->y) / 2.0};
}

/// |atan2(dy, dx)| of the neck-to-nose vector, in degrees. Image y grows
/// downward, so an upright head reads about 90 and a lying one near 0 or 180.
inline double head_angle(Point nose, Point neck) {
  const double dx = nose.x - neck.x;
  const double dy = nose.y - neck.y;
  if (dx == 0.0 && dy == 0.0) {
    throw Error(ErrorCode::DegeneratePoints, "nose and neck coincide");
  }
  return std::abs(std::atan2(dy, dx)) * (180.0 / std::numbers::pi);
}

inline double nose_ankle_distance(Point nose, Point left_ankle) noexcept {
  return euclidean(nose, left_ankle);
}

/// 100 * (d_ankle - d_initial) / d_initial, evaluated through the ratio so
/// that equal distances give exactly 0 and a zero distance exactly -100.
inline double percentage_change(double d_ankle, double d_initial) {
  if (!(d_initial > 0.0)) {
    throw Error(ErrorCode::ZeroBaseline, "baseline distance must be positive");
  }
  return 100.0 * (d_ankle / d_initial - 1.0);
}

inline double head_displacement(Point initial, Point current) noexcept {
  return euclidean(initial, current);
}

}  // namespace fallsentry
