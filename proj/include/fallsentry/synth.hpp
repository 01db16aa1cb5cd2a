#pragma once

// Synthetic landmark streams for testing without a dataset: a stick figure
// that falls (forward, backward, left, right) or does not (walk, sit), plus
// landmark-level degradation (Gaussian jitter and whole-frame dropout).
//
// For the fall patterns the nose moves on a straight line and its distance
// from the frame-0 nose is exactly drop_px * min(1, (t - fall_start) /
// ramp_frames) for t >= fall_start (0 before). For the no-fall patterns the
// nose never moves farther than sway_px from where it started.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallsentry/detail/text.hpp"
#include "fallsentry/error.hpp"
#include "fallsentry/geometry.hpp"
#include "fallsentry/pose_stream.hpp"

namespace fallsentry {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64/u53/box-muller";

/// Seeded source with a fully specified output sequence. The std
/// distributions are implementation-defined, so uniform and normal draws
/// are derived from the raw engine here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class SynthPattern {
  FORWARD_FALL,
  BACKWARD_FALL,
  LEFT_FALL,
  RIGHT_FALL,
  NO_FALL_WALK,
  NO_FALL_SIT,
};

inline constexpr bool is_fall(SynthPattern p) noexcept {
  return p != SynthPattern::NO_FALL_WALK && p != SynthPattern::NO_FALL_SIT;
}

inline constexpr std::string_view to_string(SynthPattern p) noexcept {
  switch (p) {
    case SynthPattern::FORWARD_FALL: return "forward-fall";
    case SynthPattern::BACKWARD_FALL: return "backward-fall";
    case SynthPattern::LEFT_FALL: return "left-fall";
    case SynthPattern::RIGHT_FALL: return "right-fall";
    case SynthPattern::NO_FALL_WALK: return "no-fall-walk";
    case SynthPattern::NO_FALL_SIT: return "no-fall-sit";
  }
  return "unknown";
}

inline std::optional<SynthPattern> pattern_from_string(std::string_view name) noexcept {
  for (auto p : {SynthPattern::FORWARD_FALL, SynthPattern::BACKWARD_FALL, SynthPattern::LEFT_FALL,
                 SynthPattern::RIGHT_FALL, SynthPattern::NO_FALL_WALK, SynthPattern::NO_FALL_SIT}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

struct SynthSpec {
  SynthPattern pattern = SynthPattern::FORWARD_FALL;
  std::int64_t frames = 100;
  std::int64_t fall_start = 30;
  double drop_px = 150.0;
  std::uint64_t seed = 0;
  std::int64_t ramp_frames = 30;
  double sway_px = 20.0;

  void validate() const {
    if (frames <= 0) throw Error(ErrorCode::InvalidSpec, "frames must be positive");
    if (pattern != SynthPattern::NO_FALL_WALK && (fall_start < 0 || fall_start >= frames)) {
      throw Error(ErrorCode::InvalidSpec, "fall_start must lie in [0, frames)");
    }
    if (!std::isfinite(drop_px) || drop_px < 0.0) {
      throw Error(ErrorCode::InvalidSpec, "drop_px must be >= 0");
    }
    if (ramp_frames <= 0) throw Error(ErrorCode::InvalidSpec, "ramp_frames must be positive");
    if (!std::isfinite(sway_px) || sway_px < 0.0) {
      throw Error(ErrorCode::InvalidSpec, "sway_px must be >= 0");
    }
  }

  std::string describe() const {
    return "synth pattern=" + std::string(to_string(pattern)) +
           " frames=" + std::to_string(frames) + " fall_start=" + std::to_string(fall_start) +
           " drop_px=" + detail::format_double(drop_px) +
           " ramp_frames=" + std::to_string(ramp_frames) +
           " sway_px=" + detail::format_double(sway_px) + " seed=" + std::to_string(seed) +
           " rng=" + std::string(kRngAlgorithm);
  }
};

struct PerturbSpec {
  double noise_sigma_px = 0.0;
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!std::isfinite(noise_sigma_px) || noise_sigma_px < 0.0) {
      throw Error(ErrorCode::InvalidSpec, "noise_sigma_px must be >= 0");
    }
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
      throw Error(ErrorCode::InvalidSpec, "dropout_prob must lie in [0,1]");
    }
  }

  std::string describe() const {
    return "perturb noise_sigma_px=" + detail::format_double(noise_sigma_px) +
           " dropout=" + detail::format_double(dropout_prob) + " seed=" + std::to_string(seed) +
           " rng=" + std::string(kRngAlgorithm);
  }
};

namespace detail {

// Standing figure facing the camera, in body units: u to image right, v up,
// origin between the heels, nose at height 1.
inline constexpr std::array<std::array<double, 2>, kLandmarkCount> kStickFigure{{
    {0.0, 1.0},                                              // nose
    {0.02, 1.03}, {0.035, 1.035}, {0.05, 1.03},              // left eye
    {-0.02, 1.03}, {-0.035, 1.035}, {-0.05, 1.03},           // right eye
    {0.07, 1.01}, {-0.07, 1.01},                             // ears
    {0.02, 0.97}, {-0.02, 0.97},                             // mouth
    {0.12, 0.86}, {-0.12, 0.86},                             // shoulders
    {0.15, 0.68}, {-0.15, 0.68},                             // elbows
    {0.16, 0.52}, {-0.16, 0.52},                             // wrists
    {0.17, 0.48}, {-0.17, 0.48},                             // pinkies
    {0.16, 0.47}, {-0.16, 0.47},                             // index fingers
    {0.14, 0.49}, {-0.14, 0.49},                             // thumbs
    {0.08, 0.52}, {-0.08, 0.52},                             // hips
    {0.08, 0.27}, {-0.08, 0.27},                             // knees
    {0.08, 0.03}, {-0.08, 0.03},                             // ankles
    {0.08, 0.0}, {-0.08, 0.0},                               // heels
    {0.1, -0.01}, {-0.1, -0.01},                             // toes
}};

inline double snap(double v) { return std::round(v * 64.0) / 64.0; }

struct FallShape {
  double crumple;     // fraction of body height lost at full progress
  double tilt_deg;    // in-plane rotation at full progress, positive tips head to image left
};

inline FallShape fall_shape(SynthPattern p) {
  switch (p) {
    case SynthPattern::FORWARD_FALL: return {0.8, 0.0};
    case SynthPattern::BACKWARD_FALL: return {0.7, 0.0};
    case SynthPattern::LEFT_FALL: return {0.6, 80.0};
    case SynthPattern::RIGHT_FALL: return {0.6, -80.0};
    default: return {0.0, 0.0};
  }
}

// Body-unit point after crumpling and tilting at the given progress.
inline std::array<double, 2> deform(std::array<double, 2> uv, FallShape shape, double progress) {
  const double u = uv[0];
  const double v = uv[1] * (1.0 - shape.crumple * progress);
  const double phi = shape.tilt_deg * progress * std::numbers::pi / 180.0;
  return {u * std::cos(phi) - v * std::sin(phi), u * std::sin(phi) + v * std::cos(phi)};
}

}  // namespace detail

inline std::vector<PoseFrame> synthesize(const SynthSpec& spec, const StreamHeader& header) {
  spec.validate();
  Rng rng(spec.seed);

  const double w = static_cast<double>(header.width);
  const double h = static_cast<double>(header.height);
  const double body = detail::snap(0.45 * h * (0.9 + 0.2 * rng.uniform()));
  const double anchor_x = detail::snap(w * (0.35 + 0.3 * rng.uniform()));
  const double anchor_y = detail::snap(0.88 * h);
  const double walk_period = 20.0 + std::floor(20.0 * rng.uniform());
  const double walk_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const Point nose0{anchor_x, anchor_y - body};

  detail::FallShape shape = detail::fall_shape(spec.pattern);
  double path_dx = 0.0;
  double path_dy = 0.0;
  if (is_fall(spec.pattern)) {
    const auto end = detail::deform(detail::kStickFigure[0], shape, 1.0);
    const double ex = anchor_x + body * end[0] - nose0.x;
    const double ey = anchor_y - body * end[1] - nose0.y;
    const double len = std::sqrt(ex * ex + ey * ey);
    path_dx = ex / len;
    path_dy = ey / len;
  } else if (spec.pattern == SynthPattern::NO_FALL_SIT) {
    shape.crumple = std::min(0.5, spec.sway_px / body);
    path_dy = 1.0;
  }

  std::vector<PoseFrame> frames;
  frames.reserve(static_cast<std::size_t>(spec.frames));
  for (std::int64_t t = 0; t < spec.frames; ++t) {
    double progress = 0.0;
    if (spec.pattern != SynthPattern::NO_FALL_WALK && t > spec.fall_start) {
      progress = std::min<double>(1.0, static_cast<double>(t - spec.fall_start) /
                                           static_cast<double>(spec.ramp_frames));
    }
    const double travel = is_fall(spec.pattern) ? spec.drop_px : spec.sway_px;
    // Multiply before dividing so round numbers (150 * 19 / 30) stay exact.
    double along = 0.0;
    if (progress >= 1.0) {
      along = travel;
    } else if (progress > 0.0) {
      along = travel * static_cast<double>(t - spec.fall_start) /
              static_cast<double>(spec.ramp_frames);
    }

    Point nose{nose0.x + along * path_dx, nose0.y + along * path_dy};
    double lean = 0.0;
    if (spec.pattern == SynthPattern::NO_FALL_WALK) {
      lean = walk_sign * spec.sway_px *
             std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / walk_period);
      nose = {nose0.x + lean, nose0.y};
    }

    const auto deformed_nose = detail::deform(detail::kStickFigure[0], shape, progress);
    Landmarks points{};
    for (std::size_t k = 0; k < kLandmarkCount; ++k) {
      auto uv = detail::deform(detail::kStickFigure[k], shape, progress);
      if (spec.pattern == SynthPattern::NO_FALL_WALK && (k == 25 || k == 27 || k == 29 || k == 31)) {
        uv[0] += 0.04 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / walk_period);
      }
      const double jx = k == 0 ? 0.0 : rng.uniform() - 0.5;
      const double jy = k == 0 ? 0.0 : rng.uniform() - 0.5;
      points[k] = {nose.x + body * (uv[0] - deformed_nose[0]) + jx,
                   nose.y - body * (uv[1] - deformed_nose[1]) + jy, 1.0};
    }
    points[0] = {nose.x, nose.y, 1.0};
    frames.push_back({t, points});
  }
  return frames;
}

inline PoseStream synthesize_stream(const SynthSpec& spec, StreamHeader header) {
  header.source = spec.describe();
  auto frames = synthesize(spec, header);
  return {std::move(header), std::move(frames)};
}

/// Per frame: with probability dropout_prob the pose is dropped; otherwise
/// every landmark's x and y get independent N(0, sigma^2) offsets. Draws are
/// taken in frame order, so output depends only on (frames, spec).
inline std::vector<PoseFrame> perturb(std::span<const PoseFrame> frames, const PerturbSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<PoseFrame> out(frames.begin(), frames.end());
  for (auto& frame : out) {
    const bool drop = rng.uniform() < spec.dropout_prob;
    if (!frame.landmarks) continue;
    if (drop) {
      frame.landmarks.reset();
      continue;
    }
    if (spec.noise_sigma_px == 0.0) continue;
    for (auto& p : *frame.landmarks) {
      p.x += spec.noise_sigma_px * rng.normal();
      p.y += spec.noise_sigma_px * rng.normal();
    }
  }
  return out;
}

inline PoseStream perturb_stream(const PoseStream& stream, const PerturbSpec& spec) {
  PoseStream out{stream.header, perturb(stream.frames, spec)};
  out.header.source = stream.header.source.empty()
                          ? spec.describe()
                          : stream.header.source + " | " + spec.describe();
  return out;
}

}  // namespace fallsentry
