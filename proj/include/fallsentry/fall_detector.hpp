#pragma once

// Threshold fall detector. The first frame with a usable nose fixes the
// initial head position; every later frame is a fall when the nose lies
// strictly farther than `threshold_px` from it. The anchor is never reset.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallsentry/detail/text.hpp"
#include "fallsentry/error.hpp"
#include "fallsentry/geometry.hpp"
#include "fallsentry/pose_stream.hpp"

namespace fallsentry {

inline constexpr double kDefaultThresholdPx = 95.0;

struct DetectorConfig {
  double threshold_px = kDefaultThresholdPx;
  double visibility_min = kDefaultVisibilityMin;

  void validate() const {
    if (!std::isfinite(threshold_px) || threshold_px <= 0.0) {
      throw Error(ErrorCode::InvalidConfig, "threshold_px must be a positive number");
    }
    if (!(visibility_min >= 0.0 && visibility_min <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "visibility_min must lie in [0,1]");
    }
  }
};

struct DetectorState {
  std::optional<Point> initial_head;
  std::optional<double> d_initial;
  std::optional<std::int64_t> calibration_frame;
  // Highest frame index stepped so far, including frames without a pose.
  std::optional<std::int64_t> last_index;

  bool calibrated() const noexcept { return initial_head.has_value(); }

  bool operator==(const DetectorState&) const = default;
};

// Red and green frame borders of the annotated video, as labels.
enum class Annotation { RED_FALL, GREEN_NO_FALL };

inline constexpr std::string_view to_string(Annotation a) noexcept {
  return a == Annotation::RED_FALL ? "RED_FALL" : "GREEN_NO_FALL";
}

struct FrameResult {
  std::int64_t index = 0;
  bool fall = false;
  std::optional<double> displacement_px;
  FeatureValues features;
  Annotation annotation = Annotation::GREEN_NO_FALL;

  bool operator==(const FrameResult&) const = default;
};

struct StepOutput {
  DetectorState state;
  FrameResult result;
};

inline DetectorState detector_new(const DetectorConfig& config) {
  config.validate();
  return {};
}

inline StepOutput step(const DetectorState& state, const PoseFrame& frame,
                       const DetectorConfig& config) {
  config.validate();
  if (state.last_index && frame.index <= *state.last_index) {
    throw Error(ErrorCode::OutOfOrderFrame, "frame " + std::to_string(frame.index) +
                                                " does not follow " +
                                                std::to_string(*state.last_index));
  }

  StepOutput out{state, {}};
  out.state.last_index = frame.index;
  FrameResult& r = out.result;
  r.index = frame.index;

  const auto nose = usable_point(frame, KeypointId::NOSE, config.visibility_min);
  if (!nose) return out;

  if (const auto neck = neck_point(frame, config.visibility_min)) {
    if (!(*neck == *nose)) r.features.head_angle_deg = head_angle(*nose, *neck);
  }
  const auto ankle = usable_point(frame, KeypointId::LEFT_ANKLE, config.visibility_min);
  if (ankle) r.features.dist_ankle_px = nose_ankle_distance(*nose, *ankle);

  DetectorState& next = out.state;
  if (!next.calibrated()) {
    next.initial_head = *nose;
    next.calibration_frame = frame.index;
  }

  // The baseline frame (calibration, or the first later frame with a usable
  // ankle) reports no percentage change.
  if (next.d_initial) {
    if (r.features.dist_ankle_px) {
      r.features.pct_change = percentage_change(*r.features.dist_ankle_px, *next.d_initial);
    }
  } else if (r.features.dist_ankle_px && *r.features.dist_ankle_px > 0.0) {
    next.d_initial = *r.features.dist_ankle_px;
  }

  const double displacement = head_displacement(*next.initial_head, *nose);
  r.displacement_px = displacement;
  r.fall = displacement > config.threshold_px;
  r.annotation = r.fall ? Annotation::RED_FALL : Annotation::GREEN_NO_FALL;
  return out;
}

inline std::vector<FrameResult> run_stream(const StreamHeader& /*header*/,
                                           std::span<const PoseFrame> frames,
                                           const DetectorConfig& config) {
  DetectorState state = detector_new(config);
  std::vector<FrameResult> results;
  results.reserve(frames.size());
  for (const auto& frame : frames) {
    auto [next, result] = step(state, frame, config);
    state = std::move(next);
    results.push_back(std::move(result));
  }
  return results;
}

inline std::vector<FrameResult> run_stream(const PoseStream& stream, const DetectorConfig& config) {
  return run_stream(stream.header, stream.frames, config);
}

/// Incremental wrapper for callers that receive frames one at a time.
class FallDetector {
 public:
  explicit FallDetector(DetectorConfig config = {})
      : config_(config), state_(detector_new(config_)) {}

  FrameResult push(const PoseFrame& frame) {
    auto [next, result] = step(state_, frame, config_);
    state_ = std::move(next);
    return result;
  }

  const DetectorState& state() const noexcept { return state_; }
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  DetectorConfig config_;
  DetectorState state_;
};

// Results file: one JSON record per frame, absent values as null.

namespace detail {

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> read_optional(const nlohmann::json& obj, const char* key,
                                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::MalformedRecord, where + "missing '" + key + "'");
  if (it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    throw Error(ErrorCode::MalformedRecord, where + "'" + key + "' must be a number or null");
  }
  return it->get<double>();
}

}  // namespace detail

inline std::string write_results(std::span<const FrameResult> results) {
  std::string out;
  for (const auto& r : results) {
    nlohmann::ordered_json rec;
    rec["index"] = r.index;
    rec["fall"] = r.fall;
    rec["displacement_px"] = detail::optional_number(r.displacement_px);
    rec["head_angle_deg"] = detail::optional_number(r.features.head_angle_deg);
    rec["dist_ankle_px"] = detail::optional_number(r.features.dist_ankle_px);
    rec["pct_change"] = detail::optional_number(r.features.pct_change);
    rec["annotation"] = std::string(to_string(r.annotation));
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<FrameResult> parse_results(std::string_view bytes) {
  std::vector<FrameResult> results;
  const auto lines = detail::split_lines(bytes);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = detail::at_line(i + 1);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedRecord, where + "invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, where + "expected an object");
    FrameResult r;
    r.index = detail::integer_field(obj, "index", where);
    auto fall = obj.find("fall");
    if (fall == obj.end() || !fall->is_boolean()) {
      throw Error(ErrorCode::MalformedRecord, where + "'fall' must be a boolean");
    }
    r.fall = fall->get<bool>();
    r.displacement_px = detail::read_optional(obj, "displacement_px", where);
    r.features.head_angle_deg = detail::read_optional(obj, "head_angle_deg", where);
    r.features.dist_ankle_px = detail::read_optional(obj, "dist_ankle_px", where);
    r.features.pct_change = detail::read_optional(obj, "pct_change", where);
    auto ann = obj.find("annotation");
    if (ann == obj.end() || !ann->is_string()) {
      throw Error(ErrorCode::MalformedRecord, where + "'annotation' must be a string");
    }
    if (*ann == "RED_FALL") {
      r.annotation = Annotation::RED_FALL;
    } else if (*ann == "GREEN_NO_FALL") {
      r.annotation = Annotation::GREEN_NO_FALL;
    } else {
      throw Error(ErrorCode::MalformedRecord, where + "unknown annotation");
    }
    if (r.fall != (r.annotation == Annotation::RED_FALL)) {
      throw Error(ErrorCode::MalformedRecord, where + "'fall' disagrees with 'annotation'");
    }
    if (!results.empty() && r.index <= results.back().index) {
      throw Error(ErrorCode::MalformedRecord, where + "frame indices must increase");
    }
    results.push_back(r);
  }
  return results;
}

}  // namespace fallsentry
