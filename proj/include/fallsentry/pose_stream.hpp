#pragma once

// Landmark stream data model and its JSONL file format.
//
//   {"type":"header","width":640,"height":480,"fps":30.0,"source":"..."}
//   {"type":"frame","index":0,"landmarks":[[x,y,vis], ... 33 entries]}
//   {"type":"frame","index":1,"landmarks":null}
//
// Coordinates are pixels (x right, y down). A null landmark list marks a
// frame where the estimator found no pose; such frames are kept so frame
// counts match the source video. Indices are consecutive.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fallsentry/detail/text.hpp"
#include "fallsentry/error.hpp"

namespace fallsentry {

inline constexpr std::size_t kLandmarkCount = 33;

// 33-point pose topology of the upstream estimator.
enum class KeypointId : std::uint8_t {
  NOSE = 0,
  LEFT_EYE_INNER = 1,
  LEFT_EYE = 2,
  LEFT_EYE_OUTER = 3,
  RIGHT_EYE_INNER = 4,
  RIGHT_EYE = 5,
  RIGHT_EYE_OUTER = 6,
  LEFT_EAR = 7,
  RIGHT_EAR = 8,
  MOUTH_LEFT = 9,
  MOUTH_RIGHT = 10,
  LEFT_SHOULDER = 11,
  RIGHT_SHOULDER = 12,
  LEFT_ELBOW = 13,
  RIGHT_ELBOW = 14,
  LEFT_WRIST = 15,
  RIGHT_WRIST = 16,
  LEFT_PINKY = 17,
  RIGHT_PINKY = 18,
  LEFT_INDEX = 19,
  RIGHT_INDEX = 20,
  LEFT_THUMB = 21,
  RIGHT_THUMB = 22,
  LEFT_HIP = 23,
  RIGHT_HIP = 24,
  LEFT_KNEE = 25,
  RIGHT_KNEE = 26,
  LEFT_ANKLE = 27,
  RIGHT_ANKLE = 28,
  LEFT_HEEL = 29,
  RIGHT_HEEL = 30,
  LEFT_FOOT_INDEX = 31,
  RIGHT_FOOT_INDEX = 32,
};

inline constexpr std::size_t index_of(KeypointId id) noexcept {
  return static_cast<std::size_t>(id);
}

struct LandmarkPoint {
  double x = 0.0;
  double y = 0.0;
  double visibility = 0.0;

  bool operator==(const LandmarkPoint&) const = default;
};

using Landmarks = std::array<LandmarkPoint, kLandmarkCount>;

struct StreamHeader {
  std::int64_t width = 640;
  std::int64_t height = 480;
  double fps = 30.0;
  std::string source;

  bool operator==(const StreamHeader&) const = default;
};

struct PoseFrame {
  std::int64_t index = 0;
  std::optional<Landmarks> landmarks;

  bool has_pose() const noexcept { return landmarks.has_value(); }

  // Precondition: has_pose().
  const LandmarkPoint& at(KeypointId id) const { return (*landmarks)[index_of(id)]; }

  bool operator==(const PoseFrame&) const = default;
};

struct PoseStream {
  StreamHeader header;
  std::vector<PoseFrame> frames;

  bool operator==(const PoseStream&) const = default;
};

namespace detail {

inline std::string at_line(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

inline void check_header(const StreamHeader& h, ErrorCode code, const std::string& where) {
  if (h.width <= 0 || h.height <= 0) {
    throw Error(code, where + "width and height must be positive");
  }
  if (!std::isfinite(h.fps) || h.fps <= 0.0) {
    throw Error(code, where + "fps must be a positive number");
  }
}

inline void check_landmark(const LandmarkPoint& p, std::size_t k, ErrorCode code,
                           const std::string& where) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw Error(code, where + "landmark " + std::to_string(k) + " has a non-finite coordinate");
  }
  if (!(p.visibility >= 0.0 && p.visibility <= 1.0)) {
    throw Error(code, where + "landmark " + std::to_string(k) + " visibility outside [0,1]");
  }
}

// Consecutive-index rule shared by reader and writer.
inline void check_index(std::int64_t index, const std::optional<std::int64_t>& previous,
                        ErrorCode code, const std::string& where) {
  if (index < 0) {
    throw Error(code, where + "frame index must be >= 0");
  }
  if (previous && index != *previous + 1) {
    throw Error(code, where + "frame index " + std::to_string(index) + " does not follow " +
                          std::to_string(*previous));
  }
}

inline double number_field(const nlohmann::json& j, const std::string& where,
                           const char* what) {
  if (!j.is_number()) {
    throw Error(ErrorCode::MalformedRecord, where + what + " must be a number");
  }
  return j.get<double>();
}

inline std::int64_t integer_field(const nlohmann::json& obj, const char* key,
                                  const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::MalformedRecord, where + "'" + key + "' must be an integer");
  }
  return it->get<std::int64_t>();
}

inline StreamHeader parse_header(const nlohmann::json& obj, const std::string& where) {
  StreamHeader h;
  h.width = integer_field(obj, "width", where);
  h.height = integer_field(obj, "height", where);
  auto fps = obj.find("fps");
  if (fps == obj.end()) throw Error(ErrorCode::MalformedRecord, where + "missing 'fps'");
  h.fps = number_field(*fps, where, "'fps'");
  auto source = obj.find("source");
  if (source == obj.end() || !source->is_string()) {
    throw Error(ErrorCode::MalformedRecord, where + "'source' must be a string");
  }
  h.source = source->get<std::string>();
  check_header(h, ErrorCode::MalformedRecord, where);
  return h;
}

inline PoseFrame parse_frame(const nlohmann::json& obj, const std::string& where) {
  PoseFrame frame;
  frame.index = integer_field(obj, "index", where);
  auto lm = obj.find("landmarks");
  if (lm == obj.end()) throw Error(ErrorCode::MalformedRecord, where + "missing 'landmarks'");
  if (lm->is_null()) return frame;
  if (!lm->is_array() || lm->size() != kLandmarkCount) {
    throw Error(ErrorCode::MalformedRecord,
                where + "'landmarks' must be null or a list of exactly 33 points");
  }
  Landmarks points{};
  for (std::size_t k = 0; k < kLandmarkCount; ++k) {
    const auto& p = (*lm)[k];
    if (!p.is_array() || p.size() != 3) {
      throw Error(ErrorCode::MalformedRecord,
                  where + "landmark " + std::to_string(k) + " must be [x,y,visibility]");
    }
    points[k] = {number_field(p[0], where, "x"), number_field(p[1], where, "y"),
                 number_field(p[2], where, "visibility")};
    check_landmark(points[k], k, ErrorCode::MalformedRecord, where);
  }
  frame.landmarks = points;
  return frame;
}

}  // namespace detail

/// Parses a landmark stream. Throws MissingHeader when the first record is
/// not a header and MalformedRecord (with the 1-based line number) for any
/// other defect.
inline PoseStream parse_stream(std::string_view bytes) {
  const auto lines = detail::split_lines(bytes);
  PoseStream out;
  std::optional<std::int64_t> previous;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = detail::at_line(i + 1);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(i == 0 ? ErrorCode::MissingHeader : ErrorCode::MalformedRecord,
                  where + "invalid JSON (" + e.what() + ")");
    }
    const auto type = obj.is_object() ? obj.find("type") : obj.end();
    const bool typed = obj.is_object() && type != obj.end() && type->is_string();
    if (i == 0) {
      if (!typed || *type != "header") {
        throw Error(ErrorCode::MissingHeader, where + "first record must be a header");
      }
      out.header = detail::parse_header(obj, where);
      continue;
    }
    if (!typed || *type != "frame") {
      throw Error(ErrorCode::MalformedRecord, where + "expected a frame record");
    }
    PoseFrame frame = detail::parse_frame(obj, where);
    detail::check_index(frame.index, previous, ErrorCode::MalformedRecord, where);
    previous = frame.index;
    out.frames.push_back(std::move(frame));
  }
  if (lines.empty()) {
    throw Error(ErrorCode::MissingHeader, "empty input");
  }
  return out;
}

/// Serializes a stream. Throws InvariantViolation if the header or any frame
/// breaks the format rules, so everything written parses back.
inline std::string write_stream(const StreamHeader& header, std::span<const PoseFrame> frames) {
  using ojson = nlohmann::ordered_json;
  detail::check_header(header, ErrorCode::InvariantViolation, "header: ");

  std::string out;
  ojson h;
  h["type"] = "header";
  h["width"] = header.width;
  h["height"] = header.height;
  h["fps"] = header.fps;
  h["source"] = header.source;
  out += h.dump();
  out += '\n';

  std::optional<std::int64_t> previous;
  for (const auto& frame : frames) {
    const std::string where = "frame " + std::to_string(frame.index) + ": ";
    detail::check_index(frame.index, previous, ErrorCode::InvariantViolation, where);
    previous = frame.index;
    ojson rec;
    rec["type"] = "frame";
    rec["index"] = frame.index;
    if (frame.landmarks) {
      ojson points = ojson::array();
      for (std::size_t k = 0; k < kLandmarkCount; ++k) {
        const auto& p = (*frame.landmarks)[k];
        detail::check_landmark(p, k, ErrorCode::InvariantViolation, where);
        points.push_back(ojson::array({p.x, p.y, p.visibility}));
      }
      rec["landmarks"] = std::move(points);
    } else {
      rec["landmarks"] = nullptr;
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

inline std::string write_stream(const PoseStream& stream) {
  return write_stream(stream.header, stream.frames);
}

inline PoseStream read_stream_file(const std::filesystem::path& path) {
  return parse_stream(detail::read_file(path));
}

inline void write_stream_file(const std::filesystem::path& path, const PoseStream& stream) {
  detail::write_file(path, write_stream(stream));
}

}  // namespace fallsentry
