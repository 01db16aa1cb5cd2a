#pragma once

// Frame- and video-level comparison of detector output against ground truth.
//
// Ground truth CSV:
//   stream_id,level,frame,label
//   video01,frame,0,0
//   video01,frame,1,1
//   video02,video,,1

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fallsentry/detail/text.hpp"
#include "fallsentry/error.hpp"
#include "fallsentry/fall_detector.hpp"

namespace fallsentry {

enum class LabelLevel { FRAME, VIDEO };

inline constexpr std::string_view to_string(LabelLevel level) noexcept {
  return level == LabelLevel::FRAME ? "frame" : "video";
}

struct GroundTruthLabels {
  std::string stream_id;
  // Per-frame labels, or one label for the whole video.
  std::variant<std::map<std::int64_t, bool>, bool> labels;

  LabelLevel level() const noexcept {
    return labels.index() == 0 ? LabelLevel::FRAME : LabelLevel::VIDEO;
  }

  bool operator==(const GroundTruthLabels&) const = default;
};

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

  void add(bool predicted, bool actual) noexcept {
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity;  // absent when tp + fn == 0
  std::optional<double> specificity;  // absent when tn + fp == 0

  bool operator==(const Metrics&) const = default;
};

/// FRAME level compares each result's fall flag with its frame label; labels
/// for frames without a result are ignored. VIDEO level predicts a fall when
/// any frame is flagged and contributes a single unit.
inline ConfusionMatrix confuse(std::span<const FrameResult> results,
                               const GroundTruthLabels& truth) {
  ConfusionMatrix cm;
  if (const auto* frames = std::get_if<std::map<std::int64_t, bool>>(&truth.labels)) {
    for (const auto& r : results) {
      auto it = frames->find(r.index);
      if (it == frames->end()) {
        throw Error(ErrorCode::MissingLabel, "stream '" + truth.stream_id + "' has no label for frame " +
                                                 std::to_string(r.index));
      }
      cm.add(r.fall, it->second);
    }
    return cm;
  }
  if (results.empty()) {
    throw Error(ErrorCode::EmptyResults, "stream '" + truth.stream_id + "' has no results");
  }
  bool predicted = false;
  for (const auto& r : results) predicted = predicted || r.fall;
  cm.add(predicted, std::get<bool>(truth.labels));
  return cm;
}

inline Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fn > 0) {
    m.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  if (cm.tn + cm.fp > 0) {
    m.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
  }
  return m;
}

inline std::string metrics_record(std::string_view stream_id, const ConfusionMatrix& cm,
                                  const Metrics& m) {
  nlohmann::ordered_json rec;
  rec["stream_id"] = std::string(stream_id);
  rec["tp"] = cm.tp;
  rec["fp"] = cm.fp;
  rec["tn"] = cm.tn;
  rec["fn"] = cm.fn;
  rec["accuracy"] = m.accuracy;
  rec["sensitivity"] = detail::optional_number(m.sensitivity);
  rec["specificity"] = detail::optional_number(m.specificity);
  return rec.dump();
}

namespace detail {

inline std::vector<std::string_view> split_csv_row(std::string_view row) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = row.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(row.substr(start));
      return cells;
    }
    cells.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
}

inline bool parse_label(std::string_view cell, const std::string& where) {
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  throw Error(ErrorCode::MalformedRecord, where + "label must be 0 or 1");
}

}  // namespace detail

/// Parses the ground-truth CSV into one entry per (stream_id, level), in
/// order of first appearance.
inline std::vector<GroundTruthLabels> parse_truth_csv(std::string_view bytes) {
  const auto lines = detail::split_lines(bytes);
  if (lines.empty() || lines[0] != "stream_id,level,frame,label") {
    throw Error(ErrorCode::MalformedRecord, "line 1: expected header 'stream_id,level,frame,label'");
  }
  std::vector<GroundTruthLabels> out;
  auto find_entry = [&out](std::string_view id, LabelLevel level) -> GroundTruthLabels* {
    for (auto& e : out) {
      if (e.stream_id == id && e.level() == level) return &e;
    }
    return nullptr;
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = detail::at_line(i + 1);
    const auto cells = detail::split_csv_row(lines[i]);
    if (cells.size() != 4) throw Error(ErrorCode::MalformedRecord, where + "expected 4 columns");
    const std::string_view id = cells[0];
    if (id.empty()) throw Error(ErrorCode::MalformedRecord, where + "empty stream_id");
    const bool label = detail::parse_label(cells[3], where);

    if (cells[1] == "video") {
      if (!cells[2].empty()) {
        throw Error(ErrorCode::MalformedRecord, where + "video rows leave 'frame' empty");
      }
      if (find_entry(id, LabelLevel::VIDEO)) {
        throw Error(ErrorCode::MalformedRecord, where + "duplicate video label");
      }
      out.push_back({std::string(id), label});
    } else if (cells[1] == "frame") {
      std::int64_t frame = -1;
      auto [ptr, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), frame);
      if (ec != std::errc{} || ptr != cells[2].data() + cells[2].size() || frame < 0) {
        throw Error(ErrorCode::MalformedRecord, where + "frame must be an integer >= 0");
      }
      GroundTruthLabels* entry = find_entry(id, LabelLevel::FRAME);
      if (!entry) {
        out.push_back({std::string(id), std::map<std::int64_t, bool>{}});
        entry = &out.back();
      }
      auto& frames = std::get<std::map<std::int64_t, bool>>(entry->labels);
      if (!frames.emplace(frame, label).second) {
        throw Error(ErrorCode::MalformedRecord, where + "duplicate label for frame " +
                                                    std::to_string(frame));
      }
    } else {
      throw Error(ErrorCode::MalformedRecord, where + "level must be 'frame' or 'video'");
    }
  }
  return out;
}

inline std::string write_truth_csv(std::span<const GroundTruthLabels> truth) {
  std::string out = "stream_id,level,frame,label\n";
  for (const auto& t : truth) {
    if (const auto* frames = std::get_if<std::map<std::int64_t, bool>>(&t.labels)) {
      for (const auto& [frame, label] : *frames) {
        out += t.stream_id + ",frame," + std::to_string(frame) + (label ? ",1\n" : ",0\n");
      }
    } else {
      out += t.stream_id + ",video," + (std::get<bool>(t.labels) ? ",1\n" : ",0\n");
    }
  }
  return out;
}

}  // namespace fallsentry
