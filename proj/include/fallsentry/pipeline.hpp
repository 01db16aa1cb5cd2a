#pragma once

// parse -> detect -> emit, for one stream or a batch of stream files.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fallsentry/detail/text.hpp"
#include "fallsentry/fall_detector.hpp"
#include "fallsentry/pose_stream.hpp"

namespace fallsentry {

struct RunReport {
  std::string stream_id;
  std::size_t frames_total = 0;
  std::size_t frames_fall = 0;
  std::optional<std::int64_t> first_fall_index;
  std::vector<std::filesystem::path> outputs;

  bool operator==(const RunReport&) const = default;
};

inline RunReport summarize(std::string stream_id, std::span<const FrameResult> results) {
  RunReport report;
  report.stream_id = std::move(stream_id);
  report.frames_total = results.size();
  for (const auto& r : results) {
    if (!r.fall) continue;
    ++report.frames_fall;
    if (!report.first_fall_index) report.first_fall_index = r.index;
  }
  return report;
}

struct ProcessedStream {
  std::vector<FrameResult> results;
  RunReport report;
};

inline ProcessedStream process_stream(const PoseStream& stream, const DetectorConfig& config,
                                      std::string stream_id = {}) {
  ProcessedStream out;
  out.results = run_stream(stream, config);
  out.report = summarize(std::move(stream_id), out.results);
  return out;
}

inline ProcessedStream process_stream(std::string_view bytes, const DetectorConfig& config,
                                      std::string stream_id = {}) {
  return process_stream(parse_stream(bytes), config, std::move(stream_id));
}

// Plot data for the head angle, ankle distance and percentage change curves.
struct CurveRow {
  std::int64_t frame = 0;
  std::optional<double> head_angle_deg;
  std::optional<double> dist_ankle_px;
  std::optional<double> pct_change;
  std::optional<double> displacement_px;
  bool fall = false;

  bool operator==(const CurveRow&) const = default;
};

inline std::vector<CurveRow> emit_curves(std::span<const FrameResult> results) {
  std::vector<CurveRow> rows;
  rows.reserve(results.size());
  for (const auto& r : results) {
    rows.push_back({r.index, r.features.head_angle_deg, r.features.dist_ankle_px,
                    r.features.pct_change, r.displacement_px, r.fall});
  }
  return rows;
}

inline std::string write_curves_csv(std::span<const CurveRow> rows) {
  auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_double(*v) : std::string{};
  };
  std::string out = "frame,head_angle_deg,dist_ankle_px,pct_change,displacement_px,fall\n";
  for (const auto& row : rows) {
    out += std::to_string(row.frame) + ',' + cell(row.head_angle_deg) + ',' +
           cell(row.dist_ankle_px) + ',' + cell(row.pct_change) + ',' +
           cell(row.displacement_px) + ',' + (row.fall ? '1' : '0') + '\n';
  }
  return out;
}

/// Stream id used in reports and for matching ground truth: the file name
/// without ".jsonl" and then without ".results".
inline std::string stream_id_from_path(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (std::string_view suffix : {std::string_view(".jsonl"), std::string_view(".results")}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.erase(name.size() - suffix.size());
    }
  }
  return name;
}

struct StreamJob {
  std::filesystem::path input;
  std::optional<std::filesystem::path> results_path;
  std::optional<std::filesystem::path> curves_path;
};

/// Runs one job end to end and writes whichever outputs it names.
inline ProcessedStream process_file(const StreamJob& job, const DetectorConfig& config) {
  ProcessedStream out =
      process_stream(read_stream_file(job.input), config, stream_id_from_path(job.input));
  if (job.results_path) {
    detail::write_file(*job.results_path, write_results(out.results));
    out.report.outputs.push_back(*job.results_path);
  }
  if (job.curves_path) {
    detail::write_file(*job.curves_path, write_curves_csv(emit_curves(out.results)));
    out.report.outputs.push_back(*job.curves_path);
  }
  return out;
}

struct BatchOutcome {
  std::optional<ProcessedStream> processed;
  std::string error;  // empty on success
};

/// Processes independent streams on up to `jobs` threads. Each job owns its
/// detector state and output files; outcomes come back in job order.
inline std::vector<BatchOutcome> process_batch(std::span<const StreamJob> batch,
                                               const DetectorConfig& config, unsigned jobs = 1) {
  config.validate();
  std::vector<BatchOutcome> outcomes(batch.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) {
      try {
        outcomes[i].processed = process_file(batch[i], config);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(batch.size())));
  std::vector<std::jthread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  return outcomes;
}

}  // namespace fallsentry
