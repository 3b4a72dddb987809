// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stnormal/detector.hpp"
#include "stnormal/params.hpp"
#include "stnormal/types.hpp"

namespace stnormal {

/// Confusion counts for the dynamic class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  /// No dynamic point in either prediction or truth.
  bool vacuous() const { return tp + fp + fn == 0; }
  /// TP / (TP + FP + FN); 1.0 when vacuous.
  double iou() const;

  ConfusionCounts& operator+=(const ConfusionCounts& other);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct FrameEval {
  std::int64_t frame_index = 0;
  ConfusionCounts counts;
  std::size_t excluded_by_range = 0;
};

struct EvalReport {
  std::vector<FrameEval> frames;
  ConfusionCounts total;
  std::size_t excluded_by_range = 0;
  std::optional<double> range_limit;
  std::vector<StageTimings> timings;  // one entry per classified frame

  bool no_frames_evaluated() const { return frames.empty(); }
  double iou() const { return total.iou(); }
  bool vacuous() const { return total.vacuous(); }

  /// Appends another partial report (frames, counts and timings).
  void merge(const EvalReport& other);
};

/// Single-frame IoU. Points whose range exceeds `range_limit` are left out of
/// every count. Throws std::invalid_argument on length mismatches or when a
/// range limit is given without ranges.
EvalReport compute_iou(std::span<const Label> predicted, std::span<const Label> truth,
                       std::span<const double> ranges = {},
                       std::optional<double> range_limit = std::nullopt,
                       std::int64_t frame_index = 0);

/// Distance of every point from `origin`.
std::vector<double> point_ranges(const Cloud& cloud, const Eigen::Vector3d& origin);

struct SequenceFrame {
  Cloud cloud;  // full resolution, world frame
  std::optional<std::vector<Label>> truth;
  Eigen::Vector3d sensor_origin = Eigen::Vector3d::Zero();
};

struct EvalOptions {
  double upsample_radius = 0.5;
  std::optional<double> range_limit;
  IndexStrategy strategy = IndexStrategy::kPerCloud;
  std::size_t threads = 0;
};

struct FrameOutput {
  std::int64_t frame_index = 0;
  std::vector<ScoredPoint> scored;  // downsampled target cloud
  std::vector<Label> full_labels;   // upsampled to the full-resolution cloud
  std::optional<FrameEval> eval;
};

/// Streaming form of run_sequence: frames in, classified frames out N pushes later.
class SequenceEvaluator {
 public:
  SequenceEvaluator(const Params& params, EvalOptions options);

  std::optional<FrameOutput> push(SequenceFrame frame);

  const EvalReport& report() const { return report_; }
  const Detector& detector() const { return detector_; }

 private:
  Detector detector_;
  EvalOptions options_;
  std::deque<SequenceFrame> pending_;
  EvalReport report_;
};

struct SequenceResult {
  EvalReport report;
  std::vector<FrameOutput> frames;
};

/// downsample -> push -> classify -> upsample -> IoU over a whole sequence.
/// Warm-up and tail frames that never reach the window centre are not evaluated.
SequenceResult run_sequence(std::span<const SequenceFrame> sequence, const Params& params,
                            const EvalOptions& options = {});

struct StageStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchFrame {
  std::int64_t frame_index = 0;
  std::size_t raw_points = 0;
  std::size_t downsampled_points = 0;
  std::vector<StageTimings> repetitions;
};

struct BenchReport {
  std::size_t repetitions = 0;
  double frame_period_ms = 0.0;
  std::vector<BenchFrame> frames;  // classified frames only
  StageStats downsample, index, score, total;
  std::vector<std::int64_t> over_budget;  // frames whose median total exceeds the period
};

/// Times the detection pipeline over `sequence` `repetitions` times, each run
/// on a fresh detector. Statistics cover classified (steady-state) frames.
BenchReport bench(std::span<const Cloud> sequence, const Params& params, std::size_t repetitions,
                  double frame_rate, IndexStrategy strategy = IndexStrategy::kPerCloud,
                  std::size_t threads = 0);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_report_text(std::ostream& os, const EvalReport& report, const ConfigEcho& config = {});
/// One `metric=value` per line.
void write_metrics(std::ostream& os, const EvalReport& report, const ConfigEcho& config = {});
void write_bench_text(std::ostream& os, const BenchReport& report, const ConfigEcho& config = {});
void write_bench_metrics(std::ostream& os, const BenchReport& report);

}  // namespace stnormal
