// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

#include "stnormal/scoring.hpp"

namespace stnormal {

double ConfusionCounts::iou() const {
  if (vacuous()) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

void EvalReport::merge(const EvalReport& other) {
  frames.insert(frames.end(), other.frames.begin(), other.frames.end());
  timings.insert(timings.end(), other.timings.begin(), other.timings.end());
  total += other.total;
  excluded_by_range += other.excluded_by_range;
  if (!range_limit) range_limit = other.range_limit;
}

EvalReport compute_iou(std::span<const Label> predicted, std::span<const Label> truth,
                       std::span<const double> ranges, std::optional<double> range_limit,
                       std::int64_t frame_index) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("label length mismatch: " + std::to_string(predicted.size()) +
                                " predicted vs " + std::to_string(truth.size()) + " truth");
  }
  if (range_limit && ranges.size() != truth.size()) {
    throw std::invalid_argument("range limit requires one range per point");
  }
  FrameEval frame;
  frame.frame_index = frame_index;
  auto& c = frame.counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (range_limit && ranges[i] > *range_limit) {
      ++frame.excluded_by_range;
      continue;
    }
    const bool p = predicted[i] == Label::kDynamic;
    const bool t = truth[i] == Label::kDynamic;
    if (p && t) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (t) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  EvalReport report;
  report.range_limit = range_limit;
  report.total = frame.counts;
  report.excluded_by_range = frame.excluded_by_range;
  report.frames.push_back(frame);
  return report;
}

std::vector<double> point_ranges(const Cloud& cloud, const Eigen::Vector3d& origin) {
  std::vector<double> out;
  out.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.push_back((p.xyz() - origin).norm());
  return out;
}

SequenceEvaluator::SequenceEvaluator(const Params& params, EvalOptions options)
    : detector_(params, options.strategy, options.threads), options_(std::move(options)) {
  check_radius(options_.upsample_radius);
  report_.range_limit = options_.range_limit;
}

std::optional<FrameOutput> SequenceEvaluator::push(SequenceFrame frame) {
  if (frame.truth && frame.truth->size() != frame.cloud.points.size()) {
    throw std::invalid_argument("frame " + std::to_string(frame.cloud.frame_index) +
                                ": truth labels do not match the point count");
  }
  pending_.push_back(std::move(frame));
  std::optional<FrameResult> result = detector_.process(pending_.back().cloud);
  if (!result) return std::nullopt;

  while (!pending_.empty() && pending_.front().cloud.frame_index < result->target.frame_index) {
    pending_.pop_front();
  }
  const SequenceFrame& source = pending_.front();

  FrameOutput out;
  out.frame_index = result->target.frame_index;
  const Classification parts = partition(result->scored);
  out.full_labels = upsample_labels(source.cloud, parts.dynamic_points, options_.upsample_radius);
  out.scored = std::move(result->scored);
  report_.timings.push_back(result->timings);

  if (source.truth) {
    const std::vector<double> ranges =
        options_.range_limit ? point_ranges(source.cloud, source.sensor_origin)
                             : std::vector<double>{};
    EvalReport frame_report = compute_iou(out.full_labels, *source.truth, ranges,
                                          options_.range_limit, out.frame_index);
    out.eval = frame_report.frames.front();
    frame_report.timings.clear();
    report_.merge(frame_report);
  }
  pending_.pop_front();
  return out;
}

SequenceResult run_sequence(std::span<const SequenceFrame> sequence, const Params& params,
                            const EvalOptions& options) {
  SequenceEvaluator evaluator(params, options);
  SequenceResult result;
  for (const auto& frame : sequence) {
    if (auto out = evaluator.push(frame)) result.frames.push_back(std::move(*out));
  }
  result.report = evaluator.report();
  return result;
}

namespace {

StageStats summarize(std::vector<double> samples) {
  StageStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  s.median_ms = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = samples[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

}  // namespace

BenchReport bench(std::span<const Cloud> sequence, const Params& params, std::size_t repetitions,
                  double frame_rate, IndexStrategy strategy, std::size_t threads) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!(frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
  BenchReport report;
  report.repetitions = repetitions;
  report.frame_period_ms = 1000.0 / frame_rate;

  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    Detector detector(params, strategy, threads);
    std::size_t classified = 0;
    for (const auto& cloud : sequence) {
      const auto result = detector.process(cloud);
      if (!result) continue;
      if (rep == 0) {
        BenchFrame frame;
        frame.frame_index = result->target.frame_index;
        frame.downsampled_points = result->target.points.size();
        const auto it = std::find_if(sequence.begin(), sequence.end(), [&](const Cloud& c) {
          return c.frame_index == frame.frame_index;
        });
        frame.raw_points = it != sequence.end() ? it->points.size() : 0;
        report.frames.push_back(frame);
      }
      report.frames[classified++].repetitions.push_back(result->timings);
    }
  }

  std::vector<double> ds, ix, sc, tot;
  for (const auto& frame : report.frames) {
    std::vector<double> totals;
    for (const auto& t : frame.repetitions) {
      ds.push_back(t.downsample_ms);
      ix.push_back(t.index_ms);
      sc.push_back(t.score_ms);
      tot.push_back(t.total_ms());
      totals.push_back(t.total_ms());
    }
    if (summarize(totals).median_ms > report.frame_period_ms) {
      report.over_budget.push_back(frame.frame_index);
    }
  }
  report.downsample = summarize(ds);
  report.index = summarize(ix);
  report.score = summarize(sc);
  report.total = summarize(tot);
  return report;
}

namespace {

void echo_config(std::ostream& os, const ConfigEcho& config, const char* prefix) {
  for (const auto& [k, v] : config) os << prefix << k << '=' << v << '\n';
}

}  // namespace

void write_report_text(std::ostream& os, const EvalReport& report, const ConfigEcho& config) {
  os << "evaluation report\n";
  if (!config.empty()) {
    os << "effective configuration:\n";
    echo_config(os, config, "  ");
  }
  os << "range limit: ";
  if (report.range_limit) {
    os << *report.range_limit << " m (" << report.excluded_by_range << " points excluded)\n";
  } else {
    os << "none\n";
  }
  if (report.no_frames_evaluated()) {
    os << "no frames evaluated (the window never filled or no truth labels)\n";
    return;
  }
  os << "frames evaluated: " << report.frames.size() << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& f : report.frames) {
    os << "  frame " << f.frame_index << ": iou=" << f.counts.iou() << " tp=" << f.counts.tp
       << " fp=" << f.counts.fp << " fn=" << f.counts.fn << " tn=" << f.counts.tn
       << (f.counts.vacuous() ? " (vacuous)" : "") << '\n';
  }
  const auto& c = report.total;
  os << "aggregate: iou=" << c.iou() << " tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn
     << " tn=" << c.tn << (c.vacuous() ? " (vacuous)" : "") << '\n';
  os.unsetf(std::ios::floatfield);
}

void write_metrics(std::ostream& os, const EvalReport& report, const ConfigEcho& config) {
  const auto& c = report.total;
  os << std::setprecision(10);
  os << "iou=" << c.iou() << '\n';
  os << "tp=" << c.tp << "\nfp=" << c.fp << "\nfn=" << c.fn << "\ntn=" << c.tn << '\n';
  os << "vacuous=" << (c.vacuous() ? 1 : 0) << '\n';
  os << "frames_evaluated=" << report.frames.size() << '\n';
  os << "no_frames_evaluated=" << (report.no_frames_evaluated() ? 1 : 0) << '\n';
  os << "excluded_by_range=" << report.excluded_by_range << '\n';
  if (report.range_limit) os << "range_limit=" << *report.range_limit << '\n';
  if (!report.timings.empty()) {
    std::vector<double> total;
    for (const auto& t : report.timings) total.push_back(t.total_ms());
    os << "frame_ms_median=" << summarize(total).median_ms << '\n';
  }
  echo_config(os, config, "config.");
}

void write_bench_text(std::ostream& os, const BenchReport& report, const ConfigEcho& config) {
  os << "benchmark report\n";
  if (!config.empty()) {
    os << "effective configuration:\n";
    echo_config(os, config, "  ");
  }
  os << "repetitions: " << report.repetitions << ", classified frames: " << report.frames.size()
     << ", frame period: " << report.frame_period_ms << " ms\n";
  if (!report.frames.empty()) {
    double raw = 0.0, reduced = 0.0;
    for (const auto& f : report.frames) {
      raw += static_cast<double>(f.raw_points);
      reduced += static_cast<double>(f.downsampled_points);
    }
    const auto n = static_cast<double>(report.frames.size());
    os << "mean points per frame: " << raw / n << " raw, " << reduced / n << " downsampled\n";
  }
  os << std::fixed << std::setprecision(3);
  auto line = [&](const char* name, const StageStats& s) {
    os << "  " << std::left << std::setw(11) << name << " median " << std::right << std::setw(9)
       << s.median_ms << " ms   p95 " << std::setw(9) << s.p95_ms << " ms\n";
  };
  line("downsample", report.downsample);
  line("index", report.index);
  line("score", report.score);
  line("total", report.total);
  os << "frames over the frame period: " << report.over_budget.size();
  for (const auto f : report.over_budget) os << ' ' << f;
  os << '\n';
  os.unsetf(std::ios::floatfield);
}

void write_bench_metrics(std::ostream& os, const BenchReport& report) {
  os << std::setprecision(10);
  os << "repetitions=" << report.repetitions << '\n';
  os << "frames_classified=" << report.frames.size() << '\n';
  os << "frame_period_ms=" << report.frame_period_ms << '\n';
  os << "downsample_ms_median=" << report.downsample.median_ms << '\n';
  os << "downsample_ms_p95=" << report.downsample.p95_ms << '\n';
  os << "index_ms_median=" << report.index.median_ms << '\n';
  os << "index_ms_p95=" << report.index.p95_ms << '\n';
  os << "score_ms_median=" << report.score.median_ms << '\n';
  os << "score_ms_p95=" << report.score.p95_ms << '\n';
  os << "total_ms_median=" << report.total.median_ms << '\n';
  os << "total_ms_p95=" << report.total.p95_ms << '\n';
  os << "frames_over_budget=" << report.over_budget.size() << '\n';
}

}  // namespace stnormal
