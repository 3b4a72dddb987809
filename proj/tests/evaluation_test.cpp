// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>
#include <sstream>

#include "stnormal/evaluation.hpp"
#include "stnormal/synthetic.hpp"
#include "support.hpp"

using namespace stnormal;

namespace {

constexpr Label D = Label::kDynamic;
constexpr Label S = Label::kStatic;

std::vector<SequenceFrame> as_sequence(const std::vector<LabeledCloud>& frames,
                                       const Eigen::Vector3d& origin = Eigen::Vector3d::Zero()) {
  std::vector<SequenceFrame> seq;
  for (const auto& f : frames) seq.push_back({f.cloud, f.labels, origin});
  return seq;
}

}  // namespace

TEST_CASE("perfect predictions give IoU 1") {
  const std::vector<Label> truth = {D, S, D, S, S};
  const EvalReport r = compute_iou(truth, truth);
  CHECK(r.iou() == 1.0);
  CHECK_FALSE(r.vacuous());
  CHECK(r.total.tp == 2);
  CHECK(r.total.tn == 3);
}

TEST_CASE("no dynamic points anywhere is vacuous") {
  const std::vector<Label> all_static(7, S);
  const EvalReport r = compute_iou(all_static, all_static);
  CHECK(r.vacuous());
  CHECK(r.iou() == 1.0);
  CHECK(r.total.tn == 7);
}

TEST_CASE("IoU is tp over tp plus fp plus fn") {
  std::vector<Label> pred, truth;
  auto add = [&](Label p, Label t, int n) {
    for (int i = 0; i < n; ++i) {
      pred.push_back(p);
      truth.push_back(t);
    }
  };
  add(D, D, 8);
  add(D, S, 2);
  add(S, D, 2);
  add(S, S, 30);
  const EvalReport r = compute_iou(pred, truth);
  CHECK(r.total == ConfusionCounts{8, 2, 2, 30});
  CHECK(r.iou() == doctest::Approx(8.0 / 12.0));
}

TEST_CASE("range limit drops far points from every count") {
  const std::vector<Label> pred = {D, D, S, S};
  const std::vector<Label> truth = {D, S, D, S};
  const std::vector<double> ranges = {1.0, 30.0, 25.0, 5.0};
  const EvalReport r = compute_iou(pred, truth, ranges, 20.0);
  CHECK(r.total == ConfusionCounts{1, 0, 0, 1});
  CHECK(r.excluded_by_range == 2);
  CHECK(r.range_limit == 20.0);
  CHECK(compute_iou(pred, truth, ranges, 30.0).total == ConfusionCounts{1, 1, 1, 1});
}

TEST_CASE("mismatched lengths are rejected") {
  const std::vector<Label> a = {D, S}, b = {D};
  CHECK_THROWS_AS(compute_iou(a, b), std::invalid_argument);
  CHECK_THROWS_AS(compute_iou(a, a, std::vector<double>{1.0}, 5.0), std::invalid_argument);
}

TEST_CASE("random labelings agree with themselves") {
  std::mt19937_64 rng(17);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Label> labels(200);
    for (auto& l : labels) l = coin(rng) ? D : S;
    const auto r = compute_iou(labels, labels);
    CHECK(r.iou() == 1.0);
    CHECK(r.total.fp + r.total.fn == 0);
  }
}

TEST_CASE("point ranges are distances from the origin") {
  const Cloud c = make_cloud(0, {{3, 4, 0, 0}, {1, 1, 1, 0}});
  const auto r = point_ranges(c, {0, 0, 0});
  CHECK(r[0] == doctest::Approx(5.0));
  CHECK(r[1] == doctest::Approx(std::sqrt(3.0)));
  CHECK(point_ranges(c, {1, 1, 1})[1] == 0.0);
}

TEST_CASE("a sequence shorter than the window evaluates no frames") {
  const auto frames = generate(test::static_plane_scene(20, 500));
  const SequenceResult r = run_sequence(as_sequence(frames), Params{});
  CHECK(r.report.no_frames_evaluated());
  CHECK(r.frames.empty());
  std::ostringstream text;
  write_report_text(text, r.report);
  CHECK(text.str().find("no frames evaluated") != std::string::npos);
}

TEST_CASE("an all-static sequence has no false positives") {
  SceneSpec spec = load_scene(test::source_dir() / "scenes/static_room.scene");
  spec.sensor.points_per_frame = 8000;
  spec.sensor.frames = 7;
  Params p;
  p.half_window = 2;
  const SequenceResult r = run_sequence(as_sequence(generate(spec)), p);
  REQUIRE(r.report.frames.size() == 3);
  CHECK(r.report.total.fp == 0);
  CHECK(r.report.vacuous());
  CHECK(r.report.total.tn == 3 * 8000);
  CHECK(r.report.timings.size() == 3);
}

TEST_CASE("sequence outputs follow the window centre and carry full-resolution labels") {
  const auto frames = generate(test::moving_plane_scene(Eigen::Vector3d::UnitX(), {1, 0, 0}, 0.0,
                                                        4, 3.0, 3000, 9));
  Params p;
  p.half_window = 2;
  EvalOptions options;
  options.range_limit = 1.0;
  const SequenceResult r = run_sequence(as_sequence(frames), p, options);
  REQUIRE(r.frames.size() == 5);
  for (std::size_t i = 0; i < r.frames.size(); ++i) {
    const auto& out = r.frames[i];
    CHECK(out.frame_index == static_cast<std::int64_t>(i + 2));
    CHECK(out.full_labels.size() == frames[i + 2].cloud.size());
    REQUIRE(out.eval);
    CHECK(out.eval->frame_index == out.frame_index);
  }
  CHECK(r.report.excluded_by_range > 0);
  CHECK(r.report.total.fn + r.report.total.tp + r.report.total.fp + r.report.total.tn +
            r.report.excluded_by_range ==
        5 * 3000);
}

TEST_CASE("frames without truth are classified but not scored") {
  auto seq = as_sequence(generate(test::static_plane_scene(5, 300)));
  for (auto& f : seq) f.truth.reset();
  Params p;
  p.half_window = 1;
  const SequenceResult r = run_sequence(seq, p);
  CHECK(r.frames.size() == 3);
  CHECK(r.report.no_frames_evaluated());
  seq[0].truth = std::vector<Label>(2, S);
  CHECK_THROWS_AS(run_sequence(seq, p), std::invalid_argument);
}

TEST_CASE("tiny clouds bench in well under a millisecond per stage") {
  std::vector<Cloud> clouds;
  for (std::int64_t k = 0; k < 6; ++k) {
    std::vector<TimedPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({0.1 * i, 0.05 * (i % 3), 0, 0.1 * k});
    clouds.push_back(make_cloud(k, pts));
  }
  Params p;
  p.half_window = 1;
  p.voxel = VoxelSetting::fixed(0.01);
  const BenchReport r = bench(clouds, p, 3, 10.0);
  CHECK(r.repetitions == 3);
  REQUIRE(r.frames.size() == 4);
  for (const auto& f : r.frames) {
    CHECK(f.repetitions.size() == 3);
    CHECK(f.raw_points == 10);
  }
  CHECK(r.frames.front().frame_index == 1);
  CHECK(r.downsample.median_ms < 1.0);
  CHECK(r.index.median_ms < 1.0);
  CHECK(r.score.median_ms < 1.0);
  CHECK(r.total.median_ms <= r.total.p95_ms);
  CHECK(r.frame_period_ms == 100.0);
  CHECK(r.over_budget.empty());
  CHECK_THROWS_AS(bench(clouds, p, 0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(bench(clouds, p, 1, 0.0), std::invalid_argument);

  std::ostringstream metrics, text;
  write_bench_metrics(metrics, r);
  write_bench_text(text, r, {{"N", "1"}});
  CHECK(metrics.str().find("repetitions=3\n") != std::string::npos);
  CHECK(metrics.str().find("total_ms_median=") != std::string::npos);
  CHECK(text.str().find("  N=1\n") != std::string::npos);
}

TEST_CASE("metrics are one key=value per line") {
  EvalReport r = compute_iou(std::vector<Label>{D, S, D}, std::vector<Label>{D, D, S});
  r.range_limit = 20.0;
  std::ostringstream os;
  write_metrics(os, r, {{"thr", "0.25"}});
  const std::string s = os.str();
  CHECK(s.find("iou=0.3333333333\n") != std::string::npos);
  CHECK(s.find("tp=1\nfp=1\nfn=1\ntn=0\n") != std::string::npos);
  CHECK(s.find("frames_evaluated=1\n") != std::string::npos);
  CHECK(s.find("range_limit=20\n") != std::string::npos);
  CHECK(s.find("config.thr=0.25\n") != std::string::npos);
  std::istringstream lines(s);
  for (std::string line; std::getline(lines, line);) CHECK(line.find('=') != std::string::npos);
}

TEST_CASE("partial reports merge") {
  EvalReport a = compute_iou(std::vector<Label>{D, S}, std::vector<Label>{D, S}, {}, {}, 3);
  const EvalReport b = compute_iou(std::vector<Label>{D}, std::vector<Label>{S}, {}, {}, 4);
  a.merge(b);
  CHECK(a.frames.size() == 2);
  CHECK(a.total == ConfusionCounts{1, 1, 0, 1});
  CHECK(a.frames[1].frame_index == 4);
}
