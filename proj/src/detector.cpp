// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/detector.hpp"

#include <chrono>

#include "stnormal/scoring.hpp"
#include "stnormal/voxel_grid.hpp"

namespace stnormal {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

Params validated(Params params) {
  params.validate();
  return params;
}

}  // namespace

Detector::Detector(Params params, IndexStrategy strategy, std::size_t threads)
    : params_(validated(params)), map_(params_.half_window, strategy), threads_(threads) {}

std::optional<FrameResult> Detector::process(const Cloud& cloud) {
  StageTimings timings;
  auto start = std::chrono::steady_clock::now();
  last_voxel_size_ = params_.voxel.resolve(cloud);
  Cloud reduced = downsample(cloud, last_voxel_size_);
  timings.downsample_ms = ms_since(start);

  start = std::chrono::steady_clock::now();
  std::optional<Cloud> target = map_.push(std::move(reduced));
  timings.index_ms = ms_since(start);

  if (!target) {
    last_timings_ = timings;
    return std::nullopt;
  }
  start = std::chrono::steady_clock::now();
  FrameResult result;
  result.scored = score_cloud(*target, map_, params_, threads_);
  result.target = std::move(*target);
  timings.score_ms = ms_since(start);
  result.timings = timings;
  last_timings_ = timings;
  return result;
}

}  // namespace stnormal
