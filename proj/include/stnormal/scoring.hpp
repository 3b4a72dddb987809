// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "stnormal/params.hpp"
#include "stnormal/sliding_map.hpp"
#include "stnormal/types.hpp"

namespace stnormal {

/// dynamic iff valid and score > threshold.
inline Label classify_score(double score, bool valid, double threshold) {
  return (valid && score > threshold) ? Label::kDynamic : Label::kStatic;
}

/// Scores one point of the window's target cloud: |t component| of the
/// smallest-eigenvalue eigenvector of its spatiotemporal neighborhood
/// covariance. Neighborhoods with fewer than min_neighbors points or spanning
/// fewer than min_distinct_frames clouds are marked invalid with score 0.
/// Throws WindowNotFullError when the map is not full.
ScoredPoint dynamic_score(const TimedPoint& point, const SlidingMap& map, const Params& params);

/// Scores every point of `cloud` against the map. Output order matches input
/// order for any thread count (0 = hardware concurrency).
std::vector<ScoredPoint> score_cloud(const Cloud& cloud, const SlidingMap& map,
                                     const Params& params, std::size_t threads = 0);

struct Classification {
  std::vector<ScoredPoint> dynamic_points;
  std::vector<ScoredPoint> static_points;
};

/// Splits scored points by label, keeping input order within each part.
Classification partition(std::span<const ScoredPoint> scored);

Classification classify_cloud(const Cloud& cloud, const SlidingMap& map, const Params& params,
                              std::size_t threads = 0);

/// Full-resolution labels: a point is dynamic iff it lies within `radius`
/// (closed ball) of at least one of `dynamic_points`.
std::vector<Label> upsample_labels(const Cloud& full_cloud,
                                   std::span<const ScoredPoint> dynamic_points, double radius);

/// Output delay in seconds for a sensor running at frame_rate Hz: N / f.
double latency(const Params& params, double frame_rate);

}  // namespace stnormal
