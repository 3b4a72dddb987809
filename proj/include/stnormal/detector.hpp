// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "stnormal/params.hpp"
#include "stnormal/sliding_map.hpp"
#include "stnormal/types.hpp"

namespace stnormal {

/// Wall-clock milliseconds spent in each pipeline stage for one pushed frame.
struct StageTimings {
  double downsample_ms = 0.0;
  double index_ms = 0.0;
  double score_ms = 0.0;

  double total_ms() const { return downsample_ms + index_ms + score_ms; }
};

struct FrameResult {
  Cloud target;  // downsampled middle cloud of the window
  std::vector<ScoredPoint> scored;
  StageTimings timings;
};

/// Streaming detector: downsample -> push into the sliding map -> score the
/// middle cloud once the window is full. Frames come out N pushes late.
class Detector {
 public:
  /// Validates params (ConfigError on failure).
  explicit Detector(Params params, IndexStrategy strategy = IndexStrategy::kPerCloud,
                    std::size_t threads = 0);

  /// `cloud` must already be in the world frame.
  std::optional<FrameResult> process(const Cloud& cloud);

  const Params& params() const { return params_; }
  const SlidingMap& map() const { return map_; }
  const StageTimings& last_timings() const { return last_timings_; }
  double last_voxel_size() const { return last_voxel_size_; }

 private:
  Params params_;
  SlidingMap map_;
  std::size_t threads_;
  StageTimings last_timings_;
  double last_voxel_size_ = 0.0;
};

}  // namespace stnormal
