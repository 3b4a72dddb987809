// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "stnormal/types.hpp"

namespace stnormal {

/// Voxel size for per-cloud downsampling: either fixed in meters or derived
/// from each cloud's bounding-box diagonal divided by a constant.
class VoxelSetting {
 public:
  enum class Mode { kFixed, kAutoDivisor };

  static VoxelSetting fixed(double voxel_size) { return {Mode::kFixed, voxel_size}; }
  static VoxelSetting auto_divisor(double divisor) { return {Mode::kAutoDivisor, divisor}; }

  Mode mode() const { return mode_; }
  double value() const { return value_; }

  /// Voxel size to use for `cloud`.
  double resolve(const Cloud& cloud) const;

 private:
  VoxelSetting(Mode mode, double value) : mode_(mode), value_(value) {}
  Mode mode_;
  double value_;
};

/// Detection parameters. Defaults are the lidar setting: N=10, d_r=0.3 m,
/// thr=0.25, voxel = scale/600.
struct Params {
  VoxelSetting voxel = VoxelSetting::auto_divisor(600.0);
  std::size_t half_window = 10;  // N; the window holds 2N+1 clouds
  double radius = 0.3;           // d_r, meters
  double threshold = 0.25;       // thr; dynamic iff score > thr
  std::size_t min_neighbors = 5;
  std::size_t min_distinct_frames = 2;
  // Experimental: multiplies t before the covariance. 1.0 keeps raw seconds.
  double time_scale = 1.0;

  std::size_t window_size() const { return 2 * half_window + 1; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace stnormal
