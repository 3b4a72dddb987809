// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/params.hpp"

#include <cmath>
#include <string>

#include "stnormal/error.hpp"
#include "stnormal/voxel_grid.hpp"

namespace stnormal {

double VoxelSetting::resolve(const Cloud& cloud) const {
  return mode_ == Mode::kFixed ? value_ : auto_voxel_size(cloud, value_);
}

void Params::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(voxel.value() > 0.0) || !std::isfinite(voxel.value())) {
    fail(voxel.mode() == VoxelSetting::Mode::kFixed ? "voxel must be > 0"
                                                    : "auto_voxel_divisor must be > 0");
  }
  if (half_window < 1) fail("N must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) fail("radius must be > 0");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("thr must lie in [0, 1]");
  if (min_neighbors < 4) fail("min_neighbors must be >= 4");
  if (min_distinct_frames < 2) fail("min_distinct_frames must be >= 2");
  if (!(time_scale > 0.0) || !std::isfinite(time_scale)) fail("time_scale must be > 0");
}

}  // namespace stnormal
