// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "stnormal/types.hpp"

namespace stnormal {

enum class Interpolation { kNearest, kLinear };

/// Time-ordered sequence of sensor poses supplied by an external odometry source.
class Trajectory {
 public:
  Trajectory() = default;
  /// Sorts by stamp; throws std::invalid_argument on duplicate stamps.
  explicit Trajectory(std::vector<Pose> poses);

  bool empty() const { return poses_.empty(); }
  std::size_t size() const { return poses_.size(); }
  const std::vector<Pose>& poses() const { return poses_; }
  double first_stamp() const;
  double last_stamp() const;

  /// Pose at `stamp`. Stamps outside [first, last] are accepted when they are
  /// within `tolerance` seconds of an end, in which case that end pose is used.
  /// Linear mode lerps the translation and slerps the rotation.
  Pose at(double stamp, Interpolation mode, double tolerance = 0.0) const;

 private:
  std::vector<Pose> poses_;
};

/// Lines `stamp tx ty tz qx qy qz qw`; blank and `#` lines are skipped.
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);

Cloud transform_cloud(const Cloud& cloud, const Pose& pose);

/// Brings a sensor-frame cloud into the world frame using the pose at cloud.stamp.
Cloud apply_registration(const Cloud& cloud, const Trajectory& trajectory,
                         Interpolation mode, double tolerance = 0.0);

}  // namespace stnormal
