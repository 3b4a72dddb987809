// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <string_view>
#include <vector>

namespace stnormal {

/// A world-frame position in meters with its acquisition time in seconds.
struct TimedPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double t = 0.0;

  Eigen::Vector3d xyz() const { return {x, y, z}; }
  Eigen::Vector4d xyzt() const { return {x, y, z, t}; }
  bool finite() const;

  friend bool operator==(const TimedPoint&, const TimedPoint&) = default;
};

/// One sensor frame. `stamp` is the midpoint of the points' time span.
struct Cloud {
  std::int64_t frame_index = 0;
  double stamp = 0.0;
  std::vector<TimedPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Builds a cloud and derives its stamp from the points.
Cloud make_cloud(std::int64_t frame_index, std::vector<TimedPoint> points);

/// Midpoint of [min t, max t]; 0 for an empty span.
double representative_stamp(const std::vector<TimedPoint>& points);

/// Number of points whose time lies outside [stamp - period, stamp + period].
std::size_t count_stamp_outliers(const Cloud& cloud, double period);

/// Rigid sensor-to-world transform at a given time. The rotation is kept unit-norm.
class Pose {
 public:
  Pose() = default;
  /// Normalizes `rotation`; throws std::invalid_argument on a zero or non-finite quaternion.
  Pose(double stamp, const Eigen::Vector3d& translation, const Eigen::Quaterniond& rotation);

  double stamp() const { return stamp_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  const Eigen::Quaterniond& rotation() const { return rotation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }

 private:
  double stamp_ = 0.0;
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
};

enum class Label : std::uint8_t { kStatic = 0, kDynamic = 1 };

std::string_view to_string(Label label);

struct ScoredPoint {
  TimedPoint point;
  double score = 0.0;
  bool valid = false;
  Label label = Label::kStatic;
};

}  // namespace stnormal
