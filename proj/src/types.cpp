// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stnormal/error.hpp"

namespace stnormal {

OutOfRangeStampError::OutOfRangeStampError(double stamp, double first, double last)
    : Error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "stamp " << stamp << " outside pose range [" << first << ", " << last << "]";
        return os.str();
      }()),
      stamp_(stamp) {}

bool TimedPoint::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(t);
}

double representative_stamp(const std::vector<TimedPoint>& points) {
  if (points.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(
      points.begin(), points.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return 0.5 * (lo->t + hi->t);
}

Cloud make_cloud(std::int64_t frame_index, std::vector<TimedPoint> points) {
  Cloud cloud;
  cloud.frame_index = frame_index;
  cloud.stamp = representative_stamp(points);
  cloud.points = std::move(points);
  return cloud;
}

std::size_t count_stamp_outliers(const Cloud& cloud, double period) {
  return static_cast<std::size_t>(
      std::count_if(cloud.points.begin(), cloud.points.end(), [&](const TimedPoint& p) {
        return std::abs(p.t - cloud.stamp) > period;
      }));
}

Pose::Pose(double stamp, const Eigen::Vector3d& translation, const Eigen::Quaterniond& rotation)
    : stamp_(stamp), translation_(translation), rotation_(rotation) {
  const double norm = rotation.norm();
  if (!std::isfinite(norm) || norm == 0.0 || !translation.allFinite() || !std::isfinite(stamp)) {
    throw std::invalid_argument("pose must be finite with a non-zero quaternion");
  }
  rotation_.normalize();
}

std::string_view to_string(Label label) {
  return label == Label::kDynamic ? "dynamic" : "static";
}

}  // namespace stnormal
