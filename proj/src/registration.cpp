// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/registration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stnormal/error.hpp"

namespace stnormal {

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  std::stable_sort(poses_.begin(), poses_.end(),
                   [](const Pose& a, const Pose& b) { return a.stamp() < b.stamp(); });
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (poses_[i].stamp() == poses_[i - 1].stamp()) {
      throw std::invalid_argument("duplicate pose stamp " + std::to_string(poses_[i].stamp()));
    }
  }
}

double Trajectory::first_stamp() const {
  if (poses_.empty()) throw std::logic_error("empty trajectory");
  return poses_.front().stamp();
}

double Trajectory::last_stamp() const {
  if (poses_.empty()) throw std::logic_error("empty trajectory");
  return poses_.back().stamp();
}

Pose Trajectory::at(double stamp, Interpolation mode, double tolerance) const {
  if (poses_.empty()) throw OutOfRangeStampError(stamp, NAN, NAN);
  const double first = first_stamp();
  const double last = last_stamp();
  if (stamp < first - tolerance || stamp > last + tolerance || !std::isfinite(stamp)) {
    throw OutOfRangeStampError(stamp, first, last);
  }
  if (stamp <= first) return poses_.front();
  if (stamp >= last) return poses_.back();

  const auto upper = std::upper_bound(poses_.begin(), poses_.end(), stamp,
                                      [](double s, const Pose& p) { return s < p.stamp(); });
  const Pose& b = *upper;
  const Pose& a = *std::prev(upper);
  if (mode == Interpolation::kNearest) {
    return (stamp - a.stamp() <= b.stamp() - stamp) ? a : b;
  }
  const double alpha = (stamp - a.stamp()) / (b.stamp() - a.stamp());
  const Eigen::Vector3d translation = (1.0 - alpha) * a.translation() + alpha * b.translation();
  Eigen::Quaterniond rotation = a.rotation().slerp(alpha, b.rotation());
  rotation.normalize();
  return Pose(stamp, translation, rotation);
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open pose file");
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double s, tx, ty, tz, qx, qy, qz, qw;
    if (!(fields >> s >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw ParseError(path.string(), line_no, "expected 'stamp tx ty tz qx qy qz qw'");
    }
    try {
      poses.emplace_back(s, Eigen::Vector3d(tx, ty, tz), Eigen::Quaterniond(qw, qx, qy, qz));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  try {
    return Trajectory(std::move(poses));
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string(), e.what());
  }
}

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.precision(17);
  out << "# stamp tx ty tz qx qy qz qw\n";
  for (const auto& pose : trajectory.poses()) {
    const auto& t = pose.translation();
    const auto& q = pose.rotation();
    out << pose.stamp() << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << q.x() << ' '
        << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

Cloud transform_cloud(const Cloud& cloud, const Pose& pose) {
  const Eigen::Matrix3d rotation = pose.rotation().toRotationMatrix();
  const Eigen::Vector3d& translation = pose.translation();
  Cloud out;
  out.frame_index = cloud.frame_index;
  out.stamp = cloud.stamp;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d w = rotation * p.xyz() + translation;
    out.points.push_back({w.x(), w.y(), w.z(), p.t});
  }
  return out;
}

Cloud apply_registration(const Cloud& cloud, const Trajectory& trajectory, Interpolation mode,
                         double tolerance) {
  return transform_cloud(cloud, trajectory.at(cloud.stamp, mode, tolerance));
}

}  // namespace stnormal
