// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/voxel_grid.hpp"

#include <bit>
#include <stdexcept>

#include "stnormal/error.hpp"

namespace stnormal {

SpatialHashGrid::SpatialHashGrid(double voxel_size, std::size_t expected_points)
    : voxel_size_(voxel_size) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw std::invalid_argument("voxel size must be positive, got " + std::to_string(voxel_size));
  }
  const std::size_t capacity = std::bit_ceil(std::max<std::size_t>(16, 2 * expected_points));
  keys_.resize(capacity);
  values_.assign(capacity, kNone);
  mask_ = capacity - 1;
}

std::size_t SpatialHashGrid::slot_of(const VoxelKey& key) const {
  std::size_t slot = VoxelKeyHash{}(key) & mask_;
  while (values_[slot] != kNone && !(keys_[slot] == key)) slot = (slot + 1) & mask_;
  return slot;
}

void SpatialHashGrid::grow() {
  std::vector<VoxelKey> keys = std::move(keys_);
  std::vector<std::size_t> values = std::move(values_);
  const std::size_t capacity = 2 * keys.size();
  keys_.assign(capacity, VoxelKey{});
  values_.assign(capacity, kNone);
  mask_ = capacity - 1;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (values[i] == kNone) continue;
    const std::size_t slot = slot_of(keys[i]);
    keys_[slot] = keys[i];
    values_[slot] = values[i];
  }
}

bool SpatialHashGrid::insert(double x, double y, double z, std::size_t index) {
  if (2 * (size_ + 1) > keys_.size()) grow();
  const VoxelKey key = voxel_key(x, y, z, voxel_size_);
  const std::size_t slot = slot_of(key);
  if (values_[slot] != kNone) return false;
  keys_[slot] = key;
  values_[slot] = index;
  ++size_;
  return true;
}

std::size_t SpatialHashGrid::find(double x, double y, double z) const {
  return values_[slot_of(voxel_key(x, y, z, voxel_size_))];
}

Cloud downsample(const Cloud& cloud, double voxel_size) {
  SpatialHashGrid grid(voxel_size, cloud.points.size());
  Cloud out;
  out.frame_index = cloud.frame_index;
  out.stamp = cloud.stamp;
  out.points.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    if (grid.insert(p.x, p.y, p.z, i)) out.points.push_back(p);
  }
  return out;
}

double compute_scale(const Cloud& cloud) {
  if (cloud.points.empty()) throw EmptyCloudError("compute_scale");
  Eigen::Vector3d lo = cloud.points.front().xyz();
  Eigen::Vector3d hi = lo;
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d v = p.xyz();
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double auto_voxel_size(const Cloud& cloud, double divisor) {
  if (!(divisor > 0.0)) throw std::invalid_argument("voxel divisor must be positive");
  return compute_scale(cloud) / divisor;
}

}  // namespace stnormal
