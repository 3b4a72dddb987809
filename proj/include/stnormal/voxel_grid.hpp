// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "stnormal/types.hpp"

namespace stnormal {

/// Integer cube coordinates, floor(coordinate / voxel_size) per axis.
struct VoxelKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  std::int64_t iz = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

inline VoxelKey voxel_key(double x, double y, double z, double voxel_size) {
  return {static_cast<std::int64_t>(std::floor(x / voxel_size)),
          static_cast<std::int64_t>(std::floor(y / voxel_size)),
          static_cast<std::int64_t>(std::floor(z / voxel_size))};
}

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    return static_cast<std::size_t>(k.ix * 73856093LL ^ k.iy * 19349669LL ^ k.iz * 83492791LL);
  }
};

/// Open-addressing hash from voxel keys to the index of the first point seen
/// in that voxel.
class SpatialHashGrid {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  /// Throws std::invalid_argument unless voxel_size is finite and > 0.
  explicit SpatialHashGrid(double voxel_size, std::size_t expected_points = 0);

  double voxel_size() const { return voxel_size_; }
  std::size_t size() const { return size_; }

  /// Claims the voxel of (x,y,z) for `index`. Returns false when the voxel is
  /// already occupied, leaving the earlier occupant in place.
  bool insert(double x, double y, double z, std::size_t index);

  /// Index stored for the voxel containing (x,y,z), or kNone.
  std::size_t find(double x, double y, double z) const;

 private:
  void grow();
  std::size_t slot_of(const VoxelKey& key) const;

  double voxel_size_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
  std::vector<VoxelKey> keys_;
  std::vector<std::size_t> values_;
};

/// Keeps the first point (in input order) of every occupied voxel, with its
/// original coordinates and time. Output order is first-occurrence order.
Cloud downsample(const Cloud& cloud, double voxel_size);

/// Diagonal length of the axis-aligned bounding box of the spatial coordinates.
double compute_scale(const Cloud& cloud);

/// compute_scale(cloud) / divisor.
double auto_voxel_size(const Cloud& cloud, double divisor);

}  // namespace stnormal
