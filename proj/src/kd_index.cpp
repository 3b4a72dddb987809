// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/kd_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace stnormal {

KdIndex::KdIndex(std::span<const TimedPoint> points, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("kd-tree input too large");
  }
  const auto n = static_cast<std::uint32_t>(points.size());
  if (n == 0) return;

  ids_.resize(n);
  std::iota(ids_.begin(), ids_.end(), 0U);
  coords_.resize(3 * static_cast<std::size_t>(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    coords_[3 * i] = points[i].x;
    coords_[3 * i + 1] = points[i].y;
    coords_[3 * i + 2] = points[i].z;
  }
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build(0, n);

  // coords_ was indexed by original id during the build; lay it out in tree order.
  std::vector<double> ordered(coords_.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    std::copy_n(&coords_[3 * static_cast<std::size_t>(ids_[i])], 3, &ordered[3 * i]);
  }
  coords_ = std::move(ordered);

  lo_.fill(std::numeric_limits<double>::infinity());
  hi_.fill(-std::numeric_limits<double>::infinity());
  for (std::uint32_t i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      lo_[d] = std::min(lo_[d], coords_[3 * i + d]);
      hi_[d] = std::max(hi_[d], coords_[3 * i + d]);
    }
  }
}

std::uint32_t KdIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  auto coord = [this](std::uint32_t point, int d) { return coords_[3 * point + d]; };

  std::array<double, 3> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], coord(ids_[i], d));
      hi[d] = std::max(hi[d], coord(ids_[i], d));
    }
  }
  nodes_[id].box_lo = lo;
  nodes_[id].box_hi = hi;

  if (end - begin <= leaf_size_) {
    nodes_[id].first = begin;
    nodes_[id].second = end;
    return id;
  }
  int dim = 0;
  for (int d = 1; d < 3; ++d) {
    if (hi[d] - lo[d] > hi[dim] - lo[dim]) dim = d;
  }
  if (hi[dim] == lo[dim]) {
    // All points coincide; no split can separate them.
    nodes_[id].first = begin;
    nodes_[id].second = end;
    return id;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coord(a, dim), cb = coord(b, dim);
                     return ca < cb || (ca == cb && a < b);
                   });
  double div_low = -std::numeric_limits<double>::infinity();
  for (std::uint32_t i = begin; i < mid; ++i) div_low = std::max(div_low, coord(ids_[i], dim));
  double div_high = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = mid; i < end; ++i) div_high = std::min(div_high, coord(ids_[i], dim));

  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.dim = dim;
  node.first = left;
  node.second = right;
  node.div_low = div_low;
  node.div_high = div_high;
  return id;
}

std::vector<std::size_t> KdIndex::radius_query(const Eigen::Vector3d& center,
                                               double radius) const {
  std::vector<std::size_t> out;
  for_each_in_radius(center, radius, [&](std::size_t i) { out.push_back(i); });
  return out;
}

KdIndex build_index(std::span<const TimedPoint> points) { return KdIndex(points); }

std::vector<std::size_t> radius_query(const KdIndex& index, const Eigen::Vector3d& center,
                                      double radius) {
  return index.radius_query(center, radius);
}

}  // namespace stnormal
