// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stnormal/types.hpp"

namespace stnormal {

/// Static 3D kd-tree over the spatial coordinates of a point list. Time is not
/// an index dimension. Immutable after construction, so concurrent queries are safe.
class KdIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 10;

  KdIndex() = default;
  explicit KdIndex(std::span<const TimedPoint> points, std::size_t leaf_size = kDefaultLeafSize);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::size_t leaf_size() const { return leaf_size_; }

  /// Calls fn(index) for every indexed point with ||p - center|| <= radius.
  /// Points are visited in tree order, independent of the query.
  template <typename Fn>
  void for_each_in_radius(const Eigen::Vector3d& center, double radius, Fn&& fn) const;

  /// Calls fn(index) for a superset of the points within `radius` of any
  /// position in the axis-aligned box [lo, hi], in the same tree order as
  /// for_each_in_radius. Callers apply the exact ball test themselves.
  template <typename Fn>
  void for_each_near_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, double radius,
                         Fn&& fn) const;

  /// Indices (into the build input) of the closed ball around center.
  std::vector<std::size_t> radius_query(const Eigen::Vector3d& center, double radius) const;

 private:
  struct Node {
    // Leaf: [begin, end) into ids_/coords_. Internal: children and split gap.
    std::uint32_t first = 0;   // begin, or left child
    std::uint32_t second = 0;  // end, or right child
    std::int32_t dim = -1;     // -1 for leaves
    double div_low = 0.0;      // max coordinate of the left side along dim
    double div_high = 0.0;     // min coordinate of the right side along dim
    // Tight bounds of the node's points, used to prune box queries.
    std::array<double, 3> box_lo{};
    std::array<double, 3> box_hi{};
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  template <typename Leaf>
  void visit(const double* lo, const double* hi, double prune2, Leaf& leaf) const;
  template <typename Leaf>
  void descend(std::uint32_t node_id, const double* lo, const double* hi, double prune2,
               double mindist, std::array<double, 3>& dists, Leaf& leaf) const;

  std::size_t leaf_size_ = kDefaultLeafSize;
  std::vector<double> coords_;  // xyz triplets in tree order
  std::vector<std::uint32_t> ids_;
  std::vector<Node> nodes_;
  std::array<double, 3> lo_{};
  std::array<double, 3> hi_{};
};

inline void check_radius(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("query radius must be positive, got " + std::to_string(radius));
  }
}

// Pruning uses a slightly inflated radius so rounding in the incremental bound
// never discards a point that the exact test would accept.
inline double prune_radius2(double radius) { return radius * radius * (1.0 + 1e-9) + 1e-300; }

template <typename Fn>
void KdIndex::for_each_in_radius(const Eigen::Vector3d& center, double radius, Fn&& fn) const {
  check_radius(radius);
  const double q[3] = {center.x(), center.y(), center.z()};
  const double r2 = radius * radius;
  auto leaf = [&](std::uint32_t i, const double* p) {
    const double dx = p[0] - q[0];
    const double dy = p[1] - q[1];
    const double dz = p[2] - q[2];
    if (dx * dx + dy * dy + dz * dz <= r2) fn(static_cast<std::size_t>(ids_[i]));
  };
  visit(q, q, prune_radius2(radius), leaf);
}

template <typename Fn>
void KdIndex::for_each_near_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                double radius, Fn&& fn) const {
  check_radius(radius);
  if (!(lo.array() <= hi.array()).all()) throw std::invalid_argument("query box has lo > hi");
  const double qlo[3] = {lo.x(), lo.y(), lo.z()};
  const double qhi[3] = {hi.x(), hi.y(), hi.z()};
  const double prune2 = prune_radius2(radius);
  auto leaf = [&](std::uint32_t i, const double* p) {
    double d2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double gap = p[d] < qlo[d] ? qlo[d] - p[d] : (p[d] > qhi[d] ? p[d] - qhi[d] : 0.0);
      d2 += gap * gap;
    }
    if (d2 <= prune2) fn(static_cast<std::size_t>(ids_[i]));
  };
  visit(qlo, qhi, prune2, leaf);
}

template <typename Leaf>
void KdIndex::visit(const double* lo, const double* hi, double prune2, Leaf& leaf) const {
  if (ids_.empty()) return;
  std::array<double, 3> dists{};
  double mindist = 0.0;
  for (int d = 0; d < 3; ++d) {
    if (hi[d] < lo_[d]) dists[d] = (lo_[d] - hi[d]) * (lo_[d] - hi[d]);
    if (lo[d] > hi_[d]) dists[d] = (lo[d] - hi_[d]) * (lo[d] - hi_[d]);
    mindist += dists[d];
  }
  if (mindist > prune2) return;
  descend(0, lo, hi, prune2, mindist, dists, leaf);
}

template <typename Leaf>
void KdIndex::descend(std::uint32_t node_id, const double* lo, const double* hi, double prune2,
                      double mindist, std::array<double, 3>& dists, Leaf& leaf) const {
  const Node& node = nodes_[node_id];
  if (node.dim < 0) {
    double leaf_min = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double gap = node.box_lo[d] > hi[d]   ? node.box_lo[d] - hi[d]
                         : node.box_hi[d] < lo[d] ? lo[d] - node.box_hi[d]
                                                  : 0.0;
      leaf_min += gap * gap;
    }
    if (leaf_min > prune2) return;
    for (std::uint32_t i = node.first; i < node.second; ++i) {
      leaf(i, &coords_[3 * static_cast<std::size_t>(i)]);
    }
    return;
  }
  const int d = node.dim;
  const double saved = dists[d];
  // Left child holds coordinates <= div_low, right child coordinates >= div_high.
  const double gap_left = lo[d] > node.div_low ? lo[d] - node.div_low : 0.0;
  const double gap_right = hi[d] < node.div_high ? node.div_high - hi[d] : 0.0;
  const double left_d = std::max(saved, gap_left * gap_left);
  const double right_d = std::max(saved, gap_right * gap_right);

  const double left_min = mindist - saved + left_d;
  if (left_min <= prune2) {
    dists[d] = left_d;
    descend(node.first, lo, hi, prune2, left_min, dists, leaf);
  }
  const double right_min = mindist - saved + right_d;
  if (right_min <= prune2) {
    dists[d] = right_d;
    descend(node.second, lo, hi, prune2, right_min, dists, leaf);
  }
  dists[d] = saved;
}

KdIndex build_index(std::span<const TimedPoint> points);

std::vector<std::size_t> radius_query(const KdIndex& index, const Eigen::Vector3d& center,
                                      double radius);

}  // namespace stnormal
