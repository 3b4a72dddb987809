// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "stnormal/kd_index.hpp"
#include "stnormal/types.hpp"

namespace stnormal {

/// How the map's spatial index follows the window.
///  - kPerCloud: one kd-tree per cloud, built once on push; queries visit all
///    trees of the window, oldest first.
///  - kRebuild: one kd-tree over the concatenated window, rebuilt on every push.
/// Both return the same neighbor sets.
enum class IndexStrategy { kPerCloud, kRebuild };

/// FIFO window over the last 2N+1 (downsampled, registered) clouds plus the
/// spatial index over their points. Single writer; const queries may run concurrently.
class SlidingMap {
 public:
  explicit SlidingMap(std::size_t half_window, IndexStrategy strategy = IndexStrategy::kPerCloud);

  std::size_t half_window() const { return half_window_; }
  std::size_t capacity() const { return 2 * half_window_ + 1; }
  std::size_t size() const { return window_.size(); }
  bool full() const { return window_.size() == capacity(); }
  IndexStrategy strategy() const { return strategy_; }

  /// Appends `cloud`, evicting the oldest cloud when the window is full.
  /// Returns the (N+1)-th most recent cloud once the window holds 2N+1 clouds.
  /// Throws OrderError unless frame indices strictly increase.
  std::optional<Cloud> push(Cloud cloud);

  /// The classification target, i.e. the middle cloud of a full window.
  const Cloud& target() const;

  /// Frame indices in window order (oldest first).
  std::vector<std::int64_t> frame_indices() const;

  std::size_t point_count() const;

  /// Concatenation of the window's points, oldest cloud first.
  std::vector<TimedPoint> flat_points() const;

  /// Calls fn(point, slot) for every map point within `radius` of center, where
  /// slot is the window position (0 = oldest) of the point's cloud.
  template <typename Fn>
  void for_each_neighbor(const Eigen::Vector3d& center, double radius, Fn&& fn) const;

  /// Calls fn(point, slot) for a superset of the map points within `radius`
  /// of the box [lo, hi], in the order for_each_neighbor would visit them.
  template <typename Fn>
  void for_each_near_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, double radius,
                         Fn&& fn) const;

 private:
  struct Slot {
    Cloud cloud;
    KdIndex index;  // unused with kRebuild
  };

  void rebuild_flat();

  std::size_t half_window_;
  IndexStrategy strategy_;
  std::deque<Slot> window_;
  std::optional<std::int64_t> last_frame_;

  std::vector<TimedPoint> flat_;
  std::vector<std::uint32_t> flat_slots_;
  KdIndex flat_index_;
};

template <typename Fn>
void SlidingMap::for_each_neighbor(const Eigen::Vector3d& center, double radius, Fn&& fn) const {
  if (strategy_ == IndexStrategy::kPerCloud) {
    check_radius(radius);
    for (std::size_t s = 0; s < window_.size(); ++s) {
      const auto& points = window_[s].cloud.points;
      window_[s].index.for_each_in_radius(center, radius,
                                          [&](std::size_t i) { fn(points[i], s); });
    }
  } else {
    flat_index_.for_each_in_radius(center, radius, [&](std::size_t i) {
      fn(flat_[i], static_cast<std::size_t>(flat_slots_[i]));
    });
  }
}

template <typename Fn>
void SlidingMap::for_each_near_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                                   double radius, Fn&& fn) const {
  if (strategy_ == IndexStrategy::kPerCloud) {
    for (std::size_t s = 0; s < window_.size(); ++s) {
      const auto& points = window_[s].cloud.points;
      window_[s].index.for_each_near_box(lo, hi, radius,
                                         [&](std::size_t i) { fn(points[i], s); });
    }
  } else {
    flat_index_.for_each_near_box(lo, hi, radius, [&](std::size_t i) {
      fn(flat_[i], static_cast<std::size_t>(flat_slots_[i]));
    });
  }
}

}  // namespace stnormal
