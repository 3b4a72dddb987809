// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/sliding_map.hpp"

#include <stdexcept>
#include <string>

#include "stnormal/error.hpp"

namespace stnormal {

SlidingMap::SlidingMap(std::size_t half_window, IndexStrategy strategy)
    : half_window_(half_window), strategy_(strategy) {
  if (half_window < 1) throw std::invalid_argument("window half-width N must be >= 1");
}

std::optional<Cloud> SlidingMap::push(Cloud cloud) {
  if (last_frame_ && cloud.frame_index <= *last_frame_) {
    throw OrderError("frame " + std::to_string(cloud.frame_index) + " pushed after frame " +
                     std::to_string(*last_frame_));
  }
  last_frame_ = cloud.frame_index;

  if (full()) window_.pop_front();
  Slot slot;
  if (strategy_ == IndexStrategy::kPerCloud) slot.index = KdIndex(cloud.points);
  slot.cloud = std::move(cloud);
  window_.push_back(std::move(slot));
  if (strategy_ == IndexStrategy::kRebuild) rebuild_flat();

  if (!full()) return std::nullopt;
  return window_[half_window_].cloud;
}

void SlidingMap::rebuild_flat() {
  flat_.clear();
  flat_slots_.clear();
  for (std::size_t s = 0; s < window_.size(); ++s) {
    const auto& points = window_[s].cloud.points;
    flat_.insert(flat_.end(), points.begin(), points.end());
    flat_slots_.insert(flat_slots_.end(), points.size(), static_cast<std::uint32_t>(s));
  }
  flat_index_ = KdIndex(flat_);
}

const Cloud& SlidingMap::target() const {
  if (!full()) throw WindowNotFullError();
  return window_[half_window_].cloud;
}

std::vector<std::int64_t> SlidingMap::frame_indices() const {
  std::vector<std::int64_t> out;
  out.reserve(window_.size());
  for (const auto& slot : window_) out.push_back(slot.cloud.frame_index);
  return out;
}

std::size_t SlidingMap::point_count() const {
  std::size_t n = 0;
  for (const auto& slot : window_) n += slot.cloud.points.size();
  return n;
}

std::vector<TimedPoint> SlidingMap::flat_points() const {
  std::vector<TimedPoint> out;
  out.reserve(point_count());
  for (const auto& slot : window_) {
    out.insert(out.end(), slot.cloud.points.begin(), slot.cloud.points.end());
  }
  return out;
}

}  // namespace stnormal
