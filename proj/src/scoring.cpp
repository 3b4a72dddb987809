// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/scoring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "stnormal/error.hpp"
#include "stnormal/kd_index.hpp"
#include "stnormal/spatiotemporal.hpp"

namespace stnormal {

namespace {

// Queries are answered in spatially coherent batches: one box query per batch
// gathers candidates, then each point applies the exact ball test.
constexpr std::size_t kBatchSize = 128;
constexpr double kBatchExtent = 8.0;  // in radii, per axis

struct Scratch {
  // Candidates in structure-of-arrays layout, in map visiting order.
  std::vector<double> cx, cy, cz, ct;
  std::vector<std::uint32_t> cslot;
  // Candidates counting-sorted into a local grid of radius-sized cells.
  std::vector<std::uint32_t> cell_of, cell_start, binned;
  std::vector<double> bx, by, bz;
  std::vector<std::uint64_t> hit_bits;
  std::vector<TimedPoint> neighbors;
  std::vector<std::uint64_t> slots_seen;

  void reset(std::size_t slots) {
    neighbors.clear();
    slots_seen.assign((slots + 63) / 64, 0);
  }
  void add(double x, double y, double z, double t, std::size_t slot) {
    neighbors.push_back({x, y, z, t});
    slots_seen[slot / 64] |= std::uint64_t{1} << (slot % 64);
  }
};

ScoredPoint evaluate(const TimedPoint& point, const Scratch& scratch, const Params& params) {
  std::size_t frames = 0;
  for (const auto word : scratch.slots_seen) frames += static_cast<std::size_t>(std::popcount(word));

  ScoredPoint out;
  out.point = point;
  if (scratch.neighbors.size() < params.min_neighbors || frames < params.min_distinct_frames) {
    return out;
  }
  const LocalCovariance local = spatiotemporal_covariance(scratch.neighbors);
  const SmallestEigen eig = smallest_eigenvector(local.cov);
  out.valid = true;
  out.score = std::min(1.0, std::abs(eig.eigenvector[3]));
  out.label = classify_score(out.score, out.valid, params.threshold);
  return out;
}

std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffULL;
  v = (v | v << 16) & 0x1f0000ff0000ffULL;
  v = (v | v << 8) & 0x100f00f00f00f00fULL;
  v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
  v = (v | v << 2) & 0x1249249249249249ULL;
  return v;
}

// Point indices in Morton order of `cell`-sized cells. Only affects speed.
std::vector<std::uint32_t> spatial_order(std::span<const TimedPoint> points, double cell) {
  double lo[3] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    lo[0] = std::min(lo[0], p.x);
    lo[1] = std::min(lo[1], p.y);
    lo[2] = std::min(lo[2], p.z);
  }
  auto key = [&](double v, int d) {
    const double k = std::floor((v - lo[d]) / cell);
    return static_cast<std::uint64_t>(std::clamp(k, 0.0, double{0x1fffff}));
  };
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    keyed[i] = {spread_bits(key(p.x, 0)) | spread_bits(key(p.y, 1)) << 1 |
                    spread_bits(key(p.z, 2)) << 2,
                static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint32_t> order(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) order[i] = keyed[i].second;
  return order;
}

// Splits `order` into runs of at most kBatchSize points whose bounding box
// stays within kBatchExtent radii per axis.
std::vector<std::size_t> batch_bounds(std::span<const TimedPoint> points,
                                      std::span<const std::uint32_t> order, double radius) {
  const std::size_t max_size = kBatchSize;
  const double max_extent = kBatchExtent * radius;
  std::vector<std::size_t> bounds{0};
  Eigen::Vector3d lo, hi;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Eigen::Vector3d p = points[order[i]].xyz();
    if (i == bounds.back()) {
      lo = hi = p;
      continue;
    }
    const Eigen::Vector3d nlo = lo.cwiseMin(p), nhi = hi.cwiseMax(p);
    if (i - bounds.back() >= max_size || ((nhi - nlo).array() > max_extent).any()) {
      bounds.push_back(i);
      lo = hi = p;
    } else {
      lo = nlo;
      hi = nhi;
    }
  }
  bounds.push_back(order.size());
  return bounds;
}

void score_batch(std::span<const TimedPoint> points, std::span<const std::uint32_t> batch,
                 const SlidingMap& map, const Params& params, Scratch& scratch,
                 std::vector<ScoredPoint>& out) {
  const double radius = params.radius;
  Eigen::Vector3d lo = points[batch[0]].xyz(), hi = lo;
  for (const auto i : batch) {
    lo = lo.cwiseMin(points[i].xyz());
    hi = hi.cwiseMax(points[i].xyz());
  }
  const double time_scale = params.time_scale;
  scratch.cx.clear();
  scratch.cy.clear();
  scratch.cz.clear();
  scratch.ct.clear();
  scratch.cslot.clear();
  map.for_each_near_box(lo, hi, radius, [&](const TimedPoint& q, std::size_t slot) {
    scratch.cx.push_back(q.x);
    scratch.cy.push_back(q.y);
    scratch.cz.push_back(q.z);
    scratch.ct.push_back(q.t * time_scale);
    scratch.cslot.push_back(static_cast<std::uint32_t>(slot));
  });
  const std::size_t n = scratch.cx.size();
  const double* cx = scratch.cx.data();
  const double* cy = scratch.cy.data();
  const double* cz = scratch.cz.data();

  // Cells are a hair wider than the radius so that rounding in the cell
  // index can never put a true neighbor two cells away.
  const double cell = radius * (1.0 + 1e-6);
  const Eigen::Vector3d origin = lo.array() - cell;
  int dims[3];
  for (int d = 0; d < 3; ++d) dims[d] = static_cast<int>(std::floor((hi[d] - lo[d]) / cell)) + 3;
  const double inv_cell = 1.0 / cell;
  auto index_of = [&](double v, int d) {
    const double k = std::clamp((v - origin[d]) * inv_cell, 0.0, static_cast<double>(dims[d] - 1));
    return static_cast<int>(k);
  };
  const std::size_t cells = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  auto& cell_of = scratch.cell_of;
  auto& cell_start = scratch.cell_start;
  auto& binned = scratch.binned;
  cell_of.resize(n);
  cell_start.assign(cells + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    cell_of[j] = static_cast<std::uint32_t>(
        (index_of(cx[j], 0) * dims[1] + index_of(cy[j], 1)) * dims[2] + index_of(cz[j], 2));
    ++cell_start[cell_of[j] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start[c + 1] += cell_start[c];
  binned.resize(n);
  for (std::size_t j = 0; j < n; ++j) binned[cell_start[cell_of[j]]++] = static_cast<std::uint32_t>(j);
  for (std::size_t c = cells; c > 0; --c) cell_start[c] = cell_start[c - 1];
  cell_start[0] = 0;
  auto& bx = scratch.bx;
  auto& by = scratch.by;
  auto& bz = scratch.bz;
  bx.resize(n);
  by.resize(n);
  bz.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    bx[k] = cx[binned[k]];
    by[k] = cy[binned[k]];
    bz[k] = cz[binned[k]];
  }

  // Hits are marked in a bitmap over candidate positions and read back in
  // ascending order, so neighbors keep the map's visiting order.
  auto& bits = scratch.hit_bits;
  bits.assign((n + 63) / 64, 0);
  const double r2 = radius * radius;
  for (const auto i : batch) {
    const TimedPoint& p = points[i];
    // Queries lie inside [lo, hi], i.e. in interior cells up to rounding.
    const int ix = std::clamp(index_of(p.x, 0), 1, dims[0] - 2);
    const int iy = std::clamp(index_of(p.y, 1), 1, dims[1] - 2);
    const int iz = std::clamp(index_of(p.z, 2), 1, dims[2] - 2);
    for (int x = ix - 1; x <= ix + 1; ++x) {
      for (int y = iy - 1; y <= iy + 1; ++y) {
        const std::size_t row = (static_cast<std::size_t>(x) * dims[1] + y) * dims[2];
        const std::uint32_t begin = cell_start[row + iz - 1];
        const std::uint32_t end = cell_start[row + iz + 2];
        for (std::uint32_t k = begin; k < end; ++k) {
          const double dx = bx[k] - p.x;
          const double dy = by[k] - p.y;
          const double dz = bz[k] - p.z;
          const std::uint64_t hit = dx * dx + dy * dy + dz * dz <= r2;
          const std::uint32_t j = binned[k];
          bits[j / 64] |= hit << (j % 64);
        }
      }
    }
    scratch.reset(map.capacity());
    for (std::size_t w = 0; w < bits.size(); ++w) {
      std::uint64_t word = bits[w];
      bits[w] = 0;
      while (word) {
        const std::size_t j = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
        word &= word - 1;
        scratch.add(cx[j], cy[j], cz[j], scratch.ct[j], scratch.cslot[j]);
      }
    }
    out[i] = evaluate(p, scratch, params);
  }
}

}  // namespace

ScoredPoint dynamic_score(const TimedPoint& point, const SlidingMap& map, const Params& params) {
  if (!map.full()) throw WindowNotFullError();
  Scratch scratch;
  scratch.reset(map.capacity());
  const double time_scale = params.time_scale;
  map.for_each_neighbor(point.xyz(), params.radius, [&](const TimedPoint& q, std::size_t slot) {
    scratch.add(q.x, q.y, q.z, q.t * time_scale, slot);
  });
  return evaluate(point, scratch, params);
}

std::vector<ScoredPoint> score_cloud(const Cloud& cloud, const SlidingMap& map,
                                     const Params& params, std::size_t threads) {
  if (!map.full()) throw WindowNotFullError();
  check_radius(params.radius);
  const std::span<const TimedPoint> points = cloud.points;
  std::vector<ScoredPoint> out(points.size());
  if (points.empty()) return out;

  const std::vector<std::uint32_t> order = spatial_order(points, params.radius);
  const std::vector<std::size_t> bounds = batch_bounds(points, order, params.radius);
  const std::size_t batches = bounds.size() - 1;

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, points.size() / 1024));

  auto run = [&](std::size_t first_batch, std::size_t last_batch) {
    Scratch scratch;
    for (std::size_t b = first_batch; b < last_batch; ++b) {
      const std::span<const std::uint32_t> batch(order.data() + bounds[b], bounds[b + 1] - bounds[b]);
      score_batch(points, batch, map, params, scratch, out);
    }
  };
  if (threads <= 1) {
    run(0, batches);
    return out;
  }
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (batches + threads - 1) / threads;
    for (std::size_t begin = 0; begin < batches; begin += chunk) {
      workers.emplace_back(run, begin, std::min(batches, begin + chunk));
    }
  }
  return out;
}

Classification partition(std::span<const ScoredPoint> scored) {
  Classification out;
  for (const auto& sp : scored) {
    (sp.label == Label::kDynamic ? out.dynamic_points : out.static_points).push_back(sp);
  }
  return out;
}

Classification classify_cloud(const Cloud& cloud, const SlidingMap& map, const Params& params,
                              std::size_t threads) {
  return partition(score_cloud(cloud, map, params, threads));
}

std::vector<Label> upsample_labels(const Cloud& full_cloud,
                                   std::span<const ScoredPoint> dynamic_points, double radius) {
  check_radius(radius);
  std::vector<Label> labels(full_cloud.points.size(), Label::kStatic);
  if (dynamic_points.empty()) return labels;
  const KdIndex index(full_cloud.points);
  for (const auto& sp : dynamic_points) {
    index.for_each_in_radius(sp.point.xyz(), radius,
                             [&](std::size_t i) { labels[i] = Label::kDynamic; });
  }
  return labels;
}

double latency(const Params& params, double frame_rate) {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw std::invalid_argument("frame rate must be positive");
  }
  return static_cast<double>(params.half_window) / frame_rate;
}

}  // namespace stnormal
