// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "stnormal/synthetic.hpp"
#include "stnormal/types.hpp"

namespace stnormal::test {

// ---------------------------------------------------------------- brute force

inline std::vector<std::size_t> brute_radius(const std::vector<TimedPoint>& points,
                                             const Eigen::Vector3d& c, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - c.x(), dy = points[i].y - c.y(), dz = points[i].z - c.z();
    if (dx * dx + dy * dy + dz * dz <= r * r) out.push_back(i);
  }
  return out;
}

// First point of every distinct floor key, in input order.
inline std::vector<TimedPoint> brute_voxel_dedup(const std::vector<TimedPoint>& points,
                                                 double voxel) {
  std::set<std::tuple<long long, long long, long long>> seen;
  std::vector<TimedPoint> out;
  for (const auto& p : points) {
    const auto key = std::make_tuple(static_cast<long long>(std::floor(p.x / voxel)),
                                     static_cast<long long>(std::floor(p.y / voxel)),
                                     static_cast<long long>(std::floor(p.z / voxel)));
    if (seen.insert(key).second) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------- covariance

inline Eigen::Matrix4d naive_covariance(const std::vector<TimedPoint>& pts) {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  for (const auto& p : pts) mean += Eigen::Vector4d(p.x, p.y, p.z, p.t);
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector4d d = Eigen::Vector4d(p.x, p.y, p.z, p.t) - mean;
    cov += d * d.transpose();
  }
  return cov / static_cast<double>(pts.size());
}

// ---------------------------------------------------------------- eigen oracle

struct OracleEigen {
  std::array<long double, 4> values{};                // ascending
  std::array<std::array<long double, 4>, 4> vectors{};  // vectors[k] pairs with values[k]
};

// Classical cyclic Jacobi in extended precision, run until the off-diagonal
// mass is below 1e-14 of the Frobenius norm (or exactly zero).
inline OracleEigen jacobi_oracle(const Eigen::Matrix4d& m) {
  long double a[4][4], v[4][4];
  long double norm = 0.0L;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      a[i][j] = static_cast<long double>(m(i, j));
      v[i][j] = i == j ? 1.0L : 0.0L;
      norm += a[i][j] * a[i][j];
    }
  }
  norm = std::sqrt(norm);
  for (int sweep = 0; sweep < 100; ++sweep) {
    long double off = 0.0L;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) off += 2.0L * a[p][q] * a[p][q];
    }
    if (std::sqrt(off) <= 1e-14L * norm) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0.0L) continue;
        const long double theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
        const long double t = (theta >= 0 ? 1.0L : -1.0L) /
                              (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
        const long double c = 1.0L / std::sqrt(t * t + 1.0L), s = t * c;
        for (int k = 0; k < 4; ++k) {
          const long double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const long double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const long double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
  OracleEigen out;
  for (int k = 0; k < 4; ++k) {
    out.values[k] = a[order[k]][order[k]];
    for (int r = 0; r < 4; ++r) out.vectors[k][r] = v[r][order[k]];
  }
  return out;
}

inline double residual(const Eigen::Matrix4d& a, const Eigen::Vector4d& v, double lambda) {
  return (a * v - lambda * v).norm();
}

// Random symmetric matrix Q diag(values) Q^T with a Haar-ish orthogonal Q.
inline Eigen::Matrix4d random_symmetric(std::mt19937_64& rng, const Eigen::Vector4d& values) {
  std::normal_distribution<double> g;
  Eigen::Matrix4d q;
  for (int i = 0; i < 16; ++i) q(i) = g(rng);
  // Gram-Schmidt twice for orthonormal columns.
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < 4; ++c) {
      for (int k = 0; k < c; ++k) q.col(c) -= q.col(k).dot(q.col(c)) * q.col(k);
      q.col(c).normalize();
    }
  }
  Eigen::Matrix4d a = q * values.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

// ---------------------------------------------------------------- scenes

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  return v.normalized();
}

// One plane patch of side `size` centred at the origin, translating at `velocity`.
inline SceneSpec moving_plane_scene(const Eigen::Vector3d& normal, const Eigen::Vector3d& velocity,
                                    double noise, std::uint64_t seed, double size = 6.0,
                                    std::size_t points = 6000, std::size_t frames = 21) {
  SceneSpec spec;
  SceneObject plane;
  plane.name = "plane";
  plane.primitive = make_plane(Eigen::Vector3d::Zero(), normal, size, size);
  plane.moving = true;
  plane.motion.velocity = velocity;
  spec.objects.push_back(plane);
  spec.sensor.frame_rate = 10.0;
  spec.sensor.frames = frames;
  spec.sensor.points_per_frame = points;
  spec.sensor.noise_sigma = noise;
  spec.sensor.seed = seed;
  return spec;
}

inline SceneSpec static_plane_scene(std::size_t frames = 21, std::size_t points = 3000) {
  SceneSpec spec;
  SceneObject plane;
  plane.name = "floor";
  plane.primitive = make_plane(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), 4.0, 4.0);
  spec.objects.push_back(plane);
  spec.sensor.frames = frames;
  spec.sensor.points_per_frame = points;
  spec.sensor.time_jitter = 0.0;
  spec.sensor.seed = 5;
  return spec;
}

inline std::filesystem::path source_dir() { return STNORMAL_SOURCE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("stnormal_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace stnormal::test
