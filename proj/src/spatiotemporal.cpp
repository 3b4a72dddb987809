// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/spatiotemporal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stnormal/error.hpp"

namespace stnormal {

namespace {

constexpr int kMaxSweeps = 64;
constexpr double kConvergence = 1e-13;   // off-diagonal Frobenius norm relative to ||A||_F
constexpr double kTieTolerance = 1e-12;  // relative to the largest |eigenvalue|

template <int P, int Q>
inline void rotate(double (&a)[4][4], double (&v)[4][4]) {
  const double apq = a[P][Q];
  if (apq == 0.0) return;
  const double theta = (a[Q][Q] - a[P][P]) / (2.0 * apq);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (!std::isfinite(theta * theta)) t = 0.5 / std::abs(theta);
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  a[P][P] -= t * apq;
  a[Q][Q] += t * apq;
  a[P][Q] = a[Q][P] = 0.0;
  for (int r = 0; r < 4; ++r) {
    if (r == P || r == Q) continue;
    const double arp = a[r][P];
    const double arq = a[r][Q];
    a[r][P] = a[P][r] = arp - s * (arq + tau * arp);
    a[r][Q] = a[Q][r] = arq + s * (arp - tau * arq);
  }
  for (int r = 0; r < 4; ++r) {
    const double vrp = v[r][P];
    const double vrq = v[r][Q];
    v[r][P] = vrp - s * (vrq + tau * vrp);
    v[r][Q] = vrq + s * (vrp - tau * vrq);
  }
}

}  // namespace

LocalCovariance spatiotemporal_covariance(std::span<const TimedPoint> neighbors) {
  if (neighbors.empty()) throw std::invalid_argument("covariance of an empty neighborhood");
  const double inv_n = 1.0 / static_cast<double>(neighbors.size());

  double mx = 0.0, my = 0.0, mz = 0.0, mt = 0.0;
  for (const auto& p : neighbors) {
    mx += p.x;
    my += p.y;
    mz += p.z;
    mt += p.t;
  }
  mx *= inv_n;
  my *= inv_n;
  mz *= inv_n;
  mt *= inv_n;

  double xx = 0, xy = 0, xz = 0, xt = 0, yy = 0, yz = 0, yt = 0, zz = 0, zt = 0, tt = 0;
  for (const auto& p : neighbors) {
    const double dx = p.x - mx, dy = p.y - my, dz = p.z - mz, dt = p.t - mt;
    xx += dx * dx;
    xy += dx * dy;
    xz += dx * dz;
    xt += dx * dt;
    yy += dy * dy;
    yz += dy * dz;
    yt += dy * dt;
    zz += dz * dz;
    zt += dz * dt;
    tt += dt * dt;
  }

  LocalCovariance out;
  out.mean << mx, my, mz, mt;
  out.cov << xx, xy, xz, xt,  //
      xy, yy, yz, yt,         //
      xz, yz, zz, zt,         //
      xt, yt, zt, tt;
  out.cov *= inv_n;
  return out;
}

SymmetricEigen4 jacobi_eigen(const Eigen::Matrix4d& matrix) {
  if (!matrix.allFinite()) throw NumericalError("non-finite entry in symmetric eigenproblem");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if (((matrix - matrix.transpose()).cwiseAbs().maxCoeff()) > 1e-9 * scale) {
    throw std::invalid_argument("matrix is not symmetric");
  }

  double a[4][4];
  double v[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  double norm2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      a[i][j] = 0.5 * (matrix(i, j) + matrix(j, i));
      norm2 += a[i][j] * a[i][j];
    }
  }
  const double limit2 = kConvergence * kConvergence * norm2;

  int sweep = 0;
  for (;; ++sweep) {
    double off2 = 0.0;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) off2 += 2.0 * a[p][q] * a[p][q];
    }
    if (off2 <= limit2) break;
    if (sweep == kMaxSweeps) throw NumericalError("Jacobi eigensolver did not converge");

    rotate<0, 1>(a, v);
    rotate<0, 2>(a, v);
    rotate<0, 3>(a, v);
    rotate<1, 2>(a, v);
    rotate<1, 3>(a, v);
    rotate<2, 3>(a, v);
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
  SymmetricEigen4 out;
  out.sweeps = sweep;
  for (int k = 0; k < 4; ++k) {
    const int i = order[k];
    out.values[k] = a[i][i];
    for (int r = 0; r < 4; ++r) out.vectors(r, k) = v[r][i];
  }
  return out;
}

SmallestEigen smallest_eigenvector(const Eigen::Matrix4d& cov) {
  const SymmetricEigen4 eig = jacobi_eigen(cov);
  const double magnitude = eig.values.cwiseAbs().maxCoeff();
  const double tie = kTieTolerance * magnitude;

  int chosen = 0;
  int tied = 1;
  for (int k = 1; k < 4 && eig.values[k] - eig.values[0] <= tie; ++k) {
    ++tied;
    if (std::abs(eig.vectors(3, k)) > std::abs(eig.vectors(3, chosen))) chosen = k;
  }

  SmallestEigen out;
  out.degenerate = tied > 1;
  out.eigenvalue = eig.values[0];
  // Rounding can leave a PSD matrix's null eigenvalue slightly negative.
  if (out.eigenvalue < 0.0 && -out.eigenvalue <= tie) out.eigenvalue = 0.0;

  Eigen::Vector4d vec = eig.vectors.col(chosen);
  vec.normalize();
  // Deterministic sign: t component non-negative, else the largest component positive.
  Eigen::Index largest = 0;
  vec.cwiseAbs().maxCoeff(&largest);
  if (vec[3] < 0.0 || (vec[3] == 0.0 && vec[largest] < 0.0)) vec = -vec;
  out.eigenvector = vec;

  const double floor = std::max(std::numeric_limits<double>::min(), 1e-15 * magnitude);
  out.gap_ratio = std::max(0.0, eig.values[1]) / std::max(eig.values[0], floor);
  return out;
}

}  // namespace stnormal
