// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include <Eigen/Core>

#include "stnormal/types.hpp"

namespace stnormal {

/// Mean and population covariance (1/n) of the [x y z t] samples.
struct LocalCovariance {
  Eigen::Vector4d mean;
  Eigen::Matrix4d cov;
};

/// Two-pass mean/covariance. Throws std::invalid_argument on an empty span.
LocalCovariance spatiotemporal_covariance(std::span<const TimedPoint> neighbors);

/// Full eigendecomposition of a symmetric 4x4 matrix by cyclic Jacobi
/// rotations. Eigenvalues ascending; column i of `vectors` pairs with values[i].
struct SymmetricEigen4 {
  Eigen::Vector4d values;
  Eigen::Matrix4d vectors;
  int sweeps = 0;
};

/// Throws std::invalid_argument when |a_ij - a_ji| > 1e-9 * max(1, max|a|),
/// NumericalError on non-finite input or if the sweeps fail to converge.
SymmetricEigen4 jacobi_eigen(const Eigen::Matrix4d& matrix);

struct SmallestEigen {
  double eigenvalue = 0.0;
  Eigen::Vector4d eigenvector = Eigen::Vector4d::UnitW();
  /// Second-smallest over smallest eigenvalue (smallest floored at a tiny epsilon).
  double gap_ratio = 0.0;
  /// The smallest eigenvalue is repeated; the returned vector is then the
  /// computed basis vector of that eigenspace with the largest |t| component.
  bool degenerate = false;
};

SmallestEigen smallest_eigenvector(const Eigen::Matrix4d& cov);

}  // namespace stnormal
