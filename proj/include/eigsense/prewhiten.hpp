#pragma once

// Covariance-domain pre-whitening for noise that went through a known FIR
// receive filter f(0..K).

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eigsense/covariance.hpp"
#include "eigsense/errors.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense {

/// Immutable once built; share one instance across every block.
struct WhiteningTransform {
  std::vector<double> filter_taps;
  /// L x (L+K) banded filter matrix.
  Matrix<double> filter_matrix;
  /// G = H H^T, the filtered-noise covariance for unit input variance.
  Matrix<double> gram;
  /// Positive-definite square root of G.
  Matrix<double> root;
  Matrix<double> root_inverse;
  Index smoothing = 0;
  Index order = 0;
};

inline WhiteningTransform build_whitener(std::vector<double> taps, Index smoothing) {
  if (smoothing < 1) throw DimensionError("smoothing factor L must be >= 1");
  if (taps.empty()) throw DegenerateInputError("whitening filter has no taps");
  bool nonzero = false;
  for (double f : taps) {
    if (!std::isfinite(f)) throw NumericError("non-finite filter tap");
    nonzero = nonzero || f != 0.0;
  }
  if (!nonzero) throw DegenerateInputError("whitening filter is all zeros");

  const Index k = static_cast<Index>(taps.size()) - 1;
  Matrix<double> h = Matrix<double>::Zero(smoothing, smoothing + k);
  for (Index row = 0; row < smoothing; ++row) {
    for (Index j = 0; j <= k; ++j) h(row, row + j) = taps[static_cast<std::size_t>(j)];
  }
  Matrix<double> g = h * h.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix<double>> eig(g);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of the filter Gram matrix failed");
  const auto& values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  if (values.minCoeff() < 1e-12 * largest) {
    throw DegenerateInputError("filter Gram matrix is numerically singular");
  }
  const auto& v = eig.eigenvectors();
  Matrix<double> root = v * values.cwiseSqrt().asDiagonal() * v.transpose();
  Matrix<double> root_inv = v * values.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  // Exact symmetry for downstream Hermitian checks.
  root = 0.5 * (root + root.transpose()).eval();
  root_inv = 0.5 * (root_inv + root_inv.transpose()).eval();

  WhiteningTransform w;
  w.filter_taps = std::move(taps);
  w.filter_matrix = std::move(h);
  w.gram = std::move(g);
  w.root = std::move(root);
  w.root_inverse = std::move(root_inv);
  w.smoothing = smoothing;
  w.order = k;
  return w;
}

/**
 * Q^-1 R Q^-1 applied per channel. With the stacked index l*M + i the
 * operator is Q^-1 (x) I_M: every channel's L lags are whitened by the same
 * matrix and channels are not mixed.
 */
template <typename Scalar>
StackedCovariance<Scalar> whiten_covariance(const WhiteningTransform& w, const StackedCovariance<Scalar>& cov) {
  if (cov.smoothing() != w.smoothing) {
    throw DimensionError("whitener built for L=" + std::to_string(w.smoothing) +
                         " but covariance has L=" + std::to_string(cov.smoothing()));
  }
  const Index m = cov.channels();
  const Index dim = cov.dimension();
  Matrix<Scalar> t = Matrix<Scalar>::Zero(dim, dim);
  for (Index a = 0; a < w.smoothing; ++a) {
    for (Index b = 0; b < w.smoothing; ++b) {
      const double q = w.root_inverse(a, b);
      if (q == 0.0) continue;
      for (Index i = 0; i < m; ++i) t(a * m + i, b * m + i) = Scalar(q);
    }
  }
  Matrix<Scalar> out = t * cov.matrix() * t;
  Matrix<Scalar> herm = (out + out.adjoint()) * Scalar(0.5);
  return StackedCovariance<Scalar>(std::move(herm), m, cov.smoothing(), cov.samples());
}

}  // namespace eigsense
