#pragma once

#include <string>
#include <utility>

#include "eigsense/errors.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense {

/**
 * ML x ML sample covariance of the stacked vectors
 * [x(n); x(n-1); ...; x(n-L+1)], each x(n) the M-vector of channel samples.
 *
 * Row/column index l*M + i addresses channel i at lag l.
 */
template <typename Scalar>
class StackedCovariance {
 public:
  StackedCovariance() = default;

  StackedCovariance(Matrix<Scalar> matrix, Index channels, Index smoothing, Index samples)
      : matrix_(std::move(matrix)), m_(channels), l_(smoothing), ns_(samples) {
    if (m_ < 1 || l_ < 1 || ns_ < 1) throw DimensionError("covariance needs M, L, Ns >= 1");
    if (matrix_.rows() != m_ * l_ || matrix_.cols() != m_ * l_) {
      throw DimensionError("covariance matrix must be " + std::to_string(m_ * l_) + " square, got " +
                           std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()));
    }
  }

  const Matrix<Scalar>& matrix() const { return matrix_; }
  Index channels() const { return m_; }
  Index smoothing() const { return l_; }
  Index samples() const { return ns_; }
  Index dimension() const { return m_ * l_; }

 private:
  Matrix<Scalar> matrix_;
  Index m_ = 0;
  Index l_ = 0;
  Index ns_ = 0;
};

struct EnergyStatistic {
  double value = 0.0;
  Index channels = 0;
  Index samples = 0;
};

/// Columns are the stacked vectors for n = L-1, L, ..., T-1.
template <typename Scalar>
Matrix<Scalar> stack(const SampleBlock<Scalar>& block, Index smoothing) {
  if (smoothing < 1) throw DimensionError("smoothing factor L must be >= 1");
  if (block.length() < smoothing) {
    throw DimensionError("block of length " + std::to_string(block.length()) +
                         " is shorter than L=" + std::to_string(smoothing));
  }
  const Index m = block.channels();
  const Index count = block.length() - smoothing + 1;
  Matrix<Scalar> out(m * smoothing, count);
  for (Index c = 0; c < count; ++c) {
    const Index n = smoothing - 1 + c;
    for (Index l = 0; l < smoothing; ++l) out.block(l * m, c, m, 1) = block.samples().col(n - l);
  }
  return out;
}

/**
 * R_x(Ns) = (1/Ns) sum_{n=L-1}^{L-2+Ns} xhat(n) xhat(n)^H.
 *
 * Only the first block row is accumulated over the full window (M^2 L Ns
 * multiply-adds). Every other block (a, b) follows from block (a-1, b-1):
 * the two windows differ by one outer product at each end, so the expansion
 * is exact rather than the usual block-Toeplitz approximation.
 */
template <typename Scalar>
StackedCovariance<Scalar> sample_covariance(const SampleBlock<Scalar>& block, Index smoothing,
                                            Index samples) {
  if (smoothing < 1) throw DimensionError("smoothing factor L must be >= 1");
  if (samples < 1) throw DimensionError("sample count Ns must be >= 1");
  const Index m = block.channels();
  const Index dim = m * smoothing;
  if (samples < dim) {
    throw RegimeError("Ns=" + std::to_string(samples) + " is below ML=" + std::to_string(dim) +
                      "; the sample covariance is singular in this regime");
  }
  if (block.length() < smoothing - 1 + samples) {
    throw DimensionError("block of length " + std::to_string(block.length()) + " cannot supply Ns=" +
                         std::to_string(samples) + " stacked vectors with L=" +
                         std::to_string(smoothing));
  }

  const auto& x = block.samples();
  const Index first = smoothing - 1;
  Matrix<Scalar> r(dim, dim);

  const auto lead = x.middleCols(first, samples);
  Matrix<Scalar> tile(m, m);
  for (Index k = 0; k < smoothing; ++k) {
    tile.noalias() = lead * x.middleCols(first - k, samples).adjoint();
    r.block(0, k * m, m, m) = tile;
  }

  // Slide down each block diagonal.
  for (Index a = 1; a < smoothing; ++a) {
    for (Index b = a; b < smoothing; ++b) {
      auto dst = r.block(a * m, b * m, m, m);
      dst = r.block((a - 1) * m, (b - 1) * m, m, m);
      dst.noalias() += x.col(first - a) * x.col(first - b).adjoint();
      dst.noalias() -= x.col(first + samples - a) * x.col(first + samples - b).adjoint();
    }
  }
  for (Index a = 1; a < smoothing; ++a) {
    for (Index b = 0; b < a; ++b) {
      r.block(a * m, b * m, m, m) = r.block(b * m, a * m, m, m).adjoint();
    }
  }

  r /= static_cast<double>(samples);
  Matrix<Scalar> hermitian = (r + r.adjoint()) * Scalar(0.5);
  return StackedCovariance<Scalar>(std::move(hermitian), m, smoothing, samples);
}

/// Uses every available stacked vector: Ns = T - L + 1.
template <typename Scalar>
StackedCovariance<Scalar> sample_covariance(const SampleBlock<Scalar>& block, Index smoothing) {
  if (smoothing < 1 || block.length() < smoothing) {
    throw DimensionError("block too short for smoothing factor L=" + std::to_string(smoothing));
  }
  return sample_covariance(block, smoothing, block.length() - smoothing + 1);
}

/// T(Ns) = (1/(M Ns)) sum_i sum_{n<Ns} |x_i(n)|^2.
template <typename Scalar>
EnergyStatistic energy(const SampleBlock<Scalar>& block, Index samples) {
  if (samples < 1) throw DimensionError("energy needs Ns >= 1");
  if (block.length() < samples) {
    throw DimensionError("block of length " + std::to_string(block.length()) +
                         " is shorter than Ns=" + std::to_string(samples));
  }
  double total = 0.0;
  const auto& x = block.samples();
  for (Index n = 0; n < samples; ++n) {
    for (Index i = 0; i < x.rows(); ++i) total += squared_magnitude(x(i, n));
  }
  return {total / static_cast<double>(block.channels() * samples), block.channels(), samples};
}

/// Average eigenvalue, Tr(R)/ML.
template <typename Scalar>
double eigen_average(const StackedCovariance<Scalar>& cov) {
  double trace = 0.0;
  for (Index d = 0; d < cov.dimension(); ++d) trace += std::real(cov.matrix()(d, d));
  return trace / static_cast<double>(cov.dimension());
}

/// How many stacked vectors contain sample m: ramps up over the first L-1
/// samples, L in the body, and ramps down over the last L-1.
inline Index window_weight(Index m, Index smoothing, Index samples) {
  if (m < 0 || m > smoothing - 2 + samples) return 0;
  if (m <= smoothing - 2) return m + 1;
  if (m <= samples - 1) return smoothing;
  return samples + smoothing - m - 1;
}

/// The average eigenvalue evaluated straight from the samples as a weighted
/// energy, without forming the covariance.
template <typename Scalar>
double eigen_average_from_samples(const SampleBlock<Scalar>& block, Index smoothing, Index samples) {
  if (smoothing < 1 || samples < 1) throw DimensionError("need L >= 1 and Ns >= 1");
  const Index span = smoothing - 1 + samples;
  if (block.length() < span) {
    throw DimensionError("block of length " + std::to_string(block.length()) + " is shorter than " +
                         std::to_string(span));
  }
  double total = 0.0;
  const auto& x = block.samples();
  for (Index m = 0; m < span; ++m) {
    double column = 0.0;
    for (Index i = 0; i < x.rows(); ++i) column += squared_magnitude(x(i, m));
    total += static_cast<double>(window_weight(m, smoothing, samples)) * column;
  }
  return total / static_cast<double>(block.channels() * smoothing * samples);
}

}  // namespace eigsense
