#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>

#include <Eigen/Core>

#include "eigsense/errors.hpp"

namespace eigsense {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// |x|^2 without the sqrt/hypot detour std::abs would take for complex values.
template <typename Scalar>
inline double squared_magnitude(const Scalar& x) {
  if constexpr (is_complex_v<Scalar>) {
    return std::norm(x);
  } else {
    return static_cast<double>(x) * static_cast<double>(x);
  }
}

template <typename Scalar>
inline Scalar conjugate(const Scalar& x) {
  if constexpr (is_complex_v<Scalar>) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <typename Scalar>
inline bool is_finite(const Scalar& x) {
  if constexpr (is_complex_v<Scalar>) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  } else {
    return std::isfinite(x);
  }
}

/**
 * An M-channel record of baseband samples.
 *
 * Stored column-per-time-instant: column n is the M-vector x(n), so the
 * stacked observation [x(n); x(n-1); ...] reads contiguous columns.
 * Every row has the same length by construction; values must be finite.
 */
template <typename Scalar>
class SampleBlock {
 public:
  using scalar_type = Scalar;

  SampleBlock() = default;

  explicit SampleBlock(Matrix<Scalar> samples, double sample_rate = 0.0)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.rows() < 1 || samples_.cols() < 1) {
      throw DimensionError("SampleBlock needs at least one channel and one sample, got " +
                           std::to_string(samples_.rows()) + "x" + std::to_string(samples_.cols()));
    }
    for (Index n = 0; n < samples_.cols(); ++n) {
      for (Index i = 0; i < samples_.rows(); ++i) {
        if (!is_finite(samples_(i, n))) {
          throw NumericError("SampleBlock contains a non-finite value at channel " +
                             std::to_string(i) + ", sample " + std::to_string(n));
        }
      }
    }
    if (!(sample_rate_ >= 0.0) || !std::isfinite(sample_rate_)) {
      throw DomainError("sample rate must be finite and non-negative");
    }
  }

  Index channels() const { return samples_.rows(); }
  Index length() const { return samples_.cols(); }
  /// Hz; 0 when unknown.
  double sample_rate() const { return sample_rate_; }
  bool empty() const { return samples_.size() == 0; }

  const Matrix<Scalar>& samples() const { return samples_; }
  const Scalar& operator()(Index channel, Index n) const { return samples_(channel, n); }

  /// First `count` samples of every channel.
  SampleBlock prefix(Index count) const {
    if (count < 1 || count > length()) {
      throw DimensionError("prefix length " + std::to_string(count) + " outside [1, " +
                           std::to_string(length()) + "]");
    }
    return SampleBlock(samples_.leftCols(count), sample_rate_);
  }

  SampleBlock scaled(double factor) const {
    return SampleBlock(Matrix<Scalar>(samples_ * Scalar(factor)), sample_rate_);
  }

  friend bool operator==(const SampleBlock& a, const SampleBlock& b) {
    return a.sample_rate_ == b.sample_rate_ && a.samples_.rows() == b.samples_.rows() &&
           a.samples_.cols() == b.samples_.cols() && a.samples_ == b.samples_;
  }

 private:
  Matrix<Scalar> samples_;
  double sample_rate_ = 0.0;
};

using RealBlock = SampleBlock<double>;
using ComplexBlock = SampleBlock<std::complex<double>>;

}  // namespace eigsense
