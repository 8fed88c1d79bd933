#pragma once

// Eigenvalues of dense Hermitian matrices: Householder reduction to
// tridiagonal form followed by implicit-shift QL. Eigenvectors are never
// formed.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "eigsense/errors.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense {

/// Real eigenvalues sorted in descending order.
class EigenSpectrum {
 public:
  EigenSpectrum() = default;
  explicit EigenSpectrum(std::vector<double> values) : values_(std::move(values)) {
    std::stable_sort(values_.begin(), values_.end(), std::greater<>());
  }

  const std::vector<double>& values() const { return values_; }
  Index dimension() const { return static_cast<Index>(values_.size()); }
  double max() const { return values_.front(); }
  double min() const { return values_.back(); }
  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }
  double mean() const { return sum() / static_cast<double>(values_.size()); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

enum class RoundoffClamp {
  none,
  /// Treat the input as positive semidefinite: tiny negative values become 0.
  psd,
};

namespace detail {

// sqrt(a^2 + b^2) without destructive underflow or overflow.
inline double pythag(double a, double b) {
  const double absa = std::abs(a);
  const double absb = std::abs(b);
  if (absa > absb) {
    const double r = absb / absa;
    return absa * std::sqrt(1.0 + r * r);
  }
  if (absb == 0.0) return 0.0;
  const double r = absa / absb;
  return absb * std::sqrt(1.0 + r * r);
}

// Householder reduction of a real symmetric matrix (lower triangle is read,
// `a` is destroyed). On return d holds the diagonal and e[1..n-1] the
// subdiagonal of the similar tridiagonal matrix.
inline void tridiagonalize(Matrix<double>& a, std::vector<double>& d, std::vector<double>& e) {
  const Index n = a.rows();
  d.assign(static_cast<std::size_t>(n), 0.0);
  e.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = n - 1; i > 0; --i) {
    const Index l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (Index k = 0; k < i; ++k) scale += std::abs(a(i, k));
      if (scale == 0.0) {
        e[i] = a(i, l);
      } else {
        for (Index k = 0; k < i; ++k) {
          a(i, k) /= scale;
          h += a(i, k) * a(i, k);
        }
        double f = a(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a(i, l) = f - g;
        f = 0.0;
        for (Index j = 0; j < i; ++j) {
          g = 0.0;
          for (Index k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
          for (Index k = j + 1; k < i; ++k) g += a(k, j) * a(i, k);
          e[j] = g / h;
          f += e[j] * a(i, j);
        }
        const double hh = f / (h + h);
        for (Index j = 0; j < i; ++j) {
          f = a(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (Index k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
        }
      }
    } else {
      e[i] = a(i, l);
    }
  }
  for (Index i = 0; i < n; ++i) d[i] = a(i, i);
}

// Implicit-shift QL on the tridiagonal (d, e) from tridiagonalize(). d is
// overwritten with the eigenvalues in no particular order.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e) {
  constexpr int kMaxSweeps = 50;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const Index n = static_cast<Index>(d.size());
  if (n == 0) return;
  for (Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  for (Index l = 0; l < n; ++l) {
    int sweeps = 0;
    Index m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (sweeps++ == kMaxSweeps) {
          throw NumericError("tridiagonal QL did not converge for eigenvalue " + std::to_string(l) +
                             " within " + std::to_string(kMaxSweeps) + " sweeps");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        Index i = m - 1;
        bool deflated = false;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  double s = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) s += squared_magnitude(a(i, j));
  }
  return std::sqrt(s);
}

}  // namespace detail

/**
 * All eigenvalues of a Hermitian (real symmetric or complex Hermitian) matrix.
 *
 * The input is symmetrized first; anything further than 1e-8 relative from
 * Hermitian is rejected. Complex matrices go through the real embedding
 * [[Re, -Im], [Im, Re]], whose spectrum is the Hermitian spectrum with every
 * value doubled.
 */
template <typename Derived>
EigenSpectrum eigenvalues(const Eigen::MatrixBase<Derived>& input,
                          RoundoffClamp clamp = RoundoffClamp::none) {
  using Scalar = typename Derived::Scalar;
  const Index n = input.rows();
  if (n < 1 || input.cols() != n) {
    throw DimensionError("eigenvalues need a non-empty square matrix, got " +
                         std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (!is_finite(input(i, j))) throw NumericError("matrix has a non-finite entry");
    }
  }
  const Matrix<Scalar> a = input;
  const Matrix<Scalar> skew = a - a.adjoint();
  const double norm = detail::frobenius_norm(a);
  if (detail::frobenius_norm(skew) > 1e-8 * norm) {
    throw ContractViolation("matrix is not Hermitian to 1e-8 relative");
  }
  const Matrix<Scalar> herm = (a + a.adjoint()) * Scalar(0.5);

  std::vector<double> d;
  std::vector<double> e;
  std::vector<double> values;
  if constexpr (is_complex_v<Scalar>) {
    Matrix<double> embed(2 * n, 2 * n);
    embed.topLeftCorner(n, n) = herm.real();
    embed.bottomRightCorner(n, n) = herm.real();
    embed.topRightCorner(n, n) = -herm.imag();
    embed.bottomLeftCorner(n, n) = herm.imag();
    detail::tridiagonalize(embed, d, e);
    detail::tridiagonal_ql(d, e);
    std::stable_sort(d.begin(), d.end(), std::greater<>());
    values.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) values[k] = 0.5 * (d[2 * k] + d[2 * k + 1]);
  } else {
    Matrix<double> work = herm;
    detail::tridiagonalize(work, d, e);
    detail::tridiagonal_ql(d, e);
    values = std::move(d);
  }

  if (clamp == RoundoffClamp::psd) {
    double trace = 0.0;
    for (Index k = 0; k < n; ++k) trace += std::real(herm(k, k));
    const double floor = -1e-10 * trace / static_cast<double>(n);
    for (double& v : values) {
      if (v < 0.0 && v > floor) v = 0.0;
    }
  }
  return EigenSpectrum(std::move(values));
}

}  // namespace eigsense
