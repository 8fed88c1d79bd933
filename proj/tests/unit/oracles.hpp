#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/airy.hpp>

#include "eigsense/sample_block.hpp"

namespace oracle {

using eigsense::Index;

/// Sum of outer products of explicitly stacked vectors, divided by Ns.
template <typename Scalar>
eigsense::Matrix<Scalar> naive_covariance(const eigsense::SampleBlock<Scalar>& block, Index l, Index ns) {
  const Index m = block.channels();
  eigsense::Matrix<Scalar> r = eigsense::Matrix<Scalar>::Zero(m * l, m * l);
  eigsense::Vector<Scalar> v(m * l);
  for (Index n = l - 1; n < l - 1 + ns; ++n) {
    for (Index lag = 0; lag < l; ++lag) {
      for (Index i = 0; i < m; ++i) v(lag * m + i) = block(i, n - lag);
    }
    r += v * v.adjoint();
  }
  return r / static_cast<double>(ns);
}

/// log|det(A - lambda I)| via LU; -inf when exactly singular.
template <typename Scalar>
double log_abs_char_poly(const eigsense::Matrix<Scalar>& a, double lambda) {
  eigsense::Matrix<Scalar> shifted = a;
  for (Index i = 0; i < a.rows(); ++i) shifted(i, i) -= Scalar(lambda);
  Eigen::PartialPivLU<eigsense::Matrix<Scalar>> lu(shifted);
  double total = 0.0;
  const auto& u = lu.matrixLU();
  for (Index i = 0; i < u.rows(); ++i) total += std::log(std::abs(u(i, i)));
  return total;
}

/// Standard normal upper tail by the Maclaurin series of erf (|x| < 6).
inline double q_series(double x) {
  const double z = x / std::sqrt(2.0);
  double term = z;
  double sum = z;
  for (int n = 1; n < 400; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
  }
  const double erf = 2.0 / std::sqrt(M_PI) * sum;
  return 0.5 * (1.0 - erf);
}

inline double q_inverse_bisect(double p) {
  double lo = -6.0, hi = 6.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q_series(mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// y_i(n) = sum_k f(k) x_i(n - k) written as a plain double loop.
inline std::vector<double> convolve(const std::vector<double>& x, const std::vector<double>& f) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t k = 0; k < f.size() && k <= n; ++k) y[n] += f[k] * x[n - k];
  }
  return y;
}

/**
 * F1(s) as the Fredholm determinant det(I - K) on L2(s, inf) with kernel
 * K(x, y) = Ai((x + y) / 2) / 2, discretized by Gauss-Legendre on [s, s + 24].
 */
inline double tw1_fredholm(double s) {
  constexpr unsigned kNodes = 60;
  using rule = boost::math::quadrature::gauss<double, kNodes>;
  const auto& abscissa = rule::abscissa();
  const auto& weights = rule::weights();
  std::vector<double> x, w;
  const double half = 12.0;
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    for (int sign : {-1, 1}) {
      if (abscissa[i] == 0.0 && sign < 0) continue;
      x.push_back(s + half + half * sign * abscissa[i]);
      w.push_back(half * weights[i]);
    }
  }
  const auto n = static_cast<Index>(x.size());
  Eigen::MatrixXd k(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
      k(i, j) = (i == j ? 1.0 : 0.0) -
                std::sqrt(w[a] * w[b]) * 0.5 * boost::math::airy_ai(0.5 * (x[a] + x[b]));
    }
  }
  return k.determinant();
}

/// Largest |F_n(x) - F(x)| for a sorted sample against a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

}  // namespace oracle
