#pragma once

// Maximum-minimum eigenvalue (MME), energy-with-minimum-eigenvalue (EME) and
// classical energy detection, their false-alarm thresholds, and the
// approximate detection-probability predictors for the two eigenvalue tests.

#include <cmath>
#include <string>
#include <vector>

#include "eigsense/covariance.hpp"
#include "eigsense/eig.hpp"
#include "eigsense/errors.hpp"
#include "eigsense/rmt.hpp"
#include "eigsense/sample_block.hpp"
#include "eigsense/signal_gen.hpp"

namespace eigsense {

enum class DetectorKind { mme, eme, energy };

inline std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::mme:
      return "MME";
    case DetectorKind::eme:
      return "EME";
    case DetectorKind::energy:
      return "ED";
  }
  return "unknown";
}

struct DetectorParams {
  Index channels = 0;
  /// Smoothing factor L; 1 for energy detection.
  Index smoothing = 1;
  Index samples = 0;
  double pfa = 0.0;
};

struct DetectorVerdict {
  double statistic = 0.0;
  double threshold = 0.0;
  /// true means "signal present".
  bool decision = false;
  DetectorKind detector = DetectorKind::mme;
  DetectorParams params{};
};

namespace detail {

inline void check_pfa(double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) {
    throw DomainError("target false-alarm probability must lie in (0, 1), got " + std::to_string(pfa));
  }
}

inline void check_regime(Index samples, Index channels, Index smoothing) {
  if (channels < 1 || smoothing < 1) throw DimensionError("need M >= 1 and L >= 1");
  if (samples <= channels * smoothing) {
    throw RegimeError("need Ns > ML, got Ns=" + std::to_string(samples) +
                      ", ML=" + std::to_string(channels * smoothing));
  }
}

}  // namespace detail

/// gamma_1 such that P(lambda_max / lambda_min > gamma_1 | H0) ~ pfa.
inline double mme_threshold(Index samples, Index channels, Index smoothing, double pfa,
                            const TracyWidomTable& tw = default_tw_table()) {
  detail::check_pfa(pfa);
  detail::check_regime(samples, channels, smoothing);
  const double sn = std::sqrt(static_cast<double>(samples));
  const double sd = std::sqrt(static_cast<double>(channels * smoothing));
  const double ratio = ((sn + sd) * (sn + sd)) / ((sn - sd) * (sn - sd));
  const double spread = std::pow(sn + sd, -2.0 / 3.0) /
                        std::pow(static_cast<double>(samples) * static_cast<double>(channels * smoothing), 1.0 / 6.0);
  return ratio * (1.0 + spread * tw_quantile(tw, 1.0 - pfa));
}

/// gamma_2 such that P(T(Ns) / lambda_min > gamma_2 | H0) ~ pfa.
inline double eme_threshold(Index samples, Index channels, Index smoothing, double pfa) {
  detail::check_pfa(pfa);
  detail::check_regime(samples, channels, smoothing);
  const double ns = static_cast<double>(samples);
  const double sn = std::sqrt(ns);
  const double sd = std::sqrt(static_cast<double>(channels * smoothing));
  return (std::sqrt(2.0 / (static_cast<double>(channels) * ns)) * q_inverse(pfa) + 1.0) * ns /
         ((sn - sd) * (sn - sd));
}

/// Threshold on T(Ns) / sigma_hat^2 from the Gaussian approximation of the
/// average energy (mean sigma^2, variance 2 sigma^4 / (M Ns)).
inline double energy_threshold(Index channels, Index samples, double pfa) {
  detail::check_pfa(pfa);
  if (channels < 1 || samples < 1) throw DimensionError("need M >= 1 and Ns >= 1");
  return 1.0 + std::sqrt(2.0 / (static_cast<double>(channels) * static_cast<double>(samples))) *
                   q_inverse(pfa);
}

/// The three numbers every detector needs from one block.
struct EigenStatistics {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  /// T(Ns) for raw blocks; the average eigenvalue for whitened covariances.
  double energy = 0.0;

  double mme() const { return lambda_max / lambda_min; }
  double eme() const { return energy / lambda_min; }
};

/// Extreme eigenvalues of a covariance, rejecting numerically singular ones.
template <typename Scalar>
EigenStatistics eigen_statistics(const StackedCovariance<Scalar>& cov, double energy_value) {
  const EigenSpectrum spectrum = eigenvalues(cov.matrix(), RoundoffClamp::psd);
  const double lmax = spectrum.max();
  const double lmin = spectrum.min();
  if (!(lmin > 0.0) || lmin < 1e-30 * lmax) {
    throw SingularCovarianceError("sample covariance is singular (lambda_min=" + std::to_string(lmin) +
                                  ", lambda_max=" + std::to_string(lmax) + ")");
  }
  return {lmax, lmin, energy_value};
}

template <typename Scalar>
EigenStatistics eigen_statistics(const SampleBlock<Scalar>& block, Index smoothing, Index samples) {
  const auto cov = sample_covariance(block, smoothing, samples);
  return eigen_statistics(cov, energy(block, samples).value);
}

template <typename Scalar>
DetectorVerdict detect_mme(const StackedCovariance<Scalar>& cov, double pfa,
                           const TracyWidomTable& tw = default_tw_table()) {
  const double threshold = mme_threshold(cov.samples(), cov.channels(), cov.smoothing(), pfa, tw);
  const EigenStatistics stats = eigen_statistics(cov, eigen_average(cov));
  const double statistic = stats.mme();
  return {statistic, threshold, statistic > threshold, DetectorKind::mme,
          {cov.channels(), cov.smoothing(), cov.samples(), pfa}};
}

/// Algorithm: R_x(Ns), its extreme eigenvalues, then lambda_max/lambda_min > gamma_1.
template <typename Scalar>
DetectorVerdict detect_mme(const SampleBlock<Scalar>& block, Index smoothing, Index samples, double pfa,
                           const TracyWidomTable& tw = default_tw_table()) {
  const double threshold = mme_threshold(samples, block.channels(), smoothing, pfa, tw);
  const auto cov = sample_covariance(block, smoothing, samples);
  const EigenStatistics stats = eigen_statistics(cov, 0.0);
  const double statistic = stats.mme();
  return {statistic, threshold, statistic > threshold, DetectorKind::mme,
          {block.channels(), smoothing, samples, pfa}};
}

/// Covariance-domain EME, with the energy supplied by the caller.
template <typename Scalar>
DetectorVerdict detect_eme(const StackedCovariance<Scalar>& cov, double energy_value, double pfa) {
  const double threshold = eme_threshold(cov.samples(), cov.channels(), cov.smoothing(), pfa);
  const EigenStatistics stats = eigen_statistics(cov, energy_value);
  const double statistic = stats.eme();
  return {statistic, threshold, statistic > threshold, DetectorKind::eme,
          {cov.channels(), cov.smoothing(), cov.samples(), pfa}};
}

/// Algorithm: T(Ns) / lambda_min(R_x(Ns)) > gamma_2.
template <typename Scalar>
DetectorVerdict detect_eme(const SampleBlock<Scalar>& block, Index smoothing, Index samples, double pfa) {
  const double threshold = eme_threshold(samples, block.channels(), smoothing, pfa);
  const EigenStatistics stats = eigen_statistics(block, smoothing, samples);
  const double statistic = stats.eme();
  return {statistic, threshold, statistic > threshold, DetectorKind::eme,
          {block.channels(), smoothing, samples, pfa}};
}

/// T(Ns) / sigma_hat^2 against the Gaussian-approximation threshold.
template <typename Scalar>
DetectorVerdict detect_energy(const SampleBlock<Scalar>& block, Index samples, double assumed_sigma2,
                              double pfa) {
  if (!(assumed_sigma2 > 0.0) || !std::isfinite(assumed_sigma2)) {
    throw DomainError("assumed noise variance must be positive and finite");
  }
  const double threshold = energy_threshold(block.channels(), samples, pfa);
  const double statistic = energy(block, samples).value / assumed_sigma2;
  return {statistic, threshold, statistic > threshold, DetectorKind::energy,
          {block.channels(), 1, samples, pfa}};
}

/// Eigen-structure of the noiseless statistical covariance H R_s H^T.
struct SignalSpectrumSummary {
  double rho_max = 0.0;
  double rho_min = 0.0;
  /// Tr(H R_s H^T) / ML.
  double trace_over_dim = 0.0;
  double sigma2 = 1.0;

  void validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("noise variance must be positive");
    if (!(rho_min >= 0.0) || !(rho_max >= rho_min)) {
      throw DomainError("signal spectrum needs rho_max >= rho_min >= 0");
    }
    if (!(trace_over_dim >= rho_min * (1.0 - 1e-12) && trace_over_dim <= rho_max * (1.0 + 1e-12))) {
      throw DomainError("average signal eigenvalue must lie between rho_min and rho_max");
    }
  }
};

/**
 * The ML x (N + PL) block-Toeplitz filtering matrix mapping the stacked
 * source vector to the stacked received vector. Source j occupies a column
 * block of width N_j + L; lag l of channel i sits in row l*M + i and
 * carries h_ij(k) in column l + k of that block.
 */
inline Matrix<double> filtering_matrix(const FirChannelSet& channels, Index smoothing) {
  if (smoothing < 1) throw DimensionError("smoothing factor L must be >= 1");
  const Index m = channels.channels();
  const Index p = channels.sources();
  Matrix<double> h = Matrix<double>::Zero(m * smoothing, channels.total_order() + p * smoothing);
  Index col0 = 0;
  for (Index j = 0; j < p; ++j) {
    const Index width = channels.order(j) + smoothing;
    for (Index l = 0; l < smoothing; ++l) {
      for (Index k = 0; k <= channels.order(j); ++k) {
        for (Index i = 0; i < m; ++i) h(l * m + i, col0 + l + k) = channels.tap(i, j, k);
      }
    }
    col0 += width;
  }
  return h;
}

/// Summary for a general source covariance R_s of size (N + PL).
inline SignalSpectrumSummary signal_spectrum_summary(const FirChannelSet& channels,
                                                     const Matrix<double>& source_cov, Index smoothing,
                                                     double sigma2) {
  const Matrix<double> h = filtering_matrix(channels, smoothing);
  if (source_cov.rows() != h.cols() || source_cov.cols() != h.cols()) {
    throw DimensionError("source covariance must be " + std::to_string(h.cols()) + " square");
  }
  if (!(sigma2 > 0.0)) throw DomainError("noise variance must be positive");
  const Matrix<double> signal_cov = h * source_cov * h.transpose();
  const EigenSpectrum rho = eigenvalues(signal_cov, RoundoffClamp::psd);
  SignalSpectrumSummary s;
  s.rho_max = std::max(rho.max(), 0.0);
  s.rho_min = std::clamp(rho.min(), 0.0, s.rho_max);
  s.trace_over_dim = std::clamp(signal_cov.trace() / static_cast<double>(signal_cov.rows()), s.rho_min, s.rho_max);
  s.sigma2 = sigma2;
  return s;
}

/// iid sources: R_s = diag(sigma_j^2 I).
inline SignalSpectrumSummary signal_spectrum_summary(const FirChannelSet& channels,
                                                     const std::vector<double>& source_variances,
                                                     Index smoothing, double sigma2) {
  if (static_cast<Index>(source_variances.size()) != channels.sources()) {
    throw DimensionError("need one variance per source");
  }
  const Index cols = channels.total_order() + channels.sources() * smoothing;
  Matrix<double> rs = Matrix<double>::Zero(cols, cols);
  Index c = 0;
  for (Index j = 0; j < channels.sources(); ++j) {
    const double v = source_variances[static_cast<std::size_t>(j)];
    if (!(v >= 0.0)) throw DomainError("source variance must be non-negative");
    for (Index k = 0; k < channels.order(j) + smoothing; ++k, ++c) rs(c, c) = v;
  }
  return signal_spectrum_summary(channels, rs, smoothing, sigma2);
}

/// Approximate MME detection probability for a given signal spectrum.
inline double predict_pd_mme(const SignalSpectrumSummary& s, Index samples, Index channels, Index smoothing,
                             double gamma1, const TracyWidomTable& tw = default_tw_table()) {
  s.validate();
  const WishartGeometry g = wishart_geometry(samples, channels, smoothing);
  const double ns = static_cast<double>(samples);
  const double arg = (gamma1 * ns + ns * (gamma1 * s.rho_min - s.rho_max) / s.sigma2 - g.mu) / g.nu;
  return 1.0 - tw_cdf(tw, arg);
}

/// Approximate EME detection probability; lambda_min is estimated midway
/// between the signal-plus-sigma^2 and Bai-Yin deflated values.
inline double predict_pd_eme(const SignalSpectrumSummary& s, Index samples, Index channels, Index smoothing,
                             double gamma2) {
  s.validate();
  detail::check_regime(samples, channels, smoothing);
  const double ns = static_cast<double>(samples);
  const double sn = std::sqrt(ns);
  const double sd = std::sqrt(static_cast<double>(channels * smoothing));
  const double lambda_min = s.rho_min + s.sigma2 / sn * (sn - sd);
  const double spread = s.sigma2 * std::sqrt(2.0 / (static_cast<double>(channels) * ns));
  return q_function((gamma2 * lambda_min - s.trace_over_dim - s.sigma2) / spread);
}

}  // namespace eigsense
