#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eigsense/detectors.hpp"
#include "eigsense/signal_gen.hpp"
#include "oracles.hpp"

using namespace eigsense;

namespace {

// gamma_1 evaluated term by term with an externally supplied quantile.
double gamma1_by_hand(double ns, double ml, double quantile) {
  const double a = std::sqrt(ns) + std::sqrt(ml);
  const double b = std::sqrt(ns) - std::sqrt(ml);
  return a * a / (b * b) * (1.0 + std::pow(a, -2.0 / 3.0) / std::pow(ns * ml, 1.0 / 6.0) * quantile);
}

double gamma2_by_hand(double ns, double m, double ml, double pfa) {
  const double b = std::sqrt(ns) - std::sqrt(ml);
  return (std::sqrt(2.0 / (m * ns)) * oracle::q_inverse_bisect(pfa) + 1.0) * ns / (b * b);
}

// E[x(n-l)_i x(n-l')_i'] for iid sources, summed tap by tap.
Matrix<double> statistical_signal_covariance(const FirChannelSet& c, const std::vector<double>& var, Index l) {
  const Index m = c.channels();
  Matrix<double> r = Matrix<double>::Zero(m * l, m * l);
  for (Index a = 0; a < l; ++a) {
    for (Index b = 0; b < l; ++b) {
      for (Index i = 0; i < m; ++i) {
        for (Index i2 = 0; i2 < m; ++i2) {
          double sum = 0.0;
          for (Index j = 0; j < c.sources(); ++j) {
            for (Index k = 0; k <= c.order(j); ++k) sum += var[j] * c.tap(i, j, k) * c.tap(i2, j, k + a - b);
          }
          r(a * m + i, b * m + i2) = sum;
        }
      }
    }
  }
  return r;
}

template <typename F>
double rate(int trials, F&& decide) {
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += decide(static_cast<std::uint64_t>(t)) ? 1 : 0;
  return static_cast<double>(hits) / trials;
}

}  // namespace

TEST(Thresholds, WorkedExamples) {
  EXPECT_NEAR(mme_threshold(100'000, 4, 8, 0.1), 1.0750, 1e-4);
  EXPECT_NEAR(eme_threshold(100'000, 4, 8, 0.1), 1.0397, 1e-4);
  // Same formula with the two-decimal quantile 0.45 differs by < 1e-6.
  EXPECT_NEAR(mme_threshold(100'000, 4, 8, 0.1), gamma1_by_hand(1e5, 32, 0.45), 1e-6);
  for (Index ns : {200, 4000, 50'000}) {
    EXPECT_NEAR(eme_threshold(ns, 2, 5, 0.07), gamma2_by_hand(ns, 2, 10, 0.07), 1e-9);
  }
}

TEST(Thresholds, CollapseToLeadingRatio) {
  const double pfa0 = 1.0 - tw_cdf(0.0);
  const double ns = 5000, ml = 40;
  const double ratio = std::pow((std::sqrt(ns) + std::sqrt(ml)) / (std::sqrt(ns) - std::sqrt(ml)), 2);
  EXPECT_NEAR(mme_threshold(5000, 4, 10, pfa0), ratio, 1e-7);
  EXPECT_DOUBLE_EQ(eme_threshold(5000, 4, 10, 0.5), ns / std::pow(std::sqrt(ns) - std::sqrt(ml), 2));
}

TEST(Thresholds, TendToOneAndExceedOne) {
  EXPECT_NEAR(mme_threshold(Index{1} << 40, 4, 8, 0.1), 1.0, 1e-4);
  EXPECT_NEAR(eme_threshold(Index{1} << 40, 4, 8, 0.1), 1.0, 1e-4);
  for (Index ns : {40, 100, 1000, 100'000}) {
    for (double pfa : {0.001, 0.05, 0.1, 0.3, 0.49}) {
      EXPECT_GT(mme_threshold(ns, 4, 8, pfa), 1.0);
      EXPECT_GT(eme_threshold(ns, 4, 8, pfa), 1.0);
    }
  }
  EXPECT_NO_THROW(mme_threshold(1000, 4, 8, 0.9));
}

TEST(Thresholds, Errors) {
  EXPECT_THROW(mme_threshold(32, 4, 8, 0.1), RegimeError);
  EXPECT_THROW(eme_threshold(31, 4, 8, 0.1), RegimeError);
  EXPECT_THROW(mme_threshold(1000, 4, 8, 0.0), DomainError);
  EXPECT_THROW(eme_threshold(1000, 4, 8, 1.0), DomainError);
  EXPECT_THROW(energy_threshold(4, 1000, -0.1), DomainError);
  EXPECT_NEAR(energy_threshold(4, 10'000, 0.1), 1.0 + std::sqrt(2.0 / 40'000.0) * 1.2815516, 1e-8);
}

TEST(Detectors, VerdictConsistency) {
  const auto x = generate_noise(NoiseModel{}, 2, 3000, 5);
  for (const auto& v : {detect_mme(x, 4, 2990, 0.1), detect_eme(x, 4, 2990, 0.1), detect_energy(x, 2990, 1.0, 0.1)}) {
    EXPECT_EQ(v.decision, v.statistic > v.threshold);
    EXPECT_GE(v.statistic, 0.0);
    EXPECT_EQ(v.params.samples, 2990);
    EXPECT_EQ(v.params.channels, 2);
  }
  EXPECT_EQ(detect_mme(x, 4, 2990, 0.1).detector, DetectorKind::mme);
  EXPECT_EQ(to_string(DetectorKind::energy), "ED");
}

TEST(Detectors, MmeFalseAlarmNearTarget) {
  const double r = rate(500, [](std::uint64_t t) {
    const auto x = generate_noise(NoiseModel{}, 4, 10'007, derive_seed(31, t, Stream::noise));
    return detect_mme(x, 8, 10'000, 0.1).decision;
  });
  EXPECT_GE(r, 0.05);
  EXPECT_LE(r, 0.16);
}

TEST(Detectors, MmeDetectsStrongCorrelatedSignal) {
  const double r = rate(100, [](std::uint64_t t) {
    Engine e = make_engine(8, t, Stream::channel);
    const auto channels = FirChannelSet::random(1, 4, 1, e);
    const auto s = generate_signal(SourceSpec{}, channels, 4, 2007, derive_seed(8, t, Stream::source));
    const auto n = generate_noise(NoiseModel{}, 4, 2007, derive_seed(8, t, Stream::noise));
    return detect_mme(mix_at_snr(s, n, 0.0).block, 8, 2000, 0.1).decision;
  });
  EXPECT_GT(r, 0.99);
}

TEST(Detectors, WhiteCovarianceStatisticBelowThreshold) {
  const StackedCovariance<double> white(Matrix<double>::Identity(32, 32) * 3.0, 4, 8, 100'000);
  const auto v = detect_mme(white, 0.1);
  EXPECT_DOUBLE_EQ(v.statistic, 1.0);
  EXPECT_FALSE(v.decision);
}

TEST(Detectors, EmeFalseAlarmConservative) {
  const double r = rate(500, [](std::uint64_t t) {
    const auto x = generate_noise(NoiseModel{}, 4, 10'007, derive_seed(32, t, Stream::noise));
    return detect_eme(x, 8, 10'000, 0.1).decision;
  });
  EXPECT_LE(r, 0.12);
}

TEST(Detectors, EmeRankOneSignal) {
  Matrix<double> x = Matrix<double>::Constant(3, 2000, 1.0);
  x += generate_noise(NoiseModel{1e-6, 0.0}, 3, 2000, 4).samples();
  const auto v = detect_eme(RealBlock(x), 4, 1997, 0.1);
  EXPECT_GT(v.statistic, 1000.0 * v.threshold);
  EXPECT_TRUE(v.decision);
}

TEST(Detectors, EmeStatisticConcentrates) {
  const double ns = 20'000, ml = 16;
  double sum = 0.0;
  for (std::uint64_t t = 0; t < 60; ++t) {
    const auto x = generate_noise(NoiseModel{}, 2, 20'007, derive_seed(6, t, Stream::noise));
    sum += detect_eme(x, 8, 20'000, 0.1).statistic;
  }
  EXPECT_NEAR(sum / 60.0, ns / std::pow(std::sqrt(ns) - std::sqrt(ml), 2), 0.01);
}

TEST(Detectors, EnergyFalseAlarmAndUncertainty) {
  const double exact = rate(2000, [](std::uint64_t t) {
    const auto x = generate_noise(NoiseModel{}, 4, 10'000, derive_seed(33, t, Stream::noise));
    return detect_energy(x, 10'000, 1.0, 0.1).decision;
  });
  EXPECT_NEAR(exact, 0.10, 0.03);
  const double uncertain = rate(2000, [](std::uint64_t t) {
    const auto x = generate_noise(NoiseModel{1.0, 2.0}, 4, 10'000, derive_seed(34, t, Stream::noise));
    return detect_energy(x, 10'000, 1.0, 0.1).decision;
  });
  EXPECT_NEAR(uncertain, 0.5, 0.1);
}

TEST(Detectors, EnergyOfZeroInput) {
  const auto v = detect_energy(RealBlock(Matrix<double>::Zero(2, 50)), 50, 1.0, 0.1);
  EXPECT_EQ(v.statistic, 0.0);
  EXPECT_FALSE(v.decision);
  EXPECT_THROW(detect_energy(RealBlock(Matrix<double>::Zero(2, 50)), 50, 0.0, 0.1), DomainError);
}

TEST(Detectors, SingularCovarianceRejected) {
  EXPECT_THROW(detect_mme(RealBlock(Matrix<double>::Zero(2, 100)), 2, 90, 0.1), SingularCovarianceError);
  EXPECT_THROW(detect_eme(RealBlock(Matrix<double>::Ones(2, 100)), 2, 90, 0.1), SingularCovarianceError);
}

TEST(Detectors, PropagatesRegimeErrors) {
  const auto x = generate_noise(NoiseModel{}, 4, 100, 1);
  EXPECT_THROW(detect_mme(x, 8, 20, 0.1), RegimeError);
  EXPECT_THROW(detect_eme(x, 8, 200, 0.1), DimensionError);
}

TEST(Detectors, BlindStatisticsIgnoreScale) {
  const auto x = generate_noise(NoiseModel{}, 4, 5007, 3);
  const auto mme = detect_mme(x, 8, 5000, 0.1);
  const auto eme = detect_eme(x, 8, 5000, 0.1);
  const auto ed = detect_energy(x, 5000, 1.0, 0.1);
  for (double a : {0.25, 2.0, 1024.0}) {
    EXPECT_EQ(detect_mme(x.scaled(a), 8, 5000, 0.1).statistic, mme.statistic);
    EXPECT_EQ(detect_eme(x.scaled(a), 8, 5000, 0.1).statistic, eme.statistic);
  }
  for (double a : {0.1, 3.0, 10.0, 1e3}) {
    EXPECT_NEAR(detect_mme(x.scaled(a), 8, 5000, 0.1).statistic, mme.statistic, 1e-12 * mme.statistic);
    EXPECT_NEAR(detect_eme(x.scaled(a), 8, 5000, 0.1).statistic, eme.statistic, 1e-12 * eme.statistic);
    EXPECT_NEAR(detect_energy(x.scaled(a), 5000, 1.0, 0.1).statistic, a * a * ed.statistic, 1e-9 * a * a);
  }
}

TEST(Summary, FlatSingleChannel) {
  const FirChannelSet c(FirChannelSet::Taps{{{1.0}}});
  for (Index l : {1, 4, 9}) {
    const auto s = signal_spectrum_summary(c, std::vector<double>{1.0}, l, 0.5);
    EXPECT_NEAR(s.rho_max, 1.0, 1e-12);
    EXPECT_NEAR(s.rho_min, 1.0, 1e-12);
    EXPECT_NEAR(s.trace_over_dim, 1.0, 1e-12);
  }
}

TEST(Summary, RankDeficientWhenTall) {
  // Flat channels (1, 0.5): every lag block has rank one, so rank L of 2L.
  const FirChannelSet c(FirChannelSet::Taps{{{1.0}, {0.5}}});
  const auto s = signal_spectrum_summary(c, std::vector<double>{1.0}, 3, 1.0);
  EXPECT_NEAR(s.rho_min, 0.0, 1e-12);
  EXPECT_GT(s.rho_max, 0.0);
}

TEST(Summary, MatchesTapByTapCovariance) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 5; ++k) {
    Engine e(rng());
    const auto c = FirChannelSet::random(2, 3, 1, e);
    const std::vector<double> var{1.5, 0.5};
    const auto ref = statistical_signal_covariance(c, var, 4);
    const auto h = filtering_matrix(c, 4);
    ASSERT_EQ(h.rows(), 12);
    ASSERT_EQ(h.cols(), 2 + 2 * 4);
    const auto s = signal_spectrum_summary(c, var, 4, 1.0);
    const auto spec = eigenvalues(ref);
    EXPECT_NEAR(s.rho_max, spec.max(), 1e-10);
    EXPECT_NEAR(s.rho_min, std::max(spec.min(), 0.0), 1e-10);
    EXPECT_NEAR(s.trace_over_dim, ref.trace() / 12.0, 1e-12);
  }
}

// With L > N / (M - P) the signal part is rank deficient, so the smallest
// eigenvalue of the full statistical covariance is exactly the noise power.
TEST(Summary, NoiseFloorOfTallModel) {
  Engine e(12);
  const auto c = FirChannelSet::random(1, 3, 4, e);
  const double sigma2 = 0.7;
  const auto hrh = statistical_signal_covariance(c, {1.0}, 6);
  const Matrix<double> rx = hrh + sigma2 * Matrix<double>::Identity(18, 18);
  EXPECT_NEAR(eigenvalues(rx).min(), sigma2, 1e-10);
  EXPECT_NEAR(signal_spectrum_summary(c, std::vector<double>{1.0}, 6, sigma2).rho_min, 0.0, 1e-10);
}

TEST(Summary, ValidatesFields) {
  SignalSpectrumSummary s{1.0, 2.0, 1.5, 1.0};
  EXPECT_THROW(s.validate(), DomainError);
  s = {2.0, 1.0, 3.0, 1.0};
  EXPECT_THROW(s.validate(), DomainError);
  s = {2.0, 1.0, 1.5, 0.0};
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(PredictPd, MmeLimitsAndMonotonicity) {
  const Index ns = 10'000, m = 4, l = 8;
  const double g1 = mme_threshold(ns, m, l, 0.1);
  EXPECT_NEAR(predict_pd_mme({1e3, 0.0, 10.0, 1.0}, ns, m, l, g1), 1.0, 1e-9);
  const auto geo = wishart_geometry(ns, m, l);
  const double zero = predict_pd_mme({0.0, 0.0, 0.0, 1.0}, ns, m, l, g1);
  EXPECT_DOUBLE_EQ(zero, 1.0 - tw_cdf((g1 * ns - geo.mu) / geo.nu));
  EXPECT_LT(zero, 0.1);
  double prev = 0.0;
  for (double rho : {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
    const double pd = predict_pd_mme({rho, 0.0, rho / 2, 1.0}, ns, m, l, g1);
    EXPECT_GE(pd, prev);
    prev = pd;
  }
}

TEST(PredictPd, EmeLimitsAndMonotonicity) {
  const Index ns = 10'000, m = 4, l = 8;
  const double g2 = eme_threshold(ns, m, l, 0.1);
  EXPECT_NEAR(predict_pd_eme({50.0, 0.0, 40.0, 1.0}, ns, m, l, g2), 1.0, 1e-12);
  const double zero = predict_pd_eme({0.0, 0.0, 0.0, 1.0}, ns, m, l, g2);
  EXPECT_GT(zero, 0.0);
  EXPECT_LT(zero, 1.0);
  double prev = 0.0;
  for (double tr : {0.0, 0.01, 0.03, 0.1, 0.3}) {
    const double pd = predict_pd_eme({1.0, 0.0, tr, 1.0}, ns, m, l, g2);
    EXPECT_GE(pd, prev);
    prev = pd;
  }
}
