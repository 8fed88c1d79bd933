#include <gtest/gtest.h>

#include <random>

#include "eigsense/detectors.hpp"
#include "eigsense/prewhiten.hpp"
#include "eigsense/signal_gen.hpp"

using namespace eigsense;

TEST(BuildWhitener, IdentityFilter) {
  const auto w = build_whitener({1.0}, 4);
  const Matrix<double> eye = Matrix<double>::Identity(4, 4);
  EXPECT_TRUE(w.gram.isApprox(eye, 1e-15));
  EXPECT_TRUE(w.root.isApprox(eye, 1e-12));
  EXPECT_TRUE(w.root_inverse.isApprox(eye, 1e-12));
}

TEST(BuildWhitener, TwoTapGram) {
  const auto w = build_whitener({1.0, 1.0}, 2);
  EXPECT_EQ(w.filter_matrix, (Matrix<double>{{1, 1, 0}, {0, 1, 1}}));
  EXPECT_EQ(w.gram, (Matrix<double>{{2, 1}, {1, 2}}));
}

TEST(BuildWhitener, RandomFilterRootReconstructs) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const std::vector<double> f{g(rng), g(rng), g(rng), g(rng)};
  const auto w = build_whitener(f, 6);
  EXPECT_LT((w.root * w.root - w.gram).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(w.root, w.root.transpose());
  EXPECT_LT((w.root_inverse * w.root - Matrix<double>::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(eigenvalues(w.root).min(), 0.0);
}

TEST(BuildWhitener, Errors) {
  EXPECT_THROW(build_whitener({0.0, 0.0}, 3), DegenerateInputError);
  EXPECT_THROW(build_whitener({}, 3), DegenerateInputError);
  EXPECT_THROW(build_whitener({1.0}, 0), DimensionError);
}

TEST(WhitenCovariance, ExactOnScaledGram) {
  const auto w = build_whitener({1.0, 0.7, 0.2}, 5);
  const StackedCovariance<double> cov(Matrix<double>(2.5 * w.gram), 1, 5, 1000);
  const auto out = whiten_covariance(w, cov);
  EXPECT_LT((out.matrix() - 2.5 * Matrix<double>::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WhitenCovariance, IdentityWhitenerLeavesInput) {
  const auto x = generate_noise(NoiseModel{}, 2, 300, 3);
  const auto cov = sample_covariance(x, 3, 290);
  const auto out = whiten_covariance(build_whitener({1.0}, 3), cov);
  EXPECT_TRUE(out.matrix().isApprox(cov.matrix(), 1e-12));
}

// Each channel's lags carry sigma^2 G; channels are independent.
TEST(WhitenCovariance, MultiChannelKroneckerLayout) {
  const Index m = 3, l = 4;
  const auto w = build_whitener({1.0, -0.4, 0.3}, l);
  Matrix<double> r = Matrix<double>::Zero(m * l, m * l);
  for (Index a = 0; a < l; ++a) {
    for (Index b = 0; b < l; ++b) {
      for (Index i = 0; i < m; ++i) r(a * m + i, b * m + i) = 0.8 * w.gram(a, b);
    }
  }
  const auto out = whiten_covariance(w, StackedCovariance<double>(r, m, l, 500));
  EXPECT_LT((out.matrix() - 0.8 * Matrix<double>::Identity(m * l, m * l)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WhitenCovariance, PreservesHermitianPsd) {
  const auto x = generate_noise<std::complex<double>>(NoiseModel{}, 2, 500, 4);
  const auto w = build_whitener({1.0, 0.5}, 4);
  const auto out = whiten_covariance(w, sample_covariance(x, 4, 490));
  EXPECT_EQ(out.matrix(), out.matrix().adjoint());
  EXPECT_GE(eigenvalues(out.matrix()).min(), 0.0);
}

TEST(WhitenCovariance, DimensionMismatch) {
  const auto w = build_whitener({1.0, 0.5}, 4);
  const StackedCovariance<double> cov(Matrix<double>::Identity(6, 6), 2, 3, 100);
  EXPECT_THROW(whiten_covariance(w, cov), DimensionError);
}

TEST(WhitenCovariance, FilteredNoiseBackBelowThreshold) {
  const std::vector<double> f{1.0, 0.7, 0.2};
  const Index l = 5, ns = 100'000;
  const auto w = build_whitener(f, l);
  const double gamma = mme_threshold(ns, 1, l, 0.1);
  int below = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const auto raw = generate_noise(NoiseModel{}, 1, ns + l - 1 + 2, derive_seed(55, static_cast<std::uint64_t>(t), Stream::noise));
    const auto filtered = filter_block(raw, f);
    const RealBlock x(Matrix<double>(filtered.samples().rightCols(ns + l - 1)));
    const auto white = whiten_covariance(w, sample_covariance(x, l, ns));
    const auto s = eigenvalues(white.matrix());
    below += s.max() / s.min() < gamma ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(below) / trials, 0.88);
}
