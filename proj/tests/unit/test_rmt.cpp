#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "eigsense/rmt.hpp"
#include "oracles.hpp"

#ifndef EIGSENSE_DATA_DIR
#define EIGSENSE_DATA_DIR "data"
#endif

using namespace eigsense;

namespace {

struct Point {
  double t, f;
};
constexpr Point kTable[] = {{-3.90, 0.01}, {-3.18, 0.05}, {-2.78, 0.10}, {-1.91, 0.30}, {-1.27, 0.50},
                            {-0.59, 0.70}, {0.45, 0.90},  {0.98, 0.95},  {2.02, 0.99}};

}  // namespace

TEST(TracyWidom, PublishedPoints) {
  for (const auto& p : kTable) EXPECT_NEAR(tw_cdf(p.t), p.f, 0.005) << "t=" << p.t;
}

TEST(TracyWidom, AgreesWithFredholmDeterminant) {
  for (double t : {-6.0, -3.9, -2.0, -1.27, 0.0, 0.45, 1.5, 3.0}) {
    EXPECT_NEAR(tw_cdf(t), oracle::tw1_fredholm(t), 2e-5) << "t=" << t;
  }
}

TEST(TracyWidom, Quantiles) {
  EXPECT_NEAR(tw_quantile(0.90), 0.45, 0.02);
  EXPECT_NEAR(tw_quantile(0.95), 0.98, 0.02);
  EXPECT_NEAR(tw_quantile(0.50), -1.27, 0.02);
  for (double p : {0.001, 0.1, 0.3, 0.7, 0.99, 0.9999}) EXPECT_NEAR(tw_cdf(tw_quantile(p)), p, 1e-4);
  EXPECT_THROW(tw_quantile(0.0), DomainError);
  EXPECT_THROW(tw_quantile(1.0), DomainError);
}

TEST(TracyWidom, MonotoneWithClampedTails) {
  const auto& tw = default_tw_table();
  for (std::size_t i = 1; i < tw.grid.size(); ++i) {
    ASSERT_GT(tw.grid[i], tw.grid[i - 1]);
    ASSERT_GT(tw.cdf[i], tw.cdf[i - 1]);
  }
  EXPECT_LT(tw.cdf.front(), 1e-6);
  EXPECT_NEAR(1.0 - tw.cdf.back(), 1.0 - oracle::tw1_fredholm(tw.grid.back()), 1e-7);
  EXPECT_EQ(tw_cdf(-50.0), kTwTailProbability);
  EXPECT_EQ(tw_cdf(50.0), 1.0 - kTwTailProbability);
}

TEST(TracyWidom, BuildPreconditions) {
  EXPECT_THROW(build_tw_table(-5.0, 6.0, 0.01, 1e-17), DomainError);
  EXPECT_THROW(build_tw_table(-10.0, 4.0, 0.01, 1e-17), DomainError);
  EXPECT_THROW(build_tw_table(-10.0, 6.0, 0.1, 1e-17), DomainError);
}

TEST(TracyWidom, TextRoundTrip) {
  const auto& tw = default_tw_table();
  std::stringstream buf;
  write_tw_table(tw, buf);
  const auto back = read_tw_table(buf);
  EXPECT_EQ(back.grid, tw.grid);
  EXPECT_EQ(back.cdf, tw.cdf);
  EXPECT_EQ(back.options.u_start, tw.options.u_start);
  std::stringstream junk("hello\n1 2\n");
  EXPECT_THROW(read_tw_table(junk), IoError);
}

// The shipped table must still be what the generator produces.
TEST(TracyWidom, ShippedTableHasNotDrifted) {
  std::ifstream in(EIGSENSE_DATA_DIR "/tw1_table.txt");
  ASSERT_TRUE(in) << "missing " EIGSENSE_DATA_DIR "/tw1_table.txt";
  const auto shipped = read_tw_table(in);
  const auto fresh = build_tw_table(shipped.options);
  ASSERT_EQ(shipped.grid.size(), fresh.grid.size());
  for (std::size_t i = 0; i < fresh.grid.size(); ++i) {
    EXPECT_NEAR(shipped.grid[i], fresh.grid[i], 1e-12);
    EXPECT_NEAR(shipped.cdf[i], fresh.cdf[i], 1e-10);
  }
}

TEST(QFunction, ValuesAndSymmetry) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  EXPECT_NEAR(q_function(-8.0), 1.0, 1e-10);
  for (double t : {-4.0, -1.3, -0.2, 0.7, 2.5, 5.0}) {
    EXPECT_NEAR(q_function(t) + q_function(-t), 1.0, 1e-10);
    EXPECT_NEAR(q_function(t), oracle::q_series(t), 1e-10);
  }
}

TEST(QFunction, Inverse) {
  EXPECT_NEAR(q_inverse(0.1), oracle::q_inverse_bisect(0.1), 1e-8);
  EXPECT_NEAR(q_inverse(0.1), 1.2816, 1e-4);
  EXPECT_DOUBLE_EQ(q_inverse(0.5), 0.0);
  for (double p : {1e-9, 0.01, 0.3, 0.77, 0.999}) EXPECT_NEAR(q_function(q_inverse(p)), p, 1e-8 * std::max(p, 1e-2));
  EXPECT_THROW(q_inverse(0.0), DomainError);
  EXPECT_THROW(q_inverse(1.0), DomainError);
  EXPECT_THROW(q_inverse(-0.2), DomainError);
}

TEST(Wishart, Geometry) {
  const auto g = wishart_geometry(100, 1, 1);
  EXPECT_NEAR(g.mu, std::pow(std::sqrt(99.0) + 1.0, 2), 1e-12);
  EXPECT_NEAR(g.mu, 119.90, 0.01);
  EXPECT_NEAR(g.nu, (std::sqrt(99.0) + 1.0) * std::cbrt(1.0 / std::sqrt(99.0) + 1.0), 1e-12);
  EXPECT_DOUBLE_EQ(wishart_geometry(2000, 5, 10).y, 50.0 / 2000.0);
  EXPECT_THROW(wishart_geometry(32, 4, 8), RegimeError);
  EXPECT_NO_THROW(wishart_geometry(33, 4, 8));
}

TEST(Wishart, BaiYin) {
  EXPECT_DOUBLE_EQ(bai_yin_lambda_min(1.0, 0.25), 0.25);
  EXPECT_NEAR(bai_yin_lambda_min(2.0, 1e-12), 2.0, 1e-5);
  EXPECT_NEAR(bai_yin_lambda_min(1.0, 0.1), 0.4675, 1e-4);
  EXPECT_THROW(bai_yin_lambda_min(1.0, 1.0), DomainError);
  EXPECT_THROW(bai_yin_lambda_min(0.0, 0.5), DomainError);
}
