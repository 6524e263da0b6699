#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pvstat/geometry.hpp"
#include "pvstat/numeric.hpp"

using namespace pvstat;

TEST(Numeric, CompensatedSumRecoversSmallTerms) {
  CompensatedSum s;
  s += 1.0;
  for (int k = 0; k < 1000; ++k) s += 1e-16;
  s += -1.0;
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(Numeric, LogSumExpMatchesDirectSumAndSurvivesOverflow) {
  const std::vector<double> xs{0.1, -2.0, 3.5, 1.25};
  double direct = 0.0;
  for (double x : xs) direct += std::exp(x);
  EXPECT_NEAR(log_sum_exp(xs), std::log(direct), 1e-14);

  const std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);

  LogSumExp stream;
  for (double x : xs) stream.add(x);
  EXPECT_NEAR(stream.value(), std::log(direct), 1e-14);
}

TEST(Numeric, LogBinomialSmallValues) {
  EXPECT_NEAR(std::exp(log_binomial(10, 3)), 120.0, 1e-9);
  EXPECT_NEAR(std::exp(log_binomial(13, 3)), 286.0, 1e-9);
  EXPECT_DOUBLE_EQ(log_binomial(7, 0), 0.0);
}

TEST(Numeric, Uniform01StaysInHalfOpenUnitInterval) {
  std::mt19937_64 rng(3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform01(rng);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Numeric, BatchMeansErrorMatchesIidTheory) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(2.0, 1.0);
  std::vector<double> xs(64000);
  for (double& x : xs) x = normal(rng);
  const auto est = batch_means(xs, 32);
  EXPECT_NEAR(est.mean, 2.0, 5.0 / std::sqrt(64000.0));
  EXPECT_NEAR(est.std_error, 1.0 / std::sqrt(64000.0), 0.35 / std::sqrt(64000.0));
}

TEST(Geometry, DomainRejectsBadSide) {
  EXPECT_THROW(Domain(0.0), InvalidArgument);
  EXPECT_THROW(Domain(-1.0), InvalidArgument);
  EXPECT_THROW(Domain(std::nan("")), InvalidArgument);
}

TEST(Geometry, SquareGridCentresAndSize) {
  const CoarseGrid g(Domain(2.0), 4);
  EXPECT_EQ(g.box_count(), 16u);
  EXPECT_DOUBLE_EQ(g.h(), 0.5);
  EXPECT_DOUBLE_EQ(g.box_area(), 0.25);
  EXPECT_EQ(g.center(0), (Point{0.25, 0.25}));
  EXPECT_EQ(g.center(5), (Point{0.75, 0.75}));
  EXPECT_EQ(g.center(15), (Point{1.75, 1.75}));
}

TEST(Geometry, BoxCountFactorisation) {
  const Domain d;
  const auto g128 = CoarseGrid::with_box_count(d, 128);
  EXPECT_EQ(g128.nx(), 16u);
  EXPECT_EQ(g128.ny(), 8u);
  const auto g512 = CoarseGrid::with_box_count(d, 512);
  EXPECT_EQ(g512.nx(), 32u);
  EXPECT_EQ(g512.ny(), 16u);
  const auto g64 = CoarseGrid::with_box_count(d, 64);
  EXPECT_EQ(g64.nx(), 8u);
  EXPECT_EQ(g64.ny(), 8u);
  const auto g7 = CoarseGrid::with_box_count(d, 7);
  EXPECT_EQ(g7.nx(), 7u);
  EXPECT_EQ(g7.ny(), 1u);
  EXPECT_NEAR(g128.box_area() * 128.0, 1.0, 1e-15);
}

TEST(Geometry, SharedEdgesGoToLowerIndex) {
  const CoarseGrid g(Domain(), 2);
  EXPECT_EQ(g.box_of({0.5, 0.25}), 0u);
  EXPECT_EQ(g.box_of({0.25, 0.5}), 0u);
  EXPECT_EQ(g.box_of({0.5, 0.5}), 0u);
  EXPECT_EQ(g.box_of({0.50000001, 0.25}), 1u);
  EXPECT_EQ(g.box_of({0.0, 0.0}), 0u);
  EXPECT_EQ(g.box_of({1.0, 1.0}), 3u);
  EXPECT_EQ(g.box_of({1.0, 0.0}), 1u);
  EXPECT_THROW(g.box_of({1.0000001, 0.5}), DomainViolation);
}

TEST(Geometry, ConfigurationValidation) {
  const Domain d;
  EXPECT_THROW(VortexConfiguration(d, {}, 1.0), InvalidArgument);
  EXPECT_THROW(VortexConfiguration(d, {{0.5, 0.5}}, 0.0), InvalidArgument);
  EXPECT_THROW(VortexConfiguration(d, {{0.5, 1.5}}, 1.0), DomainViolation);
  EXPECT_THROW(VortexConfiguration(d, {{-0.1, 0.5}}, 1.0), DomainViolation);
  EXPECT_NO_THROW(VortexConfiguration(d, {{0.0, 1.0}}, 1.0));
}

TEST(Geometry, MacrostateValidation) {
  EXPECT_THROW(Macrostate({1, -1}), InvalidArgument);
  const Macrostate s({2, 0, 3});
  EXPECT_EQ(s.total(), 5);
  EXPECT_EQ(s.box_count(), 3u);
  EXPECT_EQ(s[2], 3);
}

TEST(Geometry, AssignBoxesConservesCountProperty) {
  std::mt19937_64 rng(5);
  const Domain d(3.0);
  for (std::size_t m : {1u, 2u, 3u, 6u, 16u}) {
    const auto g = CoarseGrid::with_box_count(d, m);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng() % 40;
      std::vector<Point> pos;
      for (std::size_t k = 0; k < n; ++k) pos.push_back({3.0 * uniform01(rng), 3.0 * uniform01(rng)});
      const VortexConfiguration c(d, pos, 0.5);
      const auto s = assign_boxes(c, g);
      EXPECT_EQ(s.total(), int(n));
      EXPECT_EQ(s.box_count(), m);
      const auto offsets = box_relative_offsets(c, g);
      for (const Point& o : offsets) {
        EXPECT_LE(std::abs(o.x), 0.5 * g.box_width() + 1e-12);
        EXPECT_LE(std::abs(o.y), 0.5 * g.box_height() + 1e-12);
      }
    }
  }
}

TEST(Geometry, MismatchedDomainsRejected) {
  const VortexConfiguration c(Domain(1.0), {{0.5, 0.5}}, 1.0);
  const CoarseGrid g(Domain(2.0), 2);
  EXPECT_THROW(assign_boxes(c, g), InvalidArgument);
}
