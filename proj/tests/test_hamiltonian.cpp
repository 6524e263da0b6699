#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pvstat/hamiltonian.hpp"
#include "pvstat/numeric.hpp"

using namespace pvstat;

namespace {

VortexConfiguration random_configuration(std::mt19937_64& rng, std::size_t n, double side, double lambda) {
  std::vector<Point> pos;
  for (std::size_t k = 0; k < n; ++k) pos.push_back({side * uniform01(rng), side * uniform01(rng)});
  return VortexConfiguration(Domain(side), pos, lambda);
}

} // namespace

TEST(Hamiltonian, PairAndTripleEnergies) {
  const Domain d;
  const VortexConfiguration two(d, {{0.1, 0.2}, {0.4, 0.6}}, 2.0);
  EXPECT_NEAR(full_energy(two), -4.0 * std::log(0.5), 1e-15);

  const VortexConfiguration three(d, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.5}}, 1.0);
  const double expected = -(std::log(1.0) + std::log(0.5) + std::log(std::hypot(1.0, 0.5)));
  EXPECT_NEAR(full_energy(three), expected, 1e-15);

  const VortexConfiguration one(d, {{0.3, 0.3}}, 1.0);
  EXPECT_EQ(full_energy(one), 0.0);
}

TEST(Hamiltonian, CoincidentVorticesAreSingular) {
  const VortexConfiguration c(Domain(), {{0.3, 0.3}, {0.3, 0.3}}, 1.0);
  EXPECT_THROW(full_energy(c), SingularConfiguration);
  const VortexConfiguration ok(Domain(), {{0.3, 0.3}, {0.6, 0.3}}, 1.0);
  EXPECT_FALSE(move_energy_change(ok, 1, {0.3, 0.3}).has_value());
  EXPECT_TRUE(move_is_singular(ok, 1, {0.3, 0.3}));
}

TEST(Hamiltonian, MoveEnergyChangeMatchesFullDifferenceProperty) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = random_configuration(rng, 2 + rng() % 20, 1.5, 0.3);
    const std::size_t k = rng() % c.size();
    const Point to{1.5 * uniform01(rng), 1.5 * uniform01(rng)};
    const double before = full_energy(c);
    const auto dh = move_energy_change(c, k, to);
    ASSERT_TRUE(dh.has_value());
    c.set_position(k, to);
    EXPECT_NEAR(*dh, full_energy(c) - before, 1e-12 * std::max(1.0, std::abs(before)));
  }
}

TEST(Hamiltonian, EnergyInvariantUnderSquareSymmetriesProperty) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_configuration(rng, 2 + rng() % 15, 1.0, 1.0);
    std::vector<Point> rotated, reflected;
    for (Point p : c.positions()) {
      rotated.push_back({1.0 - p.y, p.x});
      reflected.push_back({1.0 - p.x, p.y});
    }
    const double h = full_energy(c);
    EXPECT_NEAR(full_energy(VortexConfiguration(Domain(), rotated, 1.0)), h, 1e-12);
    EXPECT_NEAR(full_energy(VortexConfiguration(Domain(), reflected, 1.0)), h, 1e-12);
  }
}

TEST(Hamiltonian, CoarseEnergyEqualsFullAtBoxCentres) {
  const CoarseGrid g(Domain(), 3);
  const VortexConfiguration c(Domain(), {g.center(0), g.center(4), g.center(8), g.center(2)}, 0.7);
  const auto b = remainder_energy(c, g);
  EXPECT_NEAR(b.full, b.coarse, 1e-14);
  EXPECT_NEAR(b.remainder, 0.0, 1e-14);
  EXPECT_EQ(b.intra_box, 0.0);
  EXPECT_EQ(b.inter_box_correction, 0.0);
}

TEST(Hamiltonian, CoarseEnergyRejectsWrongBoxCount) {
  const CoarseGrid g(Domain(), 2);
  EXPECT_THROW(coarse_energy(Macrostate({1, 1}), g, 1.0), InvalidArgument);
}

TEST(Hamiltonian, RemainderSplitIsExactAndFirstOrderTermScalesLinearly) {
  // One vortex per box, displaced by eps * u from the centre: the cross-box
  // remainder is bounded by the first-order term, which is linear in eps.
  const CoarseGrid g(Domain(), 4);
  std::mt19937_64 rng(31);
  std::vector<Point> dirs;
  for (std::size_t i = 0; i < g.box_count(); ++i)
    dirs.push_back({2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0});
  auto at = [&](double eps) {
    std::vector<Point> pos;
    for (std::size_t i = 0; i < g.box_count(); ++i)
      pos.push_back(g.center(i) + Point{eps * dirs[i].x, eps * dirs[i].y});
    return remainder_energy(VortexConfiguration(Domain(), pos, 0.5), g);
  };
  const auto small = at(0.01);
  const auto twice = at(0.02);
  EXPECT_NEAR(small.full, small.coarse + small.remainder, 1e-13);
  EXPECT_EQ(small.intra_box, 0.0);
  EXPECT_NEAR(twice.inter_box_correction / small.inter_box_correction, 2.0, 1e-12);
  EXPECT_LE(std::abs(small.remainder), std::abs(small.inter_box_correction));
  EXPECT_LE(std::abs(twice.remainder), std::abs(twice.inter_box_correction));
}

TEST(Hamiltonian, IntraBoxTermCountsSameBoxPairs) {
  const CoarseGrid g(Domain(), 2);
  const VortexConfiguration c(Domain(), {{0.1, 0.1}, {0.3, 0.2}, {0.9, 0.9}}, 1.0);
  const auto b = remainder_energy(c, g);
  EXPECT_NEAR(b.intra_box, -std::log(distance({0.1, 0.1}, {0.3, 0.2})), 1e-14);
}

TEST(Hamiltonian, MeanValueConstant) {
  EXPECT_NEAR(mean_value_constant(4.0, 0.5), 0.5 * std::log(0.25 / 4.0), 1e-15);
  EXPECT_NEAR(mean_value_constant_derivative(4.0), -0.125, 1e-15);
  EXPECT_THROW(mean_value_constant(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(mean_value_constant(1.0, 0.0), InvalidArgument);
  // Finite-difference check of the derivative.
  for (double n : {1.5, 3.0, 40.0}) {
    const double fd = (mean_value_constant(n + 1e-6, 0.3) - mean_value_constant(n - 1e-6, 0.3)) / 2e-6;
    EXPECT_NEAR(fd, mean_value_constant_derivative(n), 1e-7);
  }
}

TEST(Hamiltonian, MeanValueConstantTracksSampledLogSeparation) {
  // Sampled mean log-separation of n uniform points in a box of side h is
  // log h + E log r(unit square); it differs from L(n) by O(1) for small n.
  const double h = 0.25;
  std::mt19937_64 rng(41);
  const int draws = 400000;
  CompensatedSum s, s2;
  for (int k = 0; k < draws; ++k) {
    const Point a{h * uniform01(rng), h * uniform01(rng)};
    const Point b{h * uniform01(rng), h * uniform01(rng)};
    const double v = std::log(distance(a, b));
    s += v;
    s2 += v * v;
  }
  const double mean = s.value() / draws;
  const double se = std::sqrt((s2.value() / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, std::log(h) + oracle::mean_log_distance_unit_square, 5.0 * se);
  for (int n = 2; n <= 8; ++n) EXPECT_LT(std::abs(mean - mean_value_constant(n, h)), 1.0);
}

TEST(Hamiltonian, IntraBoxSelfEnergy) {
  const CoarseGrid g(Domain(), 2);
  const Macrostate s({3, 0, 1, 2});
  const double h = 0.5;
  const double expected = 0.25 * (3.0 * 2.0 / 2.0 * 0.5 * std::log(h * h / 3.0) +
                                  2.0 * 1.0 / 2.0 * 0.5 * std::log(h * h / 2.0));
  EXPECT_NEAR(intra_box_self_energy(s, g, 0.5), expected, 1e-15);
}
