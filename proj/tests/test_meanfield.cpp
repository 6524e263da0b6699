#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "pvstat/meanfield.hpp"

using namespace pvstat;

TEST(SelfEnergy, ThreeTermAndSolvedFormsAgree) {
  for (int n = 1; n <= 1000; ++n)
    for (double h : {0.05, 0.5, 2.0}) {
      const double a = self_energy_gradient_three_term(n, h);
      const double b = self_energy_gradient(n, h);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b))) << "n " << n;
    }
}

TEST(FixedPoint, TwoBoxesMatchBisection) {
  const auto g = CoarseGrid::with_box_count(Domain(), 2);
  for (int n : {10, 100, 1000})
    for (double b : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const auto sol = occupation_fixed_point(g, n, b * n, 1.0 / n);
      EXPECT_NEAR(sol.occupations[0], oracle::two_box_occupation(n, b), 1e-6);
      EXPECT_LE(stationarity_residual(sol, g), 1e-8);
    }
}

TEST(FixedPoint, ThreeStripsMatchBisection) {
  const auto g = CoarseGrid::with_box_count(Domain(), 3);
  ASSERT_EQ(g.nx(), 3u);
  for (double b : {-2.0, -1.0, -0.5, 0.0, 0.2}) {
    const auto sol = occupation_fixed_point(g, 60, b * 60, 1.0 / 60);
    EXPECT_NEAR(sol.occupations[1], oracle::three_strip_middle_occupation(60, b), 1e-6) << "beta " << b;
    EXPECT_NEAR(sol.occupations[0], sol.occupations[2], 1e-9);
  }
}

TEST(FixedPoint, ConservesCountAndIsPositiveProperty) {
  for (std::size_t m : {4u, 9u, 16u, 25u})
    for (double b : {-3.0, -1.0, 0.1}) {
      const auto g = CoarseGrid::with_box_count(Domain(1.5), m);
      const int n = 40;
      const auto sol = occupation_fixed_point(g, n, b * n, 1.0 / n);
      const double total = std::accumulate(sol.occupations.begin(), sol.occupations.end(), 0.0);
      EXPECT_NEAR(total, n, 1e-10 * n);
      for (double x : sol.occupations) EXPECT_GT(x, 0.0);
      EXPECT_LE(sol.residual, 1e-10);
    }
}

TEST(FixedPoint, InfiniteTemperatureIsUniform) {
  const CoarseGrid g(Domain(), 4);
  const auto sol = occupation_fixed_point(g, 32, 0.0);
  for (double x : sol.occupations) EXPECT_NEAR(x, 2.0, 1e-14);
  EXPECT_NEAR(sol.alpha, std::log(16.0 / 32.0), 1e-14);
  EXPECT_EQ(sol.iterations, 0u);
}

TEST(FixedPoint, SignConventionMovesMassOutwardForNegativeBeta) {
  // With n proportional to exp(-beta sum n_j log r), beta < 0 favours boxes
  // far from the others: the centre of a 3 x 3 grid loses occupation.
  const CoarseGrid g(Domain(), 3);
  const auto neg = occupation_fixed_point(g, 90, -2.0 * 90);
  EXPECT_LT(neg.occupations[4], 10.0);
  EXPECT_GT(neg.occupations[0], 10.0);
}

TEST(FixedPoint, SelfEnergyRunawayAtPositiveBetaIsReported) {
  // Off the symmetric point the self term rewards crowded boxes; for beta > 0
  // the damped iteration cannot settle and must say so.
  const auto g = CoarseGrid::with_box_count(Domain(), 3);
  EXPECT_THROW(occupation_fixed_point(g, 60, 1.0 * 60), IterationLimit);
}

TEST(FixedPoint, ErrorsAreTyped) {
  const CoarseGrid g(Domain(), 4);
  EXPECT_THROW(occupation_fixed_point(g, 16, -20.0 * 16), AdmissibilityError);
  EXPECT_THROW(occupation_fixed_point(g, 0, 0.0), InvalidArgument);
  FixedPointOptions opt;
  opt.max_iter = 2;
  try {
    occupation_fixed_point(g, 16, -1.0 * 16, opt);
    FAIL() << "expected IterationLimit";
  } catch (const IterationLimit& e) {
    EXPECT_FALSE(e.trace().empty());
  }
}

TEST(ScalingLimits, DensityIdentityAndNormalisation) {
  const auto g = CoarseGrid::with_box_count(Domain(), 64);
  const int n = 64;
  const double b = -1.0;
  const double beta = b * n;
  const auto sol = occupation_fixed_point(g, n, beta);
  const auto f = scaling_limits(sol, g);
  double mass = 0.0;
  for (std::size_t i = 0; i < f.xi.size(); ++i) {
    mass += f.xi[i] * g.box_area();
    // The 1/N^2 fields pair with the raw beta = N * scaled beta.
    EXPECT_NEAR(f.xi[i], f.d * std::exp(-beta * (f.e0[i] + f.e1[i])), 1e-8 * f.xi[i]);
    EXPECT_LE(std::abs(f.e1[i]), f.e1_bound[i]);
    EXPECT_LE(f.e1_first_term[i], 0.5 / n + 1e-15);
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(ScalingLimits, DecayStudySmall) {
  const std::vector<int> ns{16, 36, 64};
  const auto d = self_energy_decay_study(ns, -1.0);
  EXPECT_TRUE(d.monotone_decrease);
  for (const auto& r : d.rows) {
    EXPECT_TRUE(r.all_within_bound);
    EXPECT_LE(r.max_first_term, r.first_term_bound);
  }
}

TEST(Convolution, SelfCellIntegral) {
  // int over [-a,a]^2 of log|y| by nested adaptive quadrature.
  const double a = 0.3;
  auto inner = [&](double x) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double y) { return 0.5 * std::log(x * x + y * y); }, -a, a, 10, 1e-12);
  };
  const double direct =
      2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inner, 0.0, a, 10, 1e-12);
  EXPECT_NEAR(log_integral_over_square(a), direct, 1e-9);
}

TEST(Convolution, UniformDensityMatchesClosedFormWithSecondOrderError) {
  std::vector<double> errors;
  for (std::size_t p : {16u, 32u, 64u}) {
    const Mesh mesh(Domain(), p);
    const LogConvolution conv(mesh);
    const auto e0 = conv.apply(std::vector<double>(mesh.size(), 1.0));
    double worst = 0.0;
    for (std::size_t iy = 0; iy < p; ++iy)
      for (std::size_t ix = 0; ix < p; ++ix)
        worst = std::max(worst, std::abs(e0[iy * p + ix] - oracle::square_log_potential(mesh.node(ix, iy), 1.0)));
    errors.push_back(worst);
  }
  EXPECT_GT(errors[0] / errors[1], 3.5);
  EXPECT_GT(errors[1] / errors[2], 3.5);
  EXPECT_LT(errors[2], 1e-4);
}

TEST(Convolution, IsLinearAndSymmetric) {
  const Mesh mesh(Domain(), 16);
  const LogConvolution conv(mesh);
  std::vector<double> a(mesh.size(), 0.0), b(mesh.size(), 0.0);
  a[17] = 1.0;
  b[200] = 1.0;
  const auto ka = conv.apply(a);
  const auto kb = conv.apply(b);
  EXPECT_DOUBLE_EQ(ka[200], kb[17]);
  EXPECT_THROW(conv.apply(std::vector<double>(10)), InvalidArgument);
}

TEST(Continuum, InfiniteTemperatureIsUniform) {
  const auto mf = solve_continuum(0.0, 32, Domain(2.0));
  for (double x : mf.xi) EXPECT_NEAR(x, 0.25, 1e-15);
  EXPECT_NEAR(mf.d, 0.25, 1e-14);
}

TEST(Continuum, StationarityAndLaplacianOrder) {
  for (double b : {-1.0, 1.0}) {
    const auto coarse = solve_continuum(b, 32);
    const auto fine = solve_continuum(b, 64);
    EXPECT_GT(interior_laplacian_residual(coarse) / interior_laplacian_residual(fine), 3.5);
    const auto fit = log_density_fit(fine);
    EXPECT_NEAR(fit.slope, -b, 1e-8);
    EXPECT_GE(fit.r_squared, 1.0 - 1e-6);
    double mass = 0.0;
    for (double x : fine.xi) mass += x * fine.mesh.cell_area();
    EXPECT_NEAR(mass, 1.0, 1e-12);
    std::size_t centre = 32 * 64 + 32;
    if (b > 0) EXPECT_GT(fine.xi[centre], 1.0);
    else EXPECT_LT(fine.xi[centre], 1.0);
  }
}

TEST(Continuum, FiniteNSelfEnergyShrinksWithN) {
  double previous = 1e300;
  for (int n : {16, 64, 256}) {
    ContinuumOptions opt;
    opt.include_e1 = true;
    opt.n_for_e1 = n;
    const auto mf = solve_continuum(-1.0, 32, Domain(), opt);
    double worst = 0.0;
    for (double e : mf.e1) worst = std::max(worst, std::abs(e));
    EXPECT_LT(worst, previous);
    previous = worst;
    EXPECT_GE(log_density_fit(mf).r_squared, 1.0 - 1e-6);
  }
}

TEST(Continuum, ErrorsAreTyped) {
  EXPECT_THROW(solve_continuum(20.0, 32), AdmissibilityError);
  EXPECT_THROW(solve_continuum(1.0, 8), InvalidArgument);
  ContinuumOptions opt;
  opt.max_iter = 1;
  EXPECT_THROW(solve_continuum(1.0, 32, Domain(), opt), IterationLimit);
  ContinuumOptions wide;
  wide.window.max = 1000.0;
  EXPECT_THROW(solve_continuum(400.0, 32, Domain(), wide), AdmissibilityError);
}

TEST(SinhPoisson, InfiniteTemperatureGivesZeroVorticity) {
  const auto f = solve_sinh_poisson(0.0, 32);
  for (double w : f.omega) EXPECT_LE(std::abs(w), 1e-12);
}

TEST(SinhPoisson, SpeciesSwapNegatesVorticity) {
  SinhPoissonOptions swapped;
  swapped.swap_species = true;
  const auto a = solve_sinh_poisson(2.0, 32);
  const auto b = solve_sinh_poisson(2.0, 32, Domain(), swapped);
  double amplitude = 0.0;
  for (std::size_t k = 0; k < a.omega.size(); ++k) {
    EXPECT_LE(std::abs(a.omega[k] + b.omega[k]), 1e-12);
    amplitude = std::max(amplitude, std::abs(a.omega[k]));
  }
  EXPECT_GT(amplitude, 1.0);
  const auto fit = fit_sinh(a);
  EXPECT_TRUE(fit.is_sinh);
  EXPECT_LE(fit.rms_residual, 1e-4);
  double circulation = 0.0;
  for (double w : a.omega) circulation += w * a.mesh.cell_area();
  EXPECT_NEAR(circulation, 0.0, 1e-12);
}

TEST(SinhPoisson, BelowBifurcationDecaysToZero) {
  const auto f = solve_sinh_poisson(1.0, 32);
  for (double w : f.omega) EXPECT_LE(std::abs(w), 1e-9);
}

TEST(Comparison, BoxAverageAndNesting) {
  const Mesh mesh(Domain(), 16);
  std::vector<double> field(mesh.size());
  std::iota(field.begin(), field.end(), 0.0);
  const CoarseGrid g(Domain(), 4);
  const auto avg = box_average(field, mesh, g);
  EXPECT_NEAR(std::accumulate(avg.begin(), avg.end(), 0.0) * 16.0,
              std::accumulate(field.begin(), field.end(), 0.0), 1e-9);
  EXPECT_THROW(box_average(field, mesh, CoarseGrid(Domain(), 3)), InvalidArgument);
}

TEST(Comparison, InfiniteTemperatureDistanceVanishes) {
  const std::vector<int> ns{16, 64};
  const auto c = finite_vs_continuum(ns, 0.0, 32);
  for (const auto& r : c.rows) EXPECT_LE(r.l1_distance, 1e-8);
}

TEST(Comparison, DistanceShrinksWithN) {
  const std::vector<int> ns{16, 64, 256};
  const auto c = finite_vs_continuum(ns, -1.0, 64);
  EXPECT_TRUE(c.monotone_decrease);
}
