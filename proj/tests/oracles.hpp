// Reference computations used by the tests, written independently of the
// library code paths they check.
#ifndef PVSTAT_TESTS_ORACLES_HPP
#define PVSTAT_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "pvstat/pvstat.hpp"

namespace oracle {

/// E log|x - y| for x, y uniform in the unit square.
inline constexpr double mean_log_distance_unit_square = -0.80508672195008715;

inline double bisect(const std::function<double(double)>& g, double lo, double hi, double tol = 1e-14) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// lambda^2-free self term n(n-1)/4 * (-1/(2n)) + (2n^2-1)/4 * 1/2 log(h^2/n).
inline double self_term(double n, double h2) {
  return -(n - 1.0) / 8.0 + (2.0 * n * n - 1.0) / 8.0 * std::log(h2 / n);
}

/// Occupation of box 0 for two side-by-side half-square boxes (side 1),
/// lambda = 1/N, raw beta = scaled * N. For small N the equation can have
/// asymmetric roots besides N/2; bisection from the full bracket lands on
/// N/2 first. Solves
/// log n1 - log n2 + beta (V1 - V2) = 0 with n2 = N - n1.
inline double two_box_occupation(int n, double scaled_beta) {
  const double nn = n;
  const double lam2 = 1.0 / (nn * nn);
  const double beta = scaled_beta * nn;
  const double h2 = 0.5;
  const double log_d = std::log(0.5);
  auto g = [&](double n1) {
    const double n2 = nn - n1;
    const double v1 = lam2 * (n2 * log_d + self_term(n1, h2));
    const double v2 = lam2 * (n1 * log_d + self_term(n2, h2));
    return std::log(n1) - std::log(n2) + beta * (v1 - v2);
  };
  return bisect(g, 1e-9 * nn, nn - 1e-9 * nn);
}

/// Middle-box occupation for three vertical strips (side 1) under the
/// mirror symmetry n1 = n3; lambda = 1/N, raw beta = scaled * N.
inline double three_strip_middle_occupation(int n, double scaled_beta) {
  const double nn = n;
  const double lam2 = 1.0 / (nn * nn);
  const double beta = scaled_beta * nn;
  const double h2 = 1.0 / 3.0;
  const double l1 = std::log(1.0 / 3.0);
  const double l2 = std::log(2.0 / 3.0);
  auto g = [&](double n2) {
    const double n1 = 0.5 * (nn - n2);
    const double v1 = lam2 * (n2 * l1 + n1 * l2 + self_term(n1, h2));
    const double v2 = lam2 * (2.0 * n1 * l1 + self_term(n2, h2));
    return std::log(n2) - std::log(n1) + beta * (v2 - v1);
  };
  return bisect(g, 1e-9 * nn, nn - 1e-9 * nn);
}

struct BruteForceEnsemble {
  std::vector<std::vector<int>> states;
  std::vector<double> weights; // W(s) (h^2)^N exp(-beta H0), unnormalised
  double z = 0.0;
};

/// Direct enumeration by recursion with plain products (no log space).
inline BruteForceEnsemble brute_force(int n, const pvstat::CoarseGrid& grid, double beta, double lambda) {
  const std::size_t m = grid.box_count();
  BruteForceEnsemble out;
  std::vector<int> occ(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t box, int left) {
    if (box + 1 == m) {
      occ[box] = left;
      double w = std::tgamma(n + 1.0);
      for (int k : occ) w /= std::tgamma(k + 1.0);
      w *= std::pow(grid.box_area(), n);
      double pair = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (i != j) pair += occ[i] * occ[j] * std::log(pvstat::distance(grid.center(i), grid.center(j)));
      const double h0 = -0.5 * lambda * lambda * pair;
      w *= std::exp(-beta * h0);
      out.states.push_back(occ);
      out.weights.push_back(w);
      out.z += w;
      return;
    }
    for (int k = left; k >= 0; --k) {
      occ[box] = k;
      rec(box + 1, left - k);
    }
  };
  rec(0, n);
  return out;
}

/// int over [0,a] x [0,b] of log(x^2 + y^2).
inline double rectangle_log_r2(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return a * b * (std::log(a * a + b * b) - 3.0) + a * a * std::atan(b / a) + b * b * std::atan(a / b);
}

/// int over the square [0, side]^2 of log|x - y| dy.
inline double square_log_potential(pvstat::Point x, double side) {
  const double l = x.x, r = side - x.x, d = x.y, u = side - x.y;
  return 0.5 * (rectangle_log_r2(l, d) + rectangle_log_r2(l, u) + rectangle_log_r2(r, d) + rectangle_log_r2(r, u));
}

/// Worst violation of pi(a) T(a->b) = pi(b) T(b->a) over all pairs of
/// two-vortex lattice configurations on a k x k grid of sites (cell centres)
/// that differ by one vortex move within the proposal box. The uniform box
/// proposal is symmetric, so T reduces to the acceptance probability.
/// Returns the maximum relative mismatch; `pairs` receives the count.
inline double two_vortex_balance_violation(std::size_t k, double step, double beta, double lambda,
                                           std::size_t& pairs) {
  const pvstat::Domain domain(1.0);
  const double w = 1.0 / double(k);
  std::vector<pvstat::Point> sites;
  for (std::size_t iy = 0; iy < k; ++iy)
    for (std::size_t ix = 0; ix < k; ++ix) sites.push_back({(ix + 0.5) * w, (iy + 0.5) * w});
  double worst = 0.0;
  pairs = 0;
  for (std::size_t a0 = 0; a0 < sites.size(); ++a0)
    for (std::size_t a1 = 0; a1 < sites.size(); ++a1) {
      if (a0 == a1) continue;
      const pvstat::VortexConfiguration from(domain, {sites[a0], sites[a1]}, lambda);
      const double log_pi_a = -beta * pvstat::full_energy(from);
      for (std::size_t mover = 0; mover < 2; ++mover)
        for (std::size_t b = 0; b < sites.size(); ++b) {
          const pvstat::Point target = sites[b];
          const pvstat::Point here = from.position(mover);
          if (std::abs(target.x - here.x) > step || std::abs(target.y - here.y) > step) continue;
          if (target == from.position(1 - mover) || target == here) continue;
          auto to = from;
          to.set_position(mover, target);
          const double log_pi_b = -beta * pvstat::full_energy(to);
          const double t_ab = pvstat::move_acceptance_probability(from, mover, target, beta);
          const double t_ba = pvstat::move_acceptance_probability(to, mover, here, beta);
          const double lhs = std::exp(log_pi_a) * t_ab;
          const double rhs = std::exp(log_pi_b) * t_ba;
          worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, rhs));
          ++pairs;
        }
    }
  return worst;
}

} // namespace oracle

#endif // PVSTAT_TESTS_ORACLES_HPP
