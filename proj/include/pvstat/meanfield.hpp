#ifndef PVSTAT_MEANFIELD_HPP
#define PVSTAT_MEANFIELD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pvstat/errors.hpp"
#include "pvstat/geometry.hpp"
#include "pvstat/hamiltonian.hpp"
#include "pvstat/numeric.hpp"

// Sign convention used throughout this header: occupations and densities are
// proportional to exp(-beta * (potential)), with the potential built from
// +log|x - y| (no -1/2 prefactor). Under this convention the clustered branch
// lies at beta > 0, while the Metropolis sampler, which works with the
// physical energy H = -lambda^2 sum log r, clusters at beta < 0.

namespace pvstat {

/// Admissible window for the scaled inverse temperature beta * lambda^2 * N
/// (equivalently the continuum beta). Engineering defaults.
struct BetaWindow {
  double min = -4.0 * std::numbers::pi;
  double max = 4.0 * std::numbers::pi;

  void require(double scaled) const {
    if (!(scaled >= min && scaled <= max))
      throw AdmissibilityError("scaled beta " + std::to_string(scaled) + " outside the admissible window [" +
                               std::to_string(min) + ", " + std::to_string(max) + "]");
  }
};

// ---------------------------------------------------------------------------
// Finite-N occupation fixed point.

/// Self-energy part of the stationarity condition in its three-term form,
/// n(n-1)/4 L'(n) + (2n-1)/4 L(n) + n(n-1)/2 L(n).
inline double self_energy_gradient_three_term(double n, double h) {
  const double l = mean_value_constant(n, h);
  return n * (n - 1.0) / 4.0 * mean_value_constant_derivative(n) + (2.0 * n - 1.0) / 4.0 * l +
         n * (n - 1.0) / 2.0 * l;
}

/// The same quantity in the solved form, n(n-1)/4 L'(n) + (2n^2-1)/4 L(n).
inline double self_energy_gradient(double n, double h) {
  return n * (n - 1.0) / 4.0 * mean_value_constant_derivative(n) +
         (2.0 * n * n - 1.0) / 4.0 * mean_value_constant(n, h);
}

struct OccupationSolution {
  std::vector<double> occupations;
  /// Normalisation multiplier: n_i = exp(-alpha) exp(-beta V_i).
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  int n = 0;
  /// max_i |log n_i + beta V_i + alpha|
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct FixedPointOptions {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  double damping = 0.5;
  double damping_floor = 1.0 / 64.0;
  /// Occupations are floored at floor_fraction * N to keep log n finite.
  double floor_fraction = 1e-12;
  BetaWindow window;
};

namespace detail {

class OccupationProblem {
public:
  OccupationProblem(const CoarseGrid& grid, int n, double beta, double lambda)
      : grid_(grid), n_(n), beta_(beta), lam2_(lambda * lambda), m_(grid.box_count()),
        log_dist_(m_ * m_, 0.0) {
    const auto& c = grid.centers();
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j)
        if (i != j) log_dist_[i * m_ + j] = std::log(distance(c[i], c[j]));
  }

  /// V_i = sum_{j != i} lambda^2 n_j log|x_i - x_j| + lambda^2 self(n_i).
  std::vector<double> potential(std::span<const double> occ, bool three_term = false) const {
    std::vector<double> v(m_);
    const double h = grid_.h();
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &log_dist_[i * m_];
      double s = 0.0;
      for (std::size_t j = 0; j < m_; ++j) s += row[j] * occ[j];
      const double self = three_term ? self_energy_gradient_three_term(occ[i], h)
                                     : self_energy_gradient(occ[i], h);
      v[i] = lam2_ * (s + self);
    }
    return v;
  }

  /// alpha such that sum_i exp(-alpha - beta V_i) = N, and the log targets.
  double multiplier(std::span<const double> v, std::vector<double>& log_target) const {
    log_target.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) log_target[i] = -beta_ * v[i];
    const double alpha = log_sum_exp(log_target) - std::log(double(n_));
    for (double& t : log_target) t -= alpha;
    return alpha;
  }

  std::size_t boxes() const noexcept { return m_; }

private:
  const CoarseGrid& grid_;
  int n_;
  double beta_;
  double lam2_;
  std::size_t m_;
  std::vector<double> log_dist_;
};

} // namespace detail

/// Damped fixed-point iteration for the stationary occupations
///   n_i = exp(-alpha) exp(-beta (sum_{j != i} lambda^2 n_j log|x_i - x_j|
///                              + lambda^2 [n_i(n_i-1)/4 L'(n_i) + (2n_i^2-1)/4 L(n_i)]))
/// with alpha fixed each sweep by sum_i n_i = N (closed form in log space).
/// `beta` is the raw inverse temperature.
inline OccupationSolution occupation_fixed_point(const CoarseGrid& grid, int n, double beta,
                                                 double lambda, FixedPointOptions opt = {}) {
  if (n < 1) throw InvalidArgument("occupation_fixed_point needs N >= 1");
  if (!std::isfinite(beta)) throw InvalidArgument("beta must be finite");
  opt.window.require(beta * lambda * lambda * double(n));

  const detail::OccupationProblem problem(grid, n, beta, lambda);
  const std::size_t m = problem.boxes();
  const double floor = opt.floor_fraction * double(n);

  OccupationSolution sol;
  sol.beta = beta;
  sol.lambda = lambda;
  sol.n = n;
  sol.occupations.assign(m, double(n) / double(m));

  double gamma = opt.damping;
  double previous = std::numeric_limits<double>::infinity();
  std::vector<double> log_target;
  std::ostringstream trace;
  for (std::size_t it = 0; it <= opt.max_iter; ++it) {
    const auto v = problem.potential(sol.occupations);
    sol.alpha = problem.multiplier(v, log_target);
    double residual = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      residual = std::max(residual, std::abs(std::log(sol.occupations[i]) - log_target[i]));
    sol.residual = residual;
    sol.iterations = it;
    trace << residual << '\n';
    if (residual <= opt.tol) return sol;
    if (it == opt.max_iter) break;
    if (residual > previous) gamma = std::max(0.5 * gamma, opt.damping_floor);
    previous = residual;
    for (std::size_t i = 0; i < m; ++i)
      sol.occupations[i] =
          std::max(floor, (1.0 - gamma) * sol.occupations[i] + gamma * std::exp(log_target[i]));
  }
  throw IterationLimit("occupation fixed point did not converge in " + std::to_string(opt.max_iter) +
                           " iterations (residual " + std::to_string(sol.residual) + ")",
                       trace.str());
}

inline OccupationSolution occupation_fixed_point(const CoarseGrid& grid, int n, double beta,
                                                 FixedPointOptions opt = {}) {
  return occupation_fixed_point(grid, n, beta, 1.0 / double(n), opt);
}

/// Residual of the stationarity condition written with the explicit entropy
/// term and the three-term self-energy derivative:
///   (1/beta)(log n_i + 1) + sum_{j != i} lambda^2 n_j log|x_i - x_j|
///     + lambda^2 [n(n-1)/4 L' + (2n-1)/4 L + n(n-1)/2 L] + alpha_g,
/// where alpha_g = (alpha - 1)/beta is the multiplier in that convention.
/// At beta == 0 the beta-multiplied form max|log n_i + alpha| is returned.
inline double stationarity_residual(const OccupationSolution& sol, const CoarseGrid& grid) {
  const detail::OccupationProblem problem(grid, sol.n, sol.beta, sol.lambda);
  double out = 0.0;
  if (sol.beta == 0.0) {
    for (double x : sol.occupations) out = std::max(out, std::abs(std::log(x) + sol.alpha));
    return out;
  }
  const auto v = problem.potential(sol.occupations, /*three_term=*/true);
  const double alpha_g = (sol.alpha - 1.0) / sol.beta;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double g = (std::log(sol.occupations[i]) + 1.0) / sol.beta + v[i] + alpha_g;
    out = std::max(out, std::abs(g));
  }
  return out;
}

/// Discrete counterparts of the large-N fields, evaluated with lambda = 1/N.
/// They satisfy xi_i = d exp(-beta (e0_i + e1_i)) with the raw beta of the
/// solution, not the scaled one.
struct ScaledFields {
  /// n_i / (N h^2): density per unit area, sum_i xi_i h^2 = 1.
  std::vector<double> xi;
  /// exp(-alpha) / (N h^2)
  double d = 0.0;
  /// sum_{j != i} n_j / N^2 log|x_i - x_j|
  std::vector<double> e0;
  /// (1/N^2) [n_i(n_i-1)/4 L'(n_i) + (2n_i^2-1)/4 L(n_i)]
  std::vector<double> e1;
  /// Analytic bound 1/(2N) + (n_i/N)(1/2 log N - 1/2 log A) on |e1_i|.
  std::vector<double> e1_bound;
  /// (1/N^2) n_i^2 |L'(n_i)| = n_i / (2 N^2), bounded by 1/(2N).
  std::vector<double> e1_first_term;
};

inline ScaledFields scaling_limits(const OccupationSolution& sol, const CoarseGrid& grid) {
  const std::size_t m = grid.box_count();
  if (sol.occupations.size() != m) throw InvalidArgument("solution and grid disagree on the box count");
  const double nn = double(sol.n);
  const double h2 = grid.box_area();
  const double h = grid.h();
  const double area = grid.domain().area();
  const auto& c = grid.centers();

  ScaledFields f;
  f.d = std::exp(-sol.alpha) / (nn * h2);
  f.xi.reserve(m);
  f.e0.reserve(m);
  f.e1.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double ni = sol.occupations[i];
    f.xi.push_back(ni / (nn * h2));
    CompensatedSum e0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) e0 += sol.occupations[j] / (nn * nn) * std::log(distance(c[i], c[j]));
    f.e0.push_back(e0.value());
    f.e1.push_back(self_energy_gradient(ni, h) / (nn * nn));
    f.e1_bound.push_back(0.5 / nn + ni / nn * (0.5 * std::log(nn) - 0.5 * std::log(area)));
    f.e1_first_term.push_back(ni * ni * std::abs(mean_value_constant_derivative(ni)) / (nn * nn));
  }
  return f;
}

using BoxCountRule = std::function<std::size_t(int)>;

inline BoxCountRule boxes_equal_particles() {
  return [](int n) { return std::size_t(n); };
}

struct DecayRow {
  int n = 0;
  std::size_t m = 0;
  double max_abs_e1 = 0.0;
  /// Bound evaluated at the box attaining max |E1|.
  double bound = 0.0;
  /// Every box satisfies |E1_i| <= bound_i.
  bool all_within_bound = false;
  double max_first_term = 0.0;
  double first_term_bound = 0.0;
  std::size_t iterations = 0;
};

struct DecayStudy {
  std::vector<DecayRow> rows;
  bool monotone_decrease = false;
};

inline bool strictly_decreasing(std::span<const double> xs) {
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] < xs[k - 1])) return false;
  return true;
}

/// Solve the finite-N fixed point for each N (lambda = 1/N, M = rule(N)) at
/// the given scaled beta and tabulate the self-energy field against its bound.
inline DecayStudy self_energy_decay_study(std::span<const int> n_list, double scaled_beta,
                                          BoxCountRule rule = boxes_equal_particles(),
                                          Domain domain = Domain(1.0), FixedPointOptions opt = {}) {
  DecayStudy out;
  std::vector<double> maxima;
  for (int n : n_list) {
    const auto grid = CoarseGrid::with_box_count(domain, rule(n));
    const double lambda = 1.0 / double(n);
    const auto sol = occupation_fixed_point(grid, n, scaled_beta * double(n), lambda, opt);
    const auto f = scaling_limits(sol, grid);
    DecayRow row;
    row.n = n;
    row.m = grid.box_count();
    row.iterations = sol.iterations;
    row.all_within_bound = true;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < f.e1.size(); ++i) {
      if (std::abs(f.e1[i]) > std::abs(f.e1[arg])) arg = i;
      row.all_within_bound = row.all_within_bound && std::abs(f.e1[i]) <= f.e1_bound[i];
      row.max_first_term = std::max(row.max_first_term, f.e1_first_term[i]);
    }
    row.max_abs_e1 = std::abs(f.e1[arg]);
    row.bound = f.e1_bound[arg];
    row.first_term_bound = 0.5 / double(n);
    maxima.push_back(row.max_abs_e1);
    out.rows.push_back(row);
  }
  out.monotone_decrease = strictly_decreasing(maxima);
  return out;
}

// ---------------------------------------------------------------------------
// Continuum fields on a uniform cell-centred mesh.

/// P x P cell-centred mesh over the domain, row-major (index = iy * P + ix).
class Mesh {
public:
  Mesh(Domain domain, std::size_t resolution) : domain_(domain), p_(resolution) {
    if (resolution < 2) throw InvalidArgument("mesh resolution must be at least 2");
    w_ = domain.side() / double(resolution);
  }

  const Domain& domain() const noexcept { return domain_; }
  std::size_t resolution() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_ * p_; }
  double spacing() const noexcept { return w_; }
  double cell_area() const noexcept { return w_ * w_; }
  Point node(std::size_t ix, std::size_t iy) const noexcept {
    return {(double(ix) + 0.5) * w_, (double(iy) + 0.5) * w_};
  }

private:
  Domain domain_;
  std::size_t p_;
  double w_;
};

using ScalarField = std::vector<double>;

/// int over [-a, a]^2 of log|y| dy.
inline double log_integral_over_square(double half_side) {
  const double a = half_side;
  return 2.0 * a * a * (2.0 * std::log(a) + std::log(2.0) - 3.0 + 0.5 * std::numbers::pi);
}

/// Discrete log-kernel convolution E(x_a) = sum_b f_b K(x_a - x_b): midpoint
/// weights w^2 log|x_a - x_b| off the diagonal, the exact cell integral of
/// log|y| on it.
class LogConvolution {
public:
  explicit LogConvolution(const Mesh& mesh) : p_(mesh.resolution()), rows_(p_ * (2 * p_ - 1)) {
    const double w = mesh.spacing();
    const double area = mesh.cell_area();
    for (std::size_t dy = 0; dy < p_; ++dy) {
      double* row = &rows_[dy * (2 * p_ - 1)];
      for (std::size_t dx = 0; dx < p_; ++dx) {
        const double k = (dx == 0 && dy == 0)
                             ? log_integral_over_square(0.5 * w)
                             : area * std::log(w * std::hypot(double(dx), double(dy)));
        row[p_ - 1 + dx] = k;
        row[p_ - 1 - dx] = k;
      }
    }
  }

  ScalarField apply(std::span<const double> f) const {
    if (f.size() != p_ * p_) throw InvalidArgument("field size does not match the mesh");
    ScalarField out(p_ * p_, 0.0);
    const std::size_t stride = 2 * p_ - 1;
    for (std::size_t ay = 0; ay < p_; ++ay) {
      for (std::size_t by = 0; by < p_; ++by) {
        const std::size_t dy = ay > by ? ay - by : by - ay;
        const double* row = &rows_[dy * stride];
        const double* src = &f[by * p_];
        double* dst = &out[ay * p_];
        for (std::size_t ax = 0; ax < p_; ++ax) {
          // row is symmetric about p-1, so K(ax - bx) = row[p-1-ax+bx].
          const double* k = row + (p_ - 1 - ax);
          double s = 0.0;
          for (std::size_t bx = 0; bx < p_; ++bx) s += k[bx] * src[bx];
          dst[ax] += s;
        }
      }
    }
    return out;
  }

private:
  std::size_t p_;
  std::vector<double> rows_;
};

struct MeanField {
  Mesh mesh;
  ScalarField xi;
  ScalarField e0;
  ScalarField e1;
  /// E0 / (2 pi), so that the discrete Laplacian of psi approximates xi.
  ScalarField psi;
  double d = 0.0;
  double beta = 0.0;
  bool include_e1 = false;
  int n_for_e1 = 0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct ContinuumOptions {
  double tol = 1e-12;
  std::size_t max_iter = 5000;
  double damping = 0.5;
  double damping_floor = 1.0 / 64.0;
  /// Finite-N self-energy field. Off = the large-N limit equation.
  bool include_e1 = false;
  int n_for_e1 = 0;
  /// Box count used to turn density into occupations for E1; 0 means M = N.
  std::size_t boxes_for_e1 = 0;
  /// Blow-up when a single cell carries more than this fraction of the mass.
  double max_cell_mass = 0.25;
  BetaWindow window;
};

namespace detail {

/// E1 in continuum units: (1/N) [n(n-1)/4 L'(n) + (2n^2-1)/4 L(n)] with
/// n = xi * A * N / M.
inline ScalarField continuum_self_energy(std::span<const double> xi, double area, int n,
                                         std::size_t boxes) {
  const double nn = double(n);
  const double h = std::sqrt(area / double(boxes));
  ScalarField e1(xi.size());
  for (std::size_t a = 0; a < xi.size(); ++a) {
    const double occ = std::max(xi[a] * area * nn / double(boxes), 1e-300);
    e1[a] = self_energy_gradient(occ, h) / nn;
  }
  return e1;
}

/// exp(u) normalised to unit mass on the mesh.
inline ScalarField normalized_exp(std::span<const double> u, double cell_area) {
  const double top = *std::max_element(u.begin(), u.end());
  ScalarField out(u.size());
  CompensatedSum mass;
  for (std::size_t a = 0; a < u.size(); ++a) {
    out[a] = std::exp(u[a] - top);
    mass += out[a];
  }
  const double scale = 1.0 / (mass.value() * cell_area);
  for (double& x : out) x *= scale;
  return out;
}

} // namespace detail

/// Damped Picard iteration xi <- normalize(exp(-beta (E0[xi] + E1))) with
/// E0[xi] = int log|x - y| xi(y) dy. `beta` is the scaled (continuum) inverse
/// temperature.
inline MeanField solve_continuum(double beta, std::size_t mesh_resolution, Domain domain = Domain(1.0),
                                 ContinuumOptions opt = {}) {
  if (mesh_resolution < 16) throw InvalidArgument("mesh resolution must be at least 16");
  opt.window.require(beta);
  if (opt.include_e1 && opt.n_for_e1 < 1) throw InvalidArgument("include_e1 needs n_for_e1 >= 1");
  const std::size_t boxes =
      opt.boxes_for_e1 ? opt.boxes_for_e1 : std::size_t(std::max(opt.n_for_e1, 1));

  MeanField mf{Mesh(domain, mesh_resolution), {}, {}, {}, {}, 0.0, beta, opt.include_e1,
               opt.n_for_e1, 0, 0.0};
  const Mesh& mesh = mf.mesh;
  const double area = domain.area();
  const double cell = mesh.cell_area();
  const LogConvolution conv(mesh);

  mf.xi.assign(mesh.size(), 1.0 / area);
  mf.e1.assign(mesh.size(), 0.0);
  double gamma = opt.damping;
  double previous = std::numeric_limits<double>::infinity();
  std::ostringstream trace;
  std::vector<double> u(mesh.size());
  for (std::size_t it = 0;; ++it) {
    mf.e0 = conv.apply(mf.xi);
    if (opt.include_e1) mf.e1 = detail::continuum_self_energy(mf.xi, area, opt.n_for_e1, boxes);
    for (std::size_t a = 0; a < u.size(); ++a) u[a] = -beta * (mf.e0[a] + mf.e1[a]);
    const auto target = detail::normalized_exp(u, cell);
    if (*std::max_element(target.begin(), target.end()) * cell > opt.max_cell_mass)
      throw AdmissibilityError("density blow-up at beta = " + std::to_string(beta));
    double residual = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a)
      residual = std::max(residual, std::abs(target[a] - mf.xi[a]) * area);
    mf.residual = residual;
    mf.iterations = it;
    trace << residual << '\n';
    if (residual <= opt.tol) {
      mf.xi = target;
      break;
    }
    if (it >= opt.max_iter)
      throw IterationLimit("continuum mean-field iteration did not converge (residual " +
                               std::to_string(residual) + ")",
                           trace.str());
    if (residual > previous) gamma = std::max(0.5 * gamma, opt.damping_floor);
    previous = residual;
    for (std::size_t a = 0; a < u.size(); ++a) mf.xi[a] = (1.0 - gamma) * mf.xi[a] + gamma * target[a];
  }

  mf.e0 = conv.apply(mf.xi);
  if (opt.include_e1) mf.e1 = detail::continuum_self_energy(mf.xi, area, opt.n_for_e1, boxes);
  mf.psi.resize(mesh.size());
  CompensatedSum z;
  for (std::size_t a = 0; a < mesh.size(); ++a) {
    mf.psi[a] = mf.e0[a] / (2.0 * std::numbers::pi);
    z += std::exp(-beta * (mf.e0[a] + mf.e1[a])) * cell;
  }
  mf.d = 1.0 / z.value();
  return mf;
}

/// max |Lap_h E0 - 2 pi xi| over nodes at least margin_fraction * side away
/// from the boundary (five-point Laplacian).
inline double interior_laplacian_residual(const MeanField& mf, double margin_fraction = 0.125) {
  const std::size_t p = mf.mesh.resolution();
  const double w = mf.mesh.spacing();
  const double margin = margin_fraction * mf.mesh.domain().side();
  const double side = mf.mesh.domain().side();
  double out = 0.0;
  for (std::size_t iy = 1; iy + 1 < p; ++iy) {
    for (std::size_t ix = 1; ix + 1 < p; ++ix) {
      const Point x = mf.mesh.node(ix, iy);
      if (x.x < margin || x.y < margin || x.x > side - margin || x.y > side - margin) continue;
      const std::size_t a = iy * p + ix;
      const double lap = (mf.e0[a - 1] + mf.e0[a + 1] + mf.e0[a - p] + mf.e0[a + p] - 4.0 * mf.e0[a]) / (w * w);
      out = std::max(out, std::abs(lap - 2.0 * std::numbers::pi * mf.xi[a]));
    }
  }
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line needs matching samples");
  const double n = double(x.size());
  CompensatedSum sx, sy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  CompensatedSum sxx, sxy, syy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  LinearFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  f.r_squared = syy.value() > 0.0 ? sxy.value() * sxy.value() / (sxx.value() * syy.value()) : 1.0;
  return f;
}

/// Regression of log xi on E0 + E1 over the mesh; a stationary density gives
/// slope -beta with R^2 = 1.
inline LinearFit log_density_fit(const MeanField& mf) {
  std::vector<double> x(mf.xi.size()), y(mf.xi.size());
  for (std::size_t a = 0; a < x.size(); ++a) {
    x[a] = mf.e0[a] + mf.e1[a];
    y[a] = std::log(mf.xi[a]);
  }
  return fit_line(x, y);
}

// ---------------------------------------------------------------------------
// Two-species gas (equal and opposite strengths).

struct SinhPoissonField {
  Mesh mesh;
  ScalarField xi_plus;
  ScalarField xi_minus;
  /// xi_plus - xi_minus
  ScalarField omega;
  /// log-kernel potential of omega
  ScalarField e0;
  double beta = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

struct SinhPoissonOptions {
  double tol = 1e-12;
  std::size_t max_iter = 20000;
  double damping = 0.5;
  double damping_floor = 1.0 / 64.0;
  /// Initial species densities (1 +- seed_amplitude cos(pi x / side)) / A.
  double seed_amplitude = 0.1;
  /// Start from the species-swapped initial state.
  bool swap_species = false;
  double max_cell_mass = 0.25;
  BetaWindow window;
};

/// Self-consistent iteration xi_+- <- normalize(exp(-+ beta E0[xi_+ - xi_-])),
/// each species carrying unit mass so the total circulation is zero.
inline SinhPoissonField solve_sinh_poisson(double beta, std::size_t mesh_resolution,
                                           Domain domain = Domain(1.0), SinhPoissonOptions opt = {}) {
  if (mesh_resolution < 16) throw InvalidArgument("mesh resolution must be at least 16");
  opt.window.require(beta);
  SinhPoissonField f{Mesh(domain, mesh_resolution), {}, {}, {}, {}, beta, 0, 0.0};
  const Mesh& mesh = f.mesh;
  const std::size_t p = mesh.resolution();
  const double area = domain.area();
  const double cell = mesh.cell_area();
  const LogConvolution conv(mesh);

  const double sign = opt.swap_species ? -1.0 : 1.0;
  f.xi_plus.resize(mesh.size());
  f.xi_minus.resize(mesh.size());
  for (std::size_t iy = 0; iy < p; ++iy)
    for (std::size_t ix = 0; ix < p; ++ix) {
      const double phi = std::cos(std::numbers::pi * mesh.node(ix, iy).x / domain.side());
      f.xi_plus[iy * p + ix] = (1.0 + sign * opt.seed_amplitude * phi) / area;
      f.xi_minus[iy * p + ix] = (1.0 - sign * opt.seed_amplitude * phi) / area;
    }

  double gamma = opt.damping;
  double previous = std::numeric_limits<double>::infinity();
  std::ostringstream trace;
  ScalarField omega(mesh.size()), up(mesh.size()), um(mesh.size());
  for (std::size_t it = 0;; ++it) {
    for (std::size_t a = 0; a < omega.size(); ++a) omega[a] = f.xi_plus[a] - f.xi_minus[a];
    f.e0 = conv.apply(omega);
    for (std::size_t a = 0; a < omega.size(); ++a) {
      up[a] = -beta * f.e0[a];
      um[a] = beta * f.e0[a];
    }
    const auto tp = detail::normalized_exp(up, cell);
    const auto tm = detail::normalized_exp(um, cell);
    const double peak = std::max(*std::max_element(tp.begin(), tp.end()), *std::max_element(tm.begin(), tm.end()));
    if (peak * cell > opt.max_cell_mass)
      throw AdmissibilityError("density blow-up at beta = " + std::to_string(beta));
    double residual = 0.0;
    for (std::size_t a = 0; a < omega.size(); ++a)
      residual = std::max({residual, std::abs(tp[a] - f.xi_plus[a]) * area,
                           std::abs(tm[a] - f.xi_minus[a]) * area});
    f.residual = residual;
    f.iterations = it;
    trace << residual << '\n';
    if (residual <= opt.tol) {
      f.xi_plus = tp;
      f.xi_minus = tm;
      break;
    }
    if (it >= opt.max_iter)
      throw IterationLimit("two-species iteration did not converge (residual " + std::to_string(residual) + ")",
                           trace.str());
    if (residual > previous) gamma = std::max(0.5 * gamma, opt.damping_floor);
    previous = residual;
    for (std::size_t a = 0; a < omega.size(); ++a) {
      f.xi_plus[a] = (1.0 - gamma) * f.xi_plus[a] + gamma * tp[a];
      f.xi_minus[a] = (1.0 - gamma) * f.xi_minus[a] + gamma * tm[a];
    }
  }
  f.omega.resize(mesh.size());
  for (std::size_t a = 0; a < omega.size(); ++a) f.omega[a] = f.xi_plus[a] - f.xi_minus[a];
  f.e0 = conv.apply(f.omega);
  return f;
}

/// Least-squares fit omega ~ a exp(-beta E0) + b exp(beta E0), i.e.
/// omega = c sinh(-beta (E0 - e_shift)) when a b < 0.
struct SinhFit {
  double a = 0.0;
  double b = 0.0;
  double amplitude = 0.0;
  double shift = 0.0;
  double rms_residual = 0.0;
  bool is_sinh = false;
};

inline SinhFit fit_sinh(const SinhPoissonField& f) {
  const double beta = f.beta;
  CompensatedSum s11, s12, s22, r1, r2;
  for (std::size_t k = 0; k < f.omega.size(); ++k) {
    const double g1 = std::exp(-beta * f.e0[k]);
    const double g2 = std::exp(beta * f.e0[k]);
    s11 += g1 * g1;
    s12 += g1 * g2;
    s22 += g2 * g2;
    r1 += g1 * f.omega[k];
    r2 += g2 * f.omega[k];
  }
  SinhFit fit;
  const double det = s11.value() * s22.value() - s12.value() * s12.value();
  if (std::abs(det) > 0.0) {
    fit.a = (r1.value() * s22.value() - r2.value() * s12.value()) / det;
    fit.b = (s11.value() * r2.value() - s12.value() * r1.value()) / det;
  }
  CompensatedSum res;
  for (std::size_t k = 0; k < f.omega.size(); ++k) {
    const double model = fit.a * std::exp(-beta * f.e0[k]) + fit.b * std::exp(beta * f.e0[k]);
    res += (f.omega[k] - model) * (f.omega[k] - model);
  }
  fit.rms_residual = std::sqrt(res.value() / double(f.omega.size()));
  fit.is_sinh = fit.a * fit.b < 0.0;
  if (fit.is_sinh && beta != 0.0) {
    fit.amplitude = std::copysign(2.0 * std::sqrt(-fit.a * fit.b), fit.a);
    fit.shift = std::log(-fit.a / fit.b) / (2.0 * beta);
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Finite N against the continuum.

/// Mesh field averaged over each coarse box; the mesh must nest in the grid.
inline std::vector<double> box_average(std::span<const double> field, const Mesh& mesh,
                                       const CoarseGrid& grid) {
  const std::size_t p = mesh.resolution();
  if (p % grid.nx() != 0 || p % grid.ny() != 0)
    throw InvalidArgument("mesh resolution " + std::to_string(p) + " does not nest in a " +
                          std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()) + " grid");
  const std::size_t bx = p / grid.nx();
  const std::size_t by = p / grid.ny();
  std::vector<double> out(grid.box_count(), 0.0);
  for (std::size_t iy = 0; iy < p; ++iy)
    for (std::size_t ix = 0; ix < p; ++ix) out[(iy / by) * grid.nx() + ix / bx] += field[iy * p + ix];
  for (double& v : out) v /= double(bx * by);
  return out;
}

struct ConvergenceRow {
  int n = 0;
  std::size_t m = 0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double l1_distance = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  bool monotone_decrease = false;
  std::size_t continuum_iterations = 0;
};

/// L1 distance sum_i |n_i/(N h^2) - <xi>_box_i| h^2 between the finite-N
/// occupation density (M = rule(N), lambda = 1/N) and the box-averaged
/// large-N density, for each N.
inline ConvergenceStudy finite_vs_continuum(std::span<const int> n_list, double scaled_beta,
                                            std::size_t mesh_resolution, Domain domain = Domain(1.0),
                                            BoxCountRule rule = boxes_equal_particles(),
                                            FixedPointOptions fp = {}, ContinuumOptions co = {}) {
  co.include_e1 = false;
  const auto mf = solve_continuum(scaled_beta, mesh_resolution, domain, co);
  ConvergenceStudy out;
  out.continuum_iterations = mf.iterations;
  std::vector<double> dist;
  for (int n : n_list) {
    const auto grid = CoarseGrid::with_box_count(domain, rule(n));
    const auto sol = occupation_fixed_point(grid, n, scaled_beta * double(n), 1.0 / double(n), fp);
    const auto avg = box_average(mf.xi, mf.mesh, grid);
    const double h2 = grid.box_area();
    CompensatedSum l1;
    for (std::size_t i = 0; i < avg.size(); ++i)
      l1 += std::abs(sol.occupations[i] / (double(n) * h2) - avg[i]) * h2;
    out.rows.push_back({n, grid.box_count(), grid.nx(), grid.ny(), l1.value()});
    dist.push_back(l1.value());
  }
  out.monotone_decrease = strictly_decreasing(dist);
  return out;
}

} // namespace pvstat

#endif // PVSTAT_MEANFIELD_HPP
