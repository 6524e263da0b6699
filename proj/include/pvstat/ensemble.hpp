#ifndef PVSTAT_ENSEMBLE_HPP
#define PVSTAT_ENSEMBLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pvstat/errors.hpp"
#include "pvstat/geometry.hpp"
#include "pvstat/hamiltonian.hpp"
#include "pvstat/numeric.hpp"

namespace pvstat {

inline constexpr double default_enumeration_cap = 1e7;

/// log W(s) = log N! - sum_i log n_i!
inline double degeneracy_log(const Macrostate& s) {
  double out = std::lgamma(double(s.total()) + 1.0);
  for (int n : s.occupations()) out -= std::lgamma(double(n) + 1.0);
  return out;
}

/// log of the number of macrostates, C(N + M - 1, M - 1).
inline double macrostate_count_log(int n, std::size_t m) {
  return log_binomial(std::uint64_t(n) + m - 1, m - 1);
}

/// Calls f(const Macrostate&) for every composition of n into m parts,
/// starting at (n, 0, ..., 0) and ending at (0, ..., 0, n) in descending
/// lexicographic order.
template <class F>
void for_each_macrostate(int n, std::size_t m, F&& f, double cap = default_enumeration_cap) {
  if (n < 0 || m == 0) throw InvalidArgument("enumeration needs N >= 0 and M >= 1");
  const double count_log = macrostate_count_log(n, m);
  if (count_log > std::log(cap))
    throw EnumerationTooLarge("enumerating N=" + std::to_string(n) + ", M=" + std::to_string(m) +
                              " needs ~" + std::to_string(std::exp(count_log)) +
                              " macrostates, cap is " + std::to_string(cap));
  std::vector<int> occ(m, 0);
  occ[0] = n;
  for (;;) {
    f(Macrostate(occ));
    if (m == 1) return;
    const int tail = occ[m - 1];
    occ[m - 1] = 0;
    std::size_t j = m - 1;
    while (j > 0 && occ[j - 1] == 0) --j;
    if (j == 0) return;
    --occ[j - 1];
    occ[j] = tail + 1;
  }
}

inline std::vector<Macrostate> enumerate_macrostates(int n, std::size_t m,
                                                     double cap = default_enumeration_cap) {
  std::vector<Macrostate> out;
  for_each_macrostate(n, m, [&](const Macrostate& s) { out.push_back(s); }, cap);
  return out;
}

/// Log of one term W(s) h^{2N} exp(-beta H0(s)) of the coarse partition sum.
struct MacrostateWeight {
  double log_W = 0.0;
  double log_boltzmann = 0.0;
  double log_volume = 0.0;
  double log_weight = 0.0;
};

inline MacrostateWeight macrostate_weight(const Macrostate& s, const CoarseGrid& grid, double beta,
                                          double lambda) {
  MacrostateWeight w;
  w.log_W = degeneracy_log(s);
  w.log_boltzmann = -beta * coarse_energy(s, grid, lambda);
  w.log_volume = double(s.total()) * std::log(grid.box_area());
  w.log_weight = w.log_W + w.log_volume + w.log_boltzmann;
  return w;
}

/// Mean distance between two independent uniform points in an a x b
/// rectangle.
inline double rectangle_mean_distance(double a, double b) {
  const double d = std::hypot(a, b);
  return (a * a * a / (b * b) + b * b * b / (a * a) + d * (3.0 - a * a / (b * b) - b * b / (a * a)) +
          2.5 * (b * b / a * std::log((a + d) / b) + a * a / b * std::log((b + d) / a))) /
         15.0;
}

/// Per-macrostate quantities needed by the variational free energies.
struct EnsembleEntry {
  Macrostate state;
  MacrostateWeight weight;
  double coarse_energy = 0.0;
  /// -1/4 sum_i lambda^2 n_i (n_i - 1) L(n_i): intra-box energy under the
  /// mean-value replacement.
  double self_energy = 0.0;
  /// Expected first-order inter-box correction given s (vortices uniform in
  /// their boxes); this is the O(h) term dropped from the variational bound.
  double inter_box_first_order = 0.0;
};

/// Exact enumeration of the coarse-grained canonical ensemble for fixed
/// (N, grid, beta, lambda). All sums are carried in log space.
class Ensemble {
public:
  Ensemble(int n, const CoarseGrid& grid, double beta, double lambda,
           double cap = default_enumeration_cap)
      : n_(n), grid_(grid), beta_(beta), lambda_(lambda) {
    if (n < 1) throw InvalidArgument("ensemble needs N >= 1");
    const auto& c = grid.centers();
    const double mean_sep = rectangle_mean_distance(grid.box_width(), grid.box_height());
    const double lam2 = lambda * lambda;
    LogSumExp lse;
    for_each_macrostate(
        n, grid.box_count(),
        [&](const Macrostate& s) {
          EnsembleEntry e;
          e.state = s;
          e.coarse_energy = coarse_energy(s, grid, lambda);
          e.weight.log_W = degeneracy_log(s);
          e.weight.log_boltzmann = -beta * e.coarse_energy;
          e.weight.log_volume = double(n) * std::log(grid.box_area());
          e.weight.log_weight = e.weight.log_W + e.weight.log_volume + e.weight.log_boltzmann;
          e.self_energy = -0.5 * intra_box_self_energy(s, grid, lambda);
          const auto occ = s.occupations();
          CompensatedSum inter;
          for (std::size_t i = 0; i < occ.size(); ++i) {
            if (occ[i] == 0) continue;
            for (std::size_t j = i + 1; j < occ.size(); ++j)
              if (occ[j] != 0) inter += double(occ[i]) * double(occ[j]) / distance(c[i], c[j]);
          }
          e.inter_box_first_order = -lam2 * mean_sep * inter.value();
          lse.add(e.weight.log_weight);
          entries_.push_back(std::move(e));
        },
        cap);
    log_z_ = lse.value();
  }

  int particle_count() const noexcept { return n_; }
  const CoarseGrid& grid() const noexcept { return grid_; }
  double beta() const noexcept { return beta_; }
  double lambda() const noexcept { return lambda_; }
  std::span<const EnsembleEntry> entries() const noexcept { return entries_; }
  double log_partition_function() const noexcept { return log_z_; }

  double probability(std::size_t k) const { return std::exp(entries_.at(k).weight.log_weight - log_z_); }

  std::vector<double> probabilities() const {
    std::vector<double> p;
    p.reserve(entries_.size());
    for (std::size_t k = 0; k < entries_.size(); ++k) p.push_back(probability(k));
    return p;
  }

  /// Index of the most probable macrostate; the first in enumeration order on
  /// ties.
  std::size_t most_probable_index() const noexcept {
    std::size_t best = 0;
    for (std::size_t k = 1; k < entries_.size(); ++k)
      if (entries_[k].weight.log_weight > entries_[best].weight.log_weight) best = k;
    return best;
  }

  /// Expectation of a per-macrostate quantity under P0.
  template <class F>
  double expectation(F&& f) const {
    CompensatedSum s;
    for (std::size_t k = 0; k < entries_.size(); ++k) s += probability(k) * f(entries_[k]);
    return s.value();
  }

private:
  int n_;
  CoarseGrid grid_;
  double beta_;
  double lambda_;
  std::vector<EnsembleEntry> entries_;
  double log_z_ = 0.0;
};

/// log Z0 = log sum_s W(s) h^{2N} exp(-beta H0(s)).
inline double partition_function_log(int n, const CoarseGrid& grid, double beta, double lambda,
                                     double cap = default_enumeration_cap) {
  return Ensemble(n, grid, beta, lambda, cap).log_partition_function();
}

/// P0(s) = W(s) h^{2N} exp(-beta H0(s)) / Z0.
inline double macrostate_probability(const Macrostate& s, const CoarseGrid& grid, double beta,
                                     double lambda, double cap = default_enumeration_cap) {
  const double log_z = partition_function_log(s.total(), grid, beta, lambda, cap);
  return std::exp(macrostate_weight(s, grid, beta, lambda).log_weight - log_z);
}

namespace detail {
inline void require_normalized(std::span<const double> p, double tol) {
  CompensatedSum s;
  for (double x : p) {
    if (!(x >= 0.0)) throw NormalizationError("probabilities must be non-negative");
    s += x;
  }
  if (std::abs(s.value() - 1.0) > tol)
    throw NormalizationError("probabilities sum to " + std::to_string(s.value()) + ", not 1");
}
} // namespace detail

/// S = -sum_s P(s) log P(s) (k_B = 1); zero-probability terms contribute 0.
inline double gibbs_entropy(std::span<const double> p, double tol = 1e-10) {
  detail::require_normalized(p, tol);
  CompensatedSum s;
  for (double x : p)
    if (x > 0.0) s += -x * std::log(x);
  return s.value();
}

/// Entropy of a distribution over macrostates spread evenly over each
/// macrostate's exp(log_multiplicity[k]) labelled box assignments:
/// -sum_k P_k (log P_k - log_multiplicity_k).
inline double gibbs_entropy_grouped(std::span<const double> p, std::span<const double> log_multiplicity,
                                    double tol = 1e-10) {
  if (p.size() != log_multiplicity.size())
    throw InvalidArgument("gibbs_entropy_grouped: size mismatch");
  detail::require_normalized(p, tol);
  CompensatedSum s;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) s += -p[k] * (std::log(p[k]) - log_multiplicity[k]);
  return s.value();
}

struct LandauConcentration {
  Macrostate most_probable;
  double probability = 0.0;
  /// Number of macrostates sharing the maximal weight (ties broken by
  /// enumeration order).
  std::size_t ties = 1;
};

inline LandauConcentration landau_concentration(const Ensemble& ens) {
  const std::size_t best = ens.most_probable_index();
  const double top = ens.entries()[best].weight.log_weight;
  LandauConcentration out{ens.entries()[best].state, ens.probability(best), 0};
  for (const auto& e : ens.entries())
    if (std::abs(e.weight.log_weight - top) <= 1e-12 * std::max(1.0, std::abs(top))) ++out.ties;
  return out;
}

inline LandauConcentration landau_concentration(int n, const CoarseGrid& grid, double beta,
                                                double lambda, double cap = default_enumeration_cap) {
  return landau_concentration(Ensemble(n, grid, beta, lambda, cap));
}

/// P0 mass of macrostates within max-norm distance `radius` of `center`.
inline double neighborhood_mass(const Ensemble& ens, const Macrostate& center, double radius) {
  CompensatedSum s;
  const auto entries = ens.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto occ = entries[k].state.occupations();
    bool inside = true;
    for (std::size_t i = 0; i < occ.size() && inside; ++i)
      inside = std::abs(double(occ[i] - center[i])) <= radius;
    if (inside) s += ens.probability(k);
  }
  return s.value();
}

// ---------------------------------------------------------------------------
// Exact free energy for tiny N by quadrature.

struct OracleOptions {
  /// Composite Gauss-Legendre panels per axis at the coarse resolution; the
  /// fine resolution doubles them. Zero picks a default for N.
  std::size_t panels = 0;
  /// Pair separations are clamped below at epsilon * side.
  double epsilon = 1e-12;
  double relative_tolerance = 5e-3;
};

struct OracleResult {
  double free_energy = 0.0;
  double log_partition_function = 0.0;
  double free_energy_coarse = 0.0;
  /// |F_fine - F_coarse|, the oracle's own error estimate.
  double error_estimate = 0.0;
  double relative_gap = 0.0; // on Z
};

namespace detail {

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline AxisRule composite_gauss(double side, std::size_t panels) {
  using rule = boost::math::quadrature::gauss<double, 4>;
  AxisRule out;
  const double w = side / double(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (double(p) + 0.5) * w;
    for (std::size_t k = 0; k < rule::abscissa().size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        out.nodes.push_back(mid + sign * 0.5 * w * rule::abscissa()[k]);
        out.weights.push_back(0.5 * w * rule::weights()[k]);
      }
    }
  }
  return out;
}

/// Tensor-grid estimate of log Z = log int exp(-beta H) over [0, side]^{2N}.
/// Vortex k uses panels + k panels per axis so that no two vortices share a
/// node.
inline double tensor_log_partition(std::size_t n, double side, double beta, double lambda,
                                   std::size_t panels, double epsilon) {
  if (n == 1) return std::log(side * side);
  std::vector<AxisRule> rules;
  for (std::size_t k = 0; k < n; ++k) rules.push_back(composite_gauss(side, panels + k));

  // One "axis tuple" = a choice of x (or y) node per vortex.
  const std::size_t pairs = n * (n - 1) / 2;
  std::vector<double> tuple_weight;
  std::vector<double> tuple_d2; // pairs entries per tuple
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) w *= rules[k].weights[idx[k]];
    tuple_weight.push_back(w);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const double d = rules[a].nodes[idx[a]] - rules[b].nodes[idx[b]];
        tuple_d2.push_back(d * d);
      }
    std::size_t k = 0;
    while (k < n && ++idx[k] == rules[k].nodes.size()) idx[k++] = 0;
    if (k == n) break;
  }

  const double half_power = 0.5 * beta * lambda * lambda;
  const double eps2 = std::pow(epsilon * side, 2);
  const std::size_t t = tuple_weight.size();
  CompensatedSum total;
  for (std::size_t i = 0; i < t; ++i) {
    CompensatedSum row;
    const double* dx = &tuple_d2[i * pairs];
    for (std::size_t j = 0; j < t; ++j) {
      const double* dy = &tuple_d2[j * pairs];
      double log_r2 = 0.0;
      for (std::size_t p = 0; p < pairs; ++p) log_r2 += std::log(std::max(dx[p] + dy[p], eps2));
      row += tuple_weight[j] * std::exp(half_power * log_r2);
    }
    total += tuple_weight[i] * row.value();
  }
  return std::log(total.value());
}

} // namespace detail

/// F = -(1/beta) log int exp(-beta H) dx_1...dx_N for N <= 3, by tensor-grid
/// quadrature at two resolutions. Throws OracleUnconverged if the two
/// partition-function estimates differ by more than the relative tolerance.
inline OracleResult exact_free_energy_oracle(std::size_t n, Domain domain, double beta,
                                             double lambda, OracleOptions opt = {}) {
  if (n < 1 || n > 3) throw InvalidArgument("the quadrature oracle supports 1 <= N <= 3");
  if (beta == 0.0) throw UndefinedFreeEnergy("free energy is undefined at beta = 0");
  if (n >= 2 && beta * lambda * lambda <= -2.0)
    throw AdmissibilityError("pair Boltzmann factor r^(beta lambda^2) is not integrable for "
                             "beta lambda^2 <= -2");
  const std::size_t panels = opt.panels ? opt.panels : (n == 2 ? 8 : 2);
  const double coarse = detail::tensor_log_partition(n, domain.side(), beta, lambda, panels, opt.epsilon);
  const double fine = detail::tensor_log_partition(n, domain.side(), beta, lambda, 2 * panels, opt.epsilon);
  OracleResult out;
  out.log_partition_function = fine;
  out.free_energy = -fine / beta;
  out.free_energy_coarse = -coarse / beta;
  out.error_estimate = std::abs(out.free_energy - out.free_energy_coarse);
  out.relative_gap = std::abs(std::expm1(coarse - fine));
  if (out.relative_gap > opt.relative_tolerance)
    throw OracleUnconverged("quadrature oracle did not converge: F_coarse = " +
                                std::to_string(out.free_energy_coarse) +
                                ", F_fine = " + std::to_string(out.free_energy),
                            out.free_energy_coarse, out.free_energy);
  return out;
}

/// log Z for two vortices through the separation density of two uniform
/// points in the square: Z = int_0^{sqrt2 s} r^{1 + beta lambda^2} K(r) dr,
/// where K is the angular integral of (s - |u_x|)(s - |u_y|).
inline double pair_log_partition_function(Domain domain, double beta, double lambda) {
  const double s = domain.side();
  const double p = beta * lambda * lambda;
  if (p <= -2.0)
    throw AdmissibilityError("pair Boltzmann factor is not integrable for beta lambda^2 <= -2");
  auto angular = [s](double r) {
    if (r <= s) return 2.0 * std::numbers::pi * s * s - 8.0 * s * r + 2.0 * r * r;
    const double t = std::sqrt(std::max(0.0, r * r - s * s));
    return 4.0 * (s * s * (0.5 * std::numbers::pi - 2.0 * std::acos(s / r)) - 2.0 * s * (s - t) +
                  0.5 * (s * s - t * t));
  };
  auto f = [&](double r) { return r <= 0.0 ? 0.0 : std::pow(r, 1.0 + p) * angular(r); };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double inner = integrator.integrate(f, 0.0, s);
  const double outer = integrator.integrate(f, s, std::sqrt(2.0) * s);
  return std::log(inner + outer);
}

// ---------------------------------------------------------------------------
// Variational free energies.

enum class FreeEnergyMode { landau, full };

inline const char* to_string(FreeEnergyMode m) noexcept {
  return m == FreeEnergyMode::landau ? "landau" : "full";
}

struct FreeEnergyReport {
  int n = 0;
  std::size_t m = 0;
  double beta = 0.0;
  double lambda = 0.0;
  FreeEnergyMode mode = FreeEnergyMode::full;
  double log_z0 = 0.0;
  double f0 = 0.0;
  /// F0 + <H1>_0 with the intra-box term in mean-value form, summed over
  /// macrostates (full) or taken at the most probable macrostate (landau).
  double f_var = 0.0;
  /// <H0 + H1>_0 - T S0, with S0 the entropy of the coarse-grained phase-space
  /// density.
  double f_var_gibbs = 0.0;
  Macrostate most_probable;
  double most_probable_probability = 0.0;
  /// |<first-order inter-box correction>_0|, the O(h) term left out of f_var.
  double truncation_term = 0.0;
  std::optional<double> f_exact;
  double oracle_error = 0.0;
  double tolerance = 0.0;
  /// F_exact <= F_var + tol for beta > 0, F_exact >= F_var - tol for beta < 0.
  std::optional<bool> bound_satisfied;
};

struct FreeEnergyOptions {
  FreeEnergyMode mode = FreeEnergyMode::full;
  /// Run the quadrature oracle (N <= 3 only) and check the bound direction.
  bool with_oracle = false;
  OracleOptions oracle;
  double enumeration_cap = default_enumeration_cap;
};

inline FreeEnergyReport f_var(int n, const CoarseGrid& grid, double beta, double lambda,
                              FreeEnergyOptions opt = {}) {
  if (beta == 0.0) throw UndefinedFreeEnergy("free energy is undefined at beta = 0");
  const Ensemble ens(n, grid, beta, lambda, opt.enumeration_cap);
  const auto entries = ens.entries();

  FreeEnergyReport r;
  r.n = n;
  r.m = grid.box_count();
  r.beta = beta;
  r.lambda = lambda;
  r.mode = opt.mode;
  r.log_z0 = ens.log_partition_function();
  r.f0 = -r.log_z0 / beta;

  const auto star = landau_concentration(ens);
  r.most_probable = star.most_probable;
  r.most_probable_probability = star.probability;

  if (opt.mode == FreeEnergyMode::full) {
    r.f_var = r.f0 + ens.expectation([](const EnsembleEntry& e) { return e.self_energy; });
  } else {
    const auto& e = entries[ens.most_probable_index()];
    r.f_var = -e.weight.log_weight / beta + e.self_energy;
  }

  // Second route: expectations and entropy from the probabilities alone.
  const auto p = ens.probabilities();
  std::vector<double> log_w;
  log_w.reserve(entries.size());
  CompensatedSum mean_energy;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    log_w.push_back(entries[k].weight.log_W);
    mean_energy += p[k] * (entries[k].coarse_energy + entries[k].self_energy);
  }
  const double entropy = gibbs_entropy_grouped(p, log_w) + double(n) * std::log(grid.box_area());
  r.f_var_gibbs = mean_energy.value() - entropy / beta;

  r.truncation_term =
      std::abs(ens.expectation([](const EnsembleEntry& e) { return e.inter_box_first_order; }));

  if (opt.with_oracle) {
    const auto oracle = exact_free_energy_oracle(std::size_t(n), grid.domain(), beta, lambda, opt.oracle);
    r.f_exact = oracle.free_energy;
    r.oracle_error = oracle.error_estimate;
    r.tolerance = std::max(opt.oracle.relative_tolerance * std::abs(oracle.free_energy),
                           oracle.error_estimate) +
                  r.truncation_term;
    r.bound_satisfied = beta > 0.0 ? *r.f_exact <= r.f_var + r.tolerance
                                   : *r.f_exact >= r.f_var - r.tolerance;
  }
  return r;
}

/// Monte Carlo estimate of the exact <H - H0>_0: macrostates drawn from P0,
/// vortices uniform inside their boxes. Diagnostic for the mean-value form.
struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

inline MonteCarloEstimate remainder_expectation_monte_carlo(const Ensemble& ens, std::size_t samples,
                                                            std::uint64_t seed) {
  const auto entries = ens.entries();
  const auto p = ens.probabilities();
  std::vector<double> cdf(p.size());
  CompensatedSum acc;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    cdf[k] = acc.value();
  }
  const auto& grid = ens.grid();
  std::mt19937_64 rng(seed);
  CompensatedSum sum, sum2;
  std::size_t taken = 0;
  while (taken < samples) {
    const double u = uniform01(rng) * cdf.back();
    const std::size_t k = std::size_t(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const auto occ = entries[std::min(k, entries.size() - 1)].state.occupations();
    std::vector<Point> pos;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      const Point c = grid.center(i);
      for (int j = 0; j < occ[i]; ++j)
        pos.push_back({c.x + grid.box_width() * (uniform01(rng) - 0.5),
                       c.y + grid.box_height() * (uniform01(rng) - 0.5)});
    }
    try {
      const VortexConfiguration cfg(grid.domain(), std::move(pos), ens.lambda());
      const double h1 = full_energy(cfg) - coarse_energy(assign_boxes(cfg, grid), grid, ens.lambda());
      sum += h1;
      sum2 += h1 * h1;
      ++taken;
    } catch (const SingularConfiguration&) {
    }
  }
  MonteCarloEstimate out;
  out.samples = taken;
  out.mean = sum.value() / double(taken);
  const double var = std::max(0.0, sum2.value() / double(taken) - out.mean * out.mean);
  out.std_error = std::sqrt(var / double(taken));
  return out;
}

} // namespace pvstat

#endif // PVSTAT_ENSEMBLE_HPP
