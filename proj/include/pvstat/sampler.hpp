#ifndef PVSTAT_SAMPLER_HPP
#define PVSTAT_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pvstat/errors.hpp"
#include "pvstat/geometry.hpp"
#include "pvstat/hamiltonian.hpp"
#include "pvstat/numeric.hpp"

namespace pvstat {

/// Lower edge of the admissible window for the scaled inverse temperature
/// beta * lambda^2 * N. Conservative; the true collapse threshold is not
/// computed here.
inline constexpr double default_scaled_beta_min = -4.0 * std::numbers::pi;

inline double scaled_beta(double beta, double lambda, std::size_t n) noexcept {
  return beta * lambda * lambda * double(n);
}

inline double raw_beta(double scaled, double lambda, std::size_t n) noexcept {
  return scaled / (lambda * lambda * double(n));
}

/// `steps` and `burn_in` count sweeps; one sweep proposes a move for every
/// vortex in index order.
struct SamplerConfig {
  double beta = 0.0;
  std::size_t steps = 1000;
  double step_size = 0.125;
  std::uint64_t seed = 0;
  std::size_t thin = 1;
  std::size_t burn_in = 0;
  double scaled_beta_min = default_scaled_beta_min;
  /// Adapt step_size toward 50% acceptance during burn-in only.
  bool tune_step_size = false;
};

inline void validate(const SamplerConfig& cfg, const VortexConfiguration& initial) {
  std::string problems;
  if (!(cfg.steps > cfg.burn_in))
    problems += " steps (" + std::to_string(cfg.steps) + ") must exceed burn_in (" +
                std::to_string(cfg.burn_in) + ");";
  if (!(cfg.step_size > 0.0) || cfg.step_size > initial.domain().side())
    problems += " step_size must lie in (0, side];";
  if (cfg.thin < 1) problems += " thin must be >= 1;";
  if (!std::isfinite(cfg.beta)) problems += " beta must be finite;";
  if (!problems.empty()) throw InvalidArgument("invalid sampler configuration:" + problems);
  const double sb = scaled_beta(cfg.beta, initial.lambda(), initial.size());
  if (sb < cfg.scaled_beta_min)
    throw AdmissibilityError("scaled beta " + std::to_string(sb) + " is below the admissible minimum " +
                             std::to_string(cfg.scaled_beta_min));
}

/// Metropolis acceptance probability min(1, exp(-beta dH)) for moving vortex
/// k to `to`. Zero for out-of-domain or singular targets. The proposal is
/// symmetric, so this alone fixes the transition kernel.
inline double move_acceptance_probability(const VortexConfiguration& config, std::size_t k, Point to,
                                          double beta) {
  if (!config.domain().contains(to)) return 0.0;
  if (beta == 0.0) return move_is_singular(config, k, to) ? 0.0 : 1.0;
  const auto dh = move_energy_change(config, k, to);
  if (!dh) return 0.0;
  const double log_p = -beta * *dh;
  return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

struct ChainStats {
  double acceptance_rate = 0.0;
  double final_step_size = 0.0;
  std::size_t recorded = 0;
};

/// Runs the chain and hands every recorded state to `visit(config, index)`.
/// Deterministic for a given (initial, cfg).
template <class Visitor>
ChainStats run_metropolis(const VortexConfiguration& initial, const SamplerConfig& cfg,
                          Visitor&& visit) {
  validate(cfg, initial);
  (void)full_energy(initial); // throws on a singular start

  VortexConfiguration state = initial;
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = state.size();
  double step = cfg.step_size;
  const double side = state.domain().side();

  std::size_t proposed = 0;
  std::size_t accepted = 0;
  std::size_t window_proposed = 0;
  std::size_t window_accepted = 0;
  ChainStats stats;

  for (std::size_t sweep = 0; sweep < cfg.steps; ++sweep) {
    const bool measuring = sweep >= cfg.burn_in;
    for (std::size_t k = 0; k < n; ++k) {
      const Point from = state.position(k);
      const Point to{from.x + step * (2.0 * uniform01(rng) - 1.0),
                     from.y + step * (2.0 * uniform01(rng) - 1.0)};
      const double u = uniform01(rng);
      const bool accept = u < move_acceptance_probability(state, k, to, cfg.beta);
      if (accept) state.set_position(k, to);
      if (measuring) {
        ++proposed;
        accepted += accept;
      } else {
        ++window_proposed;
        window_accepted += accept;
      }
    }
    if (!measuring && cfg.tune_step_size && (sweep + 1) % 20 == 0) {
      const double rate = double(window_accepted) / double(window_proposed);
      step = std::clamp(rate > 0.5 ? step * 1.1 : step / 1.1, 1e-6 * side, side);
      window_proposed = window_accepted = 0;
    }
    if (measuring && (sweep - cfg.burn_in) % cfg.thin == 0) {
      visit(static_cast<const VortexConfiguration&>(state), stats.recorded);
      ++stats.recorded;
    }
  }
  stats.acceptance_rate = proposed ? double(accepted) / double(proposed) : 0.0;
  stats.final_step_size = step;
  return stats;
}

struct Chain {
  std::vector<VortexConfiguration> samples;
  std::vector<double> energies;
  double acceptance_rate = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  SamplerConfig config;
  double final_step_size = 0.0;
};

/// Metropolis sampling of exp(-beta H) on the confined square with
/// single-vortex uniform-box proposals. Out-of-domain proposals are rejected.
inline Chain sample_canonical(const VortexConfiguration& initial, const SamplerConfig& cfg) {
  Chain chain;
  chain.beta = cfg.beta;
  chain.seed = cfg.seed;
  chain.config = cfg;
  const auto stats = run_metropolis(initial, cfg, [&](const VortexConfiguration& c, std::size_t) {
    chain.samples.push_back(c);
    chain.energies.push_back(full_energy(c));
  });
  chain.acceptance_rate = stats.acceptance_rate;
  chain.final_step_size = stats.final_step_size;
  return chain;
}

/// N vortices placed uniformly at random, redrawing any that would sit on top
/// of an earlier one.
inline VortexConfiguration uniform_configuration(Domain domain, std::size_t n, double lambda,
                                                 std::uint64_t seed) {
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64(state));
  std::vector<Point> pos;
  pos.reserve(n);
  const double min_r2 = std::pow(singular_distance_fraction * domain.side(), 2);
  while (pos.size() < n) {
    const Point p{domain.side() * uniform01(rng), domain.side() * uniform01(rng)};
    const bool clash = std::any_of(pos.begin(), pos.end(),
                                   [&](Point q) { return distance_squared(p, q) < min_r2; });
    if (!clash) pos.push_back(p);
  }
  return VortexConfiguration(domain, std::move(pos), lambda);
}

struct OccupationHistogram {
  std::vector<double> mean_occupations;
  std::size_t samples = 0;
  /// Macrostate frequency table; left empty when the state space is large.
  std::map<std::vector<int>, std::size_t> frequencies;
};

inline OccupationHistogram occupation_histogram(const Chain& chain, const CoarseGrid& grid,
                                                std::size_t max_table_states = 100000) {
  if (chain.samples.empty()) throw InvalidArgument("occupation_histogram needs a non-empty chain");
  const std::size_t m = grid.box_count();
  const std::size_t n = chain.samples.front().size();
  const bool table = log_binomial(n + m - 1, m - 1) <= std::log(double(max_table_states));

  OccupationHistogram out;
  std::vector<CompensatedSum> sums(m);
  for (const auto& c : chain.samples) {
    const auto s = assign_boxes(c, grid);
    for (std::size_t i = 0; i < m; ++i) sums[i] += double(s[i]);
    if (table) {
      const auto occ = s.occupations();
      ++out.frequencies[std::vector<int>(occ.begin(), occ.end())];
    }
  }
  out.samples = chain.samples.size();
  out.mean_occupations.reserve(m);
  for (const auto& s : sums) out.mean_occupations.push_back(s.value() / double(out.samples));
  return out;
}

/// Root-mean-square distance of the vortices from their centroid.
inline double rms_radius(const VortexConfiguration& config) {
  const auto pos = config.positions();
  CompensatedSum sx, sy;
  for (Point p : pos) {
    sx += p.x;
    sy += p.y;
  }
  const Point centroid{sx.value() / double(pos.size()), sy.value() / double(pos.size())};
  CompensatedSum r2;
  for (Point p : pos) r2 += distance_squared(p, centroid);
  return std::sqrt(r2.value() / double(pos.size()));
}

inline std::vector<double> rms_radius_series(const Chain& chain) {
  std::vector<double> out;
  out.reserve(chain.samples.size());
  for (const auto& c : chain.samples) out.push_back(rms_radius(c));
  return out;
}

/// Mean over samples of rms_radius.
inline double clustering_radius(const Chain& chain) {
  if (chain.samples.empty()) throw InvalidArgument("clustering_radius needs a non-empty chain");
  CompensatedSum s;
  for (const auto& c : chain.samples) s += rms_radius(c);
  return s.value() / double(chain.samples.size());
}

} // namespace pvstat

#endif // PVSTAT_SAMPLER_HPP
