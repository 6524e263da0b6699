#ifndef PVSTAT_HAMILTONIAN_HPP
#define PVSTAT_HAMILTONIAN_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pvstat/errors.hpp"
#include "pvstat/geometry.hpp"
#include "pvstat/numeric.hpp"

namespace pvstat {

/// Pair separations below this fraction of the domain side are singular.
inline constexpr double singular_distance_fraction = 1e-12;

/// H split against a coarse grid. `remainder` is exact (full - coarse);
/// `intra_box + inter_box_correction` is its first-order expansion in the
/// in-box offsets.
struct EnergyBreakdown {
  double full = 0.0;
  double coarse = 0.0;
  double remainder = 0.0;
  double intra_box = 0.0;
  double inter_box_correction = 0.0;

  double first_order_remainder() const noexcept { return intra_box + inter_box_correction; }
};

namespace detail {
inline double checked_log_distance(Point a, Point b, double min_distance, std::size_t i,
                                   std::size_t j) {
  const double r = distance(a, b);
  if (r < min_distance)
    throw SingularConfiguration("vortices " + std::to_string(i) + " and " + std::to_string(j) +
                                " coincide (distance " + std::to_string(r) + ")");
  return std::log(r);
}
} // namespace detail

/// H = -1/2 sum_{i != j} lambda^2 log|x_i - x_j|, i.e. -lambda^2 times the sum
/// over unordered pairs. A single vortex has zero energy.
inline double full_energy(const VortexConfiguration& config) {
  const auto pos = config.positions();
  const double min_r = singular_distance_fraction * config.domain().side();
  CompensatedSum sum;
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      sum += detail::checked_log_distance(pos[i], pos[j], min_r, i, j);
  const double lam2 = config.lambda() * config.lambda();
  return -lam2 * sum.value();
}

/// Energy change when vortex k moves to `to`; empty if the move would bring
/// two vortices within the singular distance.
inline std::optional<double> move_energy_change(const VortexConfiguration& config, std::size_t k,
                                                Point to) {
  const auto pos = config.positions();
  const double min_r = singular_distance_fraction * config.domain().side();
  const double min_r2 = min_r * min_r;
  const Point from = pos[k];
  CompensatedSum delta;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (j == k) continue;
    const double r2_new = distance_squared(to, pos[j]);
    if (r2_new < min_r2) return std::nullopt;
    delta += 0.5 * (std::log(r2_new) - std::log(distance_squared(from, pos[j])));
  }
  const double lam2 = config.lambda() * config.lambda();
  return -lam2 * delta.value();
}

/// Whether moving vortex k to `to` would create a singular pair. O(N), no logs.
inline bool move_is_singular(const VortexConfiguration& config, std::size_t k, Point to) {
  const auto pos = config.positions();
  const double min_r = singular_distance_fraction * config.domain().side();
  const double min_r2 = min_r * min_r;
  for (std::size_t j = 0; j < pos.size(); ++j)
    if (j != k && distance_squared(to, pos[j]) < min_r2) return true;
  return false;
}

/// H0 = -1/2 sum_{i != j} n_i n_j lambda^2 log|x_i^0 - x_j^0| over distinct
/// boxes only.
inline double coarse_energy(const Macrostate& s, const CoarseGrid& grid, double lambda) {
  if (s.box_count() != grid.box_count())
    throw InvalidArgument("macrostate has " + std::to_string(s.box_count()) +
                          " boxes, grid has " + std::to_string(grid.box_count()));
  const auto n = s.occupations();
  const auto& c = grid.centers();
  CompensatedSum sum;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] == 0) continue;
    for (std::size_t j = i + 1; j < n.size(); ++j) {
      if (n[j] == 0) continue;
      sum += double(n[i]) * double(n[j]) * std::log(distance(c[i], c[j]));
    }
  }
  return -lambda * lambda * sum.value();
}

inline EnergyBreakdown remainder_energy(const VortexConfiguration& config, const CoarseGrid& grid) {
  const auto boxes = box_indices(config, grid);
  const auto offsets = box_relative_offsets(config, grid);
  const auto& c = grid.centers();
  const double lam2 = config.lambda() * config.lambda();
  const double min_r = singular_distance_fraction * config.domain().side();

  EnergyBreakdown out;
  out.full = full_energy(config);
  out.coarse = coarse_energy(assign_boxes(config, grid), grid, config.lambda());
  out.remainder = out.full - out.coarse;

  CompensatedSum intra;
  CompensatedSum inter;
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    for (std::size_t k = j + 1; k < offsets.size(); ++k) {
      if (boxes[j] == boxes[k]) {
        intra += detail::checked_log_distance(offsets[j], offsets[k], min_r, j, k);
      } else {
        // |x'_j - x'_k| / |x_i^0 - x_i'^0|; the double sum over ordered box
        // pairs with the -1/2 prefactor counts each vortex pair once.
        inter += distance(offsets[j], offsets[k]) / distance(c[boxes[j]], c[boxes[k]]);
      }
    }
  }
  out.intra_box = -lam2 * intra.value();
  out.inter_box_correction = -lam2 * inter.value();
  return out;
}

/// Mean-value constant L(n) = 1/2 log(h^2 / n): the typical log-separation of
/// n vortices sharing a box of area h^2. Defined for real n > 0.
inline double mean_value_constant(double n, double h) {
  if (!(n > 0.0) || !(h > 0.0)) throw InvalidArgument("mean_value_constant needs n > 0 and h > 0");
  return 0.5 * std::log(h * h / n);
}

/// dL/dn = -1/(2n).
inline double mean_value_constant_derivative(double n) {
  if (!(n > 0.0)) throw InvalidArgument("mean_value_constant_derivative needs n > 0");
  return -0.5 / n;
}

/// sum_i lambda^2 n_i (n_i - 1) L(n_i) / 2: the mean-value replacement of the
/// intra-box double sum sum_j sum_{k != j} lambda^2 log|x'_j - x'_k|. The
/// corresponding energy carries a further -1/2, which gives the
/// -1/4 sum_i lambda^2 n_i (n_i - 1) L(n_i) term of the variational free
/// energy.
inline double intra_box_self_energy(const Macrostate& s, const CoarseGrid& grid, double lambda) {
  if (s.box_count() != grid.box_count())
    throw InvalidArgument("macrostate and grid disagree on the box count");
  const double h = grid.h();
  CompensatedSum sum;
  for (int n : s.occupations())
    if (n > 1) sum += double(n) * double(n - 1) * 0.5 * mean_value_constant(double(n), h);
  return lambda * lambda * sum.value();
}

} // namespace pvstat

#endif // PVSTAT_HAMILTONIAN_HPP
