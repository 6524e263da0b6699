#ifndef PVSTAT_GEOMETRY_HPP
#define PVSTAT_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvstat/errors.hpp"

namespace pvstat {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(Point a, Point b) noexcept = default;
};

inline double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

inline double distance_squared(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// The axis-aligned square [0, side]^2.
class Domain {
public:
  explicit Domain(double side = 1.0) : side_(side) {
    if (!(side > 0.0) || !std::isfinite(side))
      throw InvalidArgument("domain side must be positive and finite, got " + std::to_string(side));
  }

  double side() const noexcept { return side_; }
  double area() const noexcept { return side_ * side_; }

  bool contains(Point p) const noexcept {
    return p.x >= 0.0 && p.x <= side_ && p.y >= 0.0 && p.y <= side_;
  }

  friend bool operator==(const Domain&, const Domain&) = default;

private:
  double side_;
};

/// Partition of a Domain into nx * ny equal rectangular boxes, numbered
/// row-major (index = iy * nx + ix). Square boxes when nx == ny; strips are
/// allowed so that any box count M can be realised with equal areas.
class CoarseGrid {
public:
  CoarseGrid(Domain domain, std::size_t boxes_per_side)
      : CoarseGrid(domain, boxes_per_side, boxes_per_side) {}

  CoarseGrid(Domain domain, std::size_t nx, std::size_t ny) : domain_(domain), nx_(nx), ny_(ny) {
    if (nx == 0 || ny == 0) throw InvalidArgument("coarse grid needs at least one box per axis");
    hx_ = domain.side() / double(nx);
    hy_ = domain.side() / double(ny);
    centers_.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
      for (std::size_t ix = 0; ix < nx; ++ix)
        centers_.push_back({(double(ix) + 0.5) * hx_, (double(iy) + 0.5) * hy_});
  }

  /// Grid with exactly `boxes` boxes, as close to square as the factorisation
  /// of `boxes` allows (nx >= ny).
  static CoarseGrid with_box_count(Domain domain, std::size_t boxes) {
    if (boxes == 0) throw InvalidArgument("box count must be positive");
    std::size_t ny = static_cast<std::size_t>(std::sqrt(double(boxes)));
    while (ny * ny > boxes) --ny;
    while (boxes % ny != 0) --ny;
    return CoarseGrid(domain, boxes / ny, ny);
  }

  const Domain& domain() const noexcept { return domain_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t box_count() const noexcept { return nx_ * ny_; }
  double box_width() const noexcept { return hx_; }
  double box_height() const noexcept { return hy_; }
  double box_area() const noexcept { return hx_ * hy_; }
  /// Side of a square with the box's area (the box side itself when nx == ny).
  double h() const noexcept { return std::sqrt(box_area()); }

  const std::vector<Point>& centers() const noexcept { return centers_; }
  Point center(std::size_t box) const { return centers_.at(box); }

  /// Box containing p. Points on a shared edge go to the lower index.
  std::size_t box_of(Point p) const {
    if (!domain_.contains(p))
      throw DomainViolation("position (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            ") lies outside the domain");
    return axis_cell(p.y, ny_) * nx_ + axis_cell(p.x, nx_);
  }

private:
  std::size_t axis_cell(double coord, std::size_t cells) const noexcept {
    const double q = coord * double(cells) / domain_.side();
    double k = std::floor(q);
    if (k == q && k > 0.0) k -= 1.0;
    if (k < 0.0) k = 0.0;
    if (k > double(cells - 1)) k = double(cells - 1);
    return static_cast<std::size_t>(k);
  }

  Domain domain_;
  std::size_t nx_;
  std::size_t ny_;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<Point> centers_;
};

/// Microstate: N identical vortices of strength lambda inside the domain.
class VortexConfiguration {
public:
  VortexConfiguration(Domain domain, std::vector<Point> positions, double lambda)
      : domain_(domain), positions_(std::move(positions)), lambda_(lambda) {
    if (positions_.empty()) throw InvalidArgument("a configuration needs at least one vortex");
    if (lambda_ == 0.0 || !std::isfinite(lambda_))
      throw InvalidArgument("vortex strength must be finite and non-zero");
    for (std::size_t k = 0; k < positions_.size(); ++k)
      if (!domain_.contains(positions_[k]))
        throw DomainViolation("vortex " + std::to_string(k) + " at (" +
                              std::to_string(positions_[k].x) + ", " +
                              std::to_string(positions_[k].y) + ") lies outside the domain");
  }

  const Domain& domain() const noexcept { return domain_; }
  std::span<const Point> positions() const noexcept { return positions_; }
  Point position(std::size_t k) const { return positions_.at(k); }
  std::size_t size() const noexcept { return positions_.size(); }
  double lambda() const noexcept { return lambda_; }

  /// Move one vortex. The caller guarantees p lies in the domain.
  void set_position(std::size_t k, Point p) { positions_.at(k) = p; }

  friend bool operator==(const VortexConfiguration&, const VortexConfiguration&) = default;

private:
  Domain domain_;
  std::vector<Point> positions_;
  double lambda_;
};

/// Occupation numbers (n_1, ..., n_M) with sum N.
class Macrostate {
public:
  Macrostate() = default;

  explicit Macrostate(std::vector<int> occupations) : occupations_(std::move(occupations)) {
    for (int n : occupations_)
      if (n < 0) throw InvalidArgument("occupation numbers must be non-negative");
    total_ = std::accumulate(occupations_.begin(), occupations_.end(), 0);
  }

  std::span<const int> occupations() const noexcept { return occupations_; }
  int operator[](std::size_t i) const { return occupations_.at(i); }
  std::size_t box_count() const noexcept { return occupations_.size(); }
  int total() const noexcept { return total_; }

  friend bool operator==(const Macrostate&, const Macrostate&) = default;

private:
  std::vector<int> occupations_;
  int total_ = 0;
};

namespace detail {
inline void require_same_domain(const VortexConfiguration& config, const CoarseGrid& grid) {
  if (!(config.domain() == grid.domain()))
    throw InvalidArgument("configuration and grid live on different domains");
}
} // namespace detail

inline std::vector<std::size_t> box_indices(const VortexConfiguration& config,
                                            const CoarseGrid& grid) {
  detail::require_same_domain(config, grid);
  std::vector<std::size_t> out;
  out.reserve(config.size());
  for (Point p : config.positions()) out.push_back(grid.box_of(p));
  return out;
}

/// Coarse-graining map: count vortices per box.
inline Macrostate assign_boxes(const VortexConfiguration& config, const CoarseGrid& grid) {
  std::vector<int> n(grid.box_count(), 0);
  for (std::size_t b : box_indices(config, grid)) ++n[b];
  return Macrostate(std::move(n));
}

/// x_j - (center of the box holding vortex j), in vortex order.
inline std::vector<Point> box_relative_offsets(const VortexConfiguration& config,
                                               const CoarseGrid& grid) {
  const auto boxes = box_indices(config, grid);
  std::vector<Point> out;
  out.reserve(boxes.size());
  for (std::size_t k = 0; k < boxes.size(); ++k)
    out.push_back(config.position(k) - grid.center(boxes[k]));
  return out;
}

} // namespace pvstat

#endif // PVSTAT_GEOMETRY_HPP
