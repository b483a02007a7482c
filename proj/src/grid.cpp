#include "gpe_optctl/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

SpatialGrid::SpatialGrid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_points_(n_points) {
  if (n_points < 8) {
    throw ConfigError("spatial grid needs at least 8 points, got " + std::to_string(n_points));
  }
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw ConfigError("spatial grid requires finite x_min < x_max");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points);
  centered_ = std::abs(x_min + x_max) <= 1e-12 * (x_max - x_min);

  positions_.resize(n_points);
  wavenumbers_.resize(n_points);
  const double dk = 2.0 * std::numbers::pi / length();
  const auto n = static_cast<long>(n_points);
  for (long j = 0; j < n; ++j) {
    positions_[j] = x(static_cast<std::size_t>(j));
    const long m = (j < (n + 1) / 2) ? j : j - n;
    wavenumbers_[j] = dk * static_cast<double>(m);
  }
}

std::size_t SpatialGrid::mirror_index(std::size_t j) const {
  if (!centered_) return npos;
  return (n_points_ - j) % n_points_;
}

bool SpatialGrid::operator==(const SpatialGrid& other) const {
  return x_min_ == other.x_min_ && x_max_ == other.x_max_ && n_points_ == other.n_points_;
}

GridPtr make_grid(double x_min, double x_max, std::size_t n_points) {
  return std::make_shared<const SpatialGrid>(x_min, x_max, n_points);
}

TimeGrid::TimeGrid(double t_final, std::size_t n_steps) : t_final_(t_final), n_steps_(n_steps) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw ConfigError("time grid requires t_final > 0");
  }
  if (n_steps == 0) throw ConfigError("time grid requires n_steps > 0");
  dt_ = t_final / static_cast<double>(n_steps);
}

void PhysicalParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("mass must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be non-negative");
}

}  // namespace gpe_optctl
