#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gpe_optctl {

/// Uniform periodic grid on [x_min, x_max). Lengths in micrometres.
///
/// The grid point x_max is identified with x_min, so dx = (x_max - x_min) / n_points.
/// Wavenumbers follow the FFT ordering 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2*pi/L).
class SpatialGrid {
 public:
  SpatialGrid(double x_min, double x_max, std::size_t n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double length() const { return x_max_ - x_min_; }
  std::size_t size() const { return n_points_; }
  double dx() const { return dx_; }
  double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }

  std::span<const double> positions() const { return positions_; }
  std::span<const double> wavenumbers() const { return wavenumbers_; }

  /// Index of the mirror point -x_j, or npos when the box is not centred at zero.
  std::size_t mirror_index(std::size_t j) const;
  bool is_centered() const { return centered_; }

  bool operator==(const SpatialGrid& other) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double dx_;
  bool centered_;
  std::vector<double> positions_;
  std::vector<double> wavenumbers_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

GridPtr make_grid(double x_min, double x_max, std::size_t n_points);

/// Uniform time grid on [0, t_final] with n_steps intervals (n_steps + 1 nodes). Time in ms.
class TimeGrid {
 public:
  TimeGrid(double t_final, std::size_t n_steps);

  double t_final() const { return t_final_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t n_nodes() const { return n_steps_ + 1; }
  double dt() const { return dt_; }
  double t(std::size_t n) const { return static_cast<double>(n) * dt_; }

  bool operator==(const TimeGrid& other) const = default;

 private:
  double t_final_;
  std::size_t n_steps_;
  double dt_;
};

/// Mass M (hbar = 1, ms, um units) and nonlinearity kappa of the Gross-Pitaevskii equation.
struct PhysicalParams {
  double mass = 0.5;
  double kappa = 0.0;

  void validate() const;
};

}  // namespace gpe_optctl
