#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gpe_optctl/grid.hpp"

namespace gpe_optctl {

using cplx = std::complex<double>;

enum class WaveRole { state, costate, desired };

/// Complex field sampled on a SpatialGrid: a condensate state, a co-state, or a target.
class WaveFunction {
 public:
  WaveFunction(GridPtr grid, WaveRole role = WaveRole::state);
  WaveFunction(GridPtr grid, std::vector<cplx> amplitudes, WaveRole role = WaveRole::state);

  const SpatialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  WaveRole role() const { return role_; }
  void set_role(WaveRole role) { role_ = role; }

  std::size_t size() const { return amplitudes_.size(); }
  std::span<const cplx> amplitudes() const { return amplitudes_; }
  std::span<cplx> amplitudes() { return amplitudes_; }
  cplx operator[](std::size_t j) const { return amplitudes_[j]; }
  cplx& operator[](std::size_t j) { return amplitudes_[j]; }

  /// sum |psi_j|^2 dx
  double norm_squared() const;
  void normalize();
  bool is_finite() const;
  std::vector<double> density() const;

  /// Throws NumericalError unless the L2 norm is one within tol and all amplitudes are finite.
  void check_normalized(double tol = 1e-9) const;

 private:
  GridPtr grid_;
  std::vector<cplx> amplitudes_;
  WaveRole role_;
};

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b);

/// <a|b> = sum conj(a_j) b_j dx
cplx inner_product(const WaveFunction& a, const WaveFunction& b);

/// |<psi_d|psi>|^2
double fidelity_overlap(const WaveFunction& psi, const WaveFunction& psi_d);

/// Real time series on the nodes of a TimeGrid, one value per node (endpoints included).
struct ControlField {
  ControlField(TimeGrid time, std::vector<double> values, bool fixed_endpoints = true);
  ControlField(TimeGrid time, double constant, bool fixed_endpoints = true);

  TimeGrid time;
  std::vector<double> values;
  bool fixed_endpoints = true;

  std::size_t size() const { return values.size(); }
  /// Value used by the propagator over step n: average of nodes n and n+1.
  double midpoint(std::size_t n) const { return 0.5 * (values[n] + values[n + 1]); }
  bool is_finite() const;
};

}  // namespace gpe_optctl
