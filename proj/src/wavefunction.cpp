#include "gpe_optctl/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

WaveFunction::WaveFunction(GridPtr grid, WaveRole role)
    : grid_(std::move(grid)), amplitudes_(grid_->size(), cplx{0.0, 0.0}), role_(role) {}

WaveFunction::WaveFunction(GridPtr grid, std::vector<cplx> amplitudes, WaveRole role)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)), role_(role) {
  if (amplitudes_.size() != grid_->size()) {
    throw GridMismatch("amplitude array length does not match grid size");
  }
}

double WaveFunction::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum * grid_->dx();
}

void WaveFunction::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError("cannot normalize a zero or non-finite wavefunction");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : amplitudes_) a *= scale;
}

bool WaveFunction::is_finite() const {
  return std::all_of(amplitudes_.begin(), amplitudes_.end(),
                     [](const cplx& a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); });
}

std::vector<double> WaveFunction::density() const {
  std::vector<double> out(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), out.begin(), [](const cplx& a) { return std::norm(a); });
  return out;
}

void WaveFunction::check_normalized(double tol) const {
  if (!is_finite()) throw NumericalError("wavefunction contains non-finite amplitudes");
  const double n2 = norm_squared();
  if (std::abs(std::sqrt(n2) - 1.0) > tol) {
    std::ostringstream msg;
    msg << "wavefunction norm " << std::sqrt(n2) << " deviates from 1 by more than " << tol;
    throw NumericalError(msg.str());
  }
}

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  if (&a != &b && !(a == b)) throw GridMismatch("wavefunctions live on different grids");
}

cplx inner_product(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a.grid(), b.grid());
  cplx sum{0.0, 0.0};
  const auto aa = a.amplitudes();
  const auto bb = b.amplitudes();
  for (std::size_t j = 0; j < aa.size(); ++j) sum += std::conj(aa[j]) * bb[j];
  return sum * a.grid().dx();
}

double fidelity_overlap(const WaveFunction& psi, const WaveFunction& psi_d) {
  return std::norm(inner_product(psi_d, psi));
}

ControlField::ControlField(TimeGrid t, std::vector<double> v, bool fixed)
    : time(t), values(std::move(v)), fixed_endpoints(fixed) {
  if (values.size() != time.n_nodes()) {
    throw ConfigError("control field needs n_steps + 1 values");
  }
}

ControlField::ControlField(TimeGrid t, double constant, bool fixed)
    : time(t), values(t.n_nodes(), constant), fixed_endpoints(fixed) {}

bool ControlField::is_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gpe_optctl
