#include "gpe_optctl/spectrum.hpp"

#include <cmath>

#include "gpe_optctl/fft.hpp"

namespace gpe_optctl {

PowerSpectrum power_spectrum(const ControlField& field) {
  const std::size_t n = field.time.n_steps();
  const double dt = field.time.dt();
  std::vector<cplx> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = field.values[i];
  Fft fft(n);
  fft.forward(data);

  PowerSpectrum out;
  out.d_nu = 1.0 / (static_cast<double>(n) * dt);
  const std::size_t half = n / 2;
  out.frequency.resize(half + 1);
  out.power.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const double p = std::norm(data[k] * dt);
    const bool unpaired = (k == 0) || (n % 2 == 0 && k == half);
    out.frequency[k] = static_cast<double>(k) * out.d_nu;
    out.power[k] = unpaired ? p : 2.0 * p;
  }
  return out;
}

double spectral_bandwidth(const PowerSpectrum& spectrum) {
  double total = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < spectrum.power.size(); ++k) {
    total += spectrum.power[k];
    mean += spectrum.power[k] * spectrum.frequency[k];
  }
  if (!(total > 0.0)) return 0.0;
  mean /= total;
  double var = 0.0;
  for (std::size_t k = 0; k < spectrum.power.size(); ++k) {
    const double d = spectrum.frequency[k] - mean;
    var += spectrum.power[k] * d * d;
  }
  return std::sqrt(var / total);
}

}  // namespace gpe_optctl
