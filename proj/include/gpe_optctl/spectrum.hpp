#pragma once

#include <vector>

#include "gpe_optctl/wavefunction.hpp"

namespace gpe_optctl {

/// One-sided power spectrum of a control history.
///
/// The control is treated as periodic on [0, T): the duplicated node at t = T is dropped and
/// the remaining n_steps samples are transformed. With X_k = dt * DFT(values)_k the one-sided
/// power is |X_0|^2, 2|X_k|^2 for 0 < k < n/2 and |X_{n/2}|^2, so that
/// sum(values^2) dt = sum(power) d_nu (Parseval).
struct PowerSpectrum {
  std::vector<double> frequency;  // cycles per ms
  std::vector<double> power;
  double d_nu = 0.0;
};

PowerSpectrum power_spectrum(const ControlField& field);

/// Standard deviation of the frequency distribution power / sum(power).
double spectral_bandwidth(const PowerSpectrum& spectrum);

}  // namespace gpe_optctl
