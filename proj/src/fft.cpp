#include "gpe_optctl/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gpe_optctl {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("FFT length must be positive");
  std::vector<std::complex<double>> scratch(n);
  // ESTIMATE keeps plan selection independent of timing, so results are reproducible bit for bit.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  forward_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, flags);
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) {
    release();
    throw std::runtime_error("FFTW plan creation failed");
  }
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : n_(other.n_),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    backward_plan_ = std::exchange(other.backward_plan_, nullptr);
  }
  return *this;
}

void Fft::release() {
  if (forward_plan_ == nullptr && backward_plan_ == nullptr) return;
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  forward_plan_ = nullptr;
  backward_plan_ = nullptr;
}

void Fft::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::backward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FFT length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), as_fftw(data.data()), as_fftw(data.data()));
}

}  // namespace gpe_optctl
