#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace gpe_optctl {

/// In-place complex DFT of fixed length backed by FFTW plans.
///
/// Each instance owns its plans; instances are not shared between threads. The inverse
/// transform is unnormalized, like FFTW's backward transform.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&& other) noexcept;

  std::size_t size() const { return n_; }
  void forward(std::span<std::complex<double>> data) const;
  void backward(std::span<std::complex<double>> data) const;

 private:
  void release();

  std::size_t n_ = 0;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

}  // namespace gpe_optctl
