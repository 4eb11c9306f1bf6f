#include "drn/sim/convolve.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace drn::sim {

namespace {

// The FFTW planner is not thread-safe.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

Convolver::Convolver(std::span<const double> signal, int max_filter_length)
    : signal_length_(static_cast<int>(signal.size())) {
  if (signal.empty() || max_filter_length < 1) {
    throw std::invalid_argument("Convolver: empty signal or filter");
  }
  fft_size_ = NextPow2(signal_length_ + max_filter_length - 1);
  const int bins = fft_size_ / 2 + 1;
  real_ = fftw_alloc_real(fft_size_);
  complex_ = fftw_alloc_complex(bins);
  auto* cx = static_cast<fftw_complex*>(complex_);
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    forward_ = fftw_plan_dft_r2c_1d(fft_size_, real_, cx, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(fft_size_, cx, real_, FFTW_ESTIMATE);
  }
  std::fill(real_, real_ + fft_size_, 0.0);
  std::copy(signal.begin(), signal.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  spectrum_.resize(bins);
  for (int k = 0; k < bins; ++k) spectrum_[k] = {cx[k][0], cx[k][1]};
}

Convolver::~Convolver() {
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  }
  fftw_free(real_);
  fftw_free(complex_);
}

std::vector<double> Convolver::Apply(std::span<const double> filter,
                                     int out_length) {
  if (static_cast<int>(filter.size()) + signal_length_ - 1 > fft_size_) {
    throw std::invalid_argument("Convolver: filter longer than planned");
  }
  std::vector<double> out(out_length, 0.0);
  if (filter.empty()) return out;
  std::fill(real_, real_ + fft_size_, 0.0);
  std::copy(filter.begin(), filter.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  auto* cx = static_cast<fftw_complex*>(complex_);
  for (size_t k = 0; k < spectrum_.size(); ++k) {
    const std::complex<double> p = spectrum_[k] * std::complex<double>(cx[k][0], cx[k][1]);
    cx[k][0] = p.real();
    cx[k][1] = p.imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_));
  const double scale = 1.0 / fft_size_;
  const int n = std::min(out_length, fft_size_);
  for (int i = 0; i < n; ++i) out[i] = real_[i] * scale;
  return out;
}

std::vector<double> ConvolveDirect(std::span<const double> signal,
                                   std::span<const double> filter,
                                   int out_length) {
  std::vector<double> out(out_length, 0.0);
  const int ns = static_cast<int>(signal.size());
  for (size_t k = 0; k < filter.size(); ++k) {
    const double h = filter[k];
    if (h == 0.0) continue;
    const int shift = static_cast<int>(k);
    const int end = std::min(out_length, ns + shift);
    for (int n = shift; n < end; ++n) out[n] += h * signal[n - shift];
  }
  return out;
}

}  // namespace drn::sim
