#include "drn/dsp/fft.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace drn::dsp {

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

int NextPowerOfTwo(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

ComplexFft::ComplexFft(int size) : size_(size), radix2_(IsPowerOfTwo(size)) {
  if (size < 1) throw std::invalid_argument("ComplexFft: size must be >= 1");
  twiddles_.resize(size);
  for (int k = 0; k < size; ++k) {
    const double phase = -2.0 * std::numbers::pi * k / size;
    twiddles_[k] = {std::cos(phase), std::sin(phase)};
  }
  if (radix2_) {
    bit_reverse_.resize(size);
    int bits = 0;
    while ((1 << bits) < size) ++bits;
    for (int i = 0; i < size; ++i) {
      int r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
      bit_reverse_[i] = r;
    }
  }
}

void ComplexFft::Forward(std::span<Complex> data) const {
  Transform(data, false);
}

void ComplexFft::Inverse(std::span<Complex> data) const {
  Transform(data, true);
}

void ComplexFft::Transform(std::span<Complex> data, bool inverse) const {
  if (static_cast<int>(data.size()) != size_) {
    throw std::invalid_argument("ComplexFft: buffer size mismatch");
  }
  const int n = size_;
  if (!radix2_) {
    std::vector<Complex> out(n);
    for (int k = 0; k < n; ++k) {
      Complex acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const Complex w = twiddles_[(static_cast<long>(k) * j) % n];
        acc += data[j] * (inverse ? std::conj(w) : w);
      }
      out[k] = acc;
    }
    std::copy(out.begin(), out.end(), data.begin());
    return;
  }
  for (int i = 0; i < n; ++i) {
    const int j = bit_reverse_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len >> 1;
    const int stride = n / len;
    for (int start = 0; start < n; start += len) {
      for (int k = 0; k < half; ++k) {
        Complex w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex a = data[start + k];
        const Complex b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
}

RealFft::RealFft(int size) : complex_(size) {
  if (size < 2 || size % 2 != 0) {
    throw std::invalid_argument("RealFft: size must be even, got " +
                                std::to_string(size));
  }
  scratch_.resize(size);
}

void RealFft::Forward(std::span<const double> input,
                      std::span<Complex> bins) const {
  const int n = size();
  if (static_cast<int>(input.size()) != n ||
      static_cast<int>(bins.size()) != this->bins()) {
    throw std::invalid_argument("RealFft::Forward: size mismatch");
  }
  for (int i = 0; i < n; ++i) scratch_[i] = input[i];
  complex_.Forward(scratch_);
  for (int k = 0; k < this->bins(); ++k) bins[k] = scratch_[k];
}

void RealFft::Inverse(std::span<const Complex> bins,
                      std::span<double> output) const {
  const int n = size();
  if (static_cast<int>(output.size()) != n ||
      static_cast<int>(bins.size()) != this->bins()) {
    throw std::invalid_argument("RealFft::Inverse: size mismatch");
  }
  const int half = n / 2;
  // Hermitian extension; DC and Nyquist imaginary parts are ignored.
  scratch_[0] = bins[0].real();
  scratch_[half] = bins[half].real();
  for (int k = 1; k < half; ++k) {
    scratch_[k] = bins[k];
    scratch_[n - k] = std::conj(bins[k]);
  }
  complex_.Inverse(scratch_);
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) output[i] = scratch_[i].real() * scale;
}

void RealFft::ForwardAdjoint(std::span<const Complex> grad_bins,
                             std::span<double> grad_input) const {
  const int n = size();
  if (static_cast<int>(grad_input.size()) != n ||
      static_cast<int>(grad_bins.size()) != bins()) {
    throw std::invalid_argument("RealFft::ForwardAdjoint: size mismatch");
  }
  // Re X_k = sum x_n cos, Im X_k = -sum x_n sin, so the adjoint is
  // Re(sum_k g_k exp(+2 pi i k n / W)) over the half spectrum.
  for (int k = 0; k < n; ++k) {
    scratch_[k] = k < bins() ? grad_bins[k] : Complex(0.0, 0.0);
  }
  complex_.Inverse(scratch_);
  for (int i = 0; i < n; ++i) grad_input[i] = scratch_[i].real();
}

std::vector<Complex> Rdft(std::span<const double> frame) {
  RealFft fft(static_cast<int>(frame.size()));
  std::vector<Complex> bins(fft.bins());
  fft.Forward(frame, bins);
  return bins;
}

std::vector<double> Irdft(std::span<const Complex> bins, int size) {
  RealFft fft(size);
  std::vector<double> out(size);
  fft.Inverse(bins, out);
  return out;
}

}  // namespace drn::dsp
