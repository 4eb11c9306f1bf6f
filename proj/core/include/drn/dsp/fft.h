#ifndef DRN_DSP_FFT_H_
#define DRN_DSP_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace drn::dsp {

using Complex = std::complex<double>;

// In-place complex DFT of arbitrary length: radix-2 for powers of two,
// direct O(n^2) evaluation otherwise. Unnormalized in both directions.
class ComplexFft {
 public:
  explicit ComplexFft(int size);

  int size() const { return size_; }
  void Forward(std::span<Complex> data) const;
  void Inverse(std::span<Complex> data) const;

 private:
  void Transform(std::span<Complex> data, bool inverse) const;

  int size_;
  bool radix2_;
  std::vector<Complex> twiddles_;  // exp(-2 pi i k / n), k < n
  std::vector<int> bit_reverse_;
};

// Real DFT of even length W producing W/2 + 1 bins. Inverse(Forward(x)) == x.
class RealFft {
 public:
  explicit RealFft(int size);

  int size() const { return complex_.size(); }
  int bins() const { return size() / 2 + 1; }

  void Forward(std::span<const double> input, std::span<Complex> bins) const;
  void Inverse(std::span<const Complex> bins, std::span<double> output) const;
  // Adjoint of Forward w.r.t. (Re, Im) of the bins:
  // out[n] = sum_k Re(g_k) cos(2 pi k n / W) - Im(g_k) sin(2 pi k n / W).
  void ForwardAdjoint(std::span<const Complex> grad_bins,
                      std::span<double> grad_input) const;

 private:
  ComplexFft complex_;
  mutable std::vector<Complex> scratch_;
};

// Convenience wrappers. Throw std::invalid_argument for odd or zero W.
std::vector<Complex> Rdft(std::span<const double> frame);
std::vector<double> Irdft(std::span<const Complex> bins, int size);

bool IsPowerOfTwo(int n);
int NextPowerOfTwo(int n);

}  // namespace drn::dsp

#endif  // DRN_DSP_FFT_H_
