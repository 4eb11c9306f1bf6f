#ifndef DRN_SIM_CONVOLVE_H_
#define DRN_SIM_CONVOLVE_H_

#include <complex>
#include <span>
#include <vector>

namespace drn::sim {

// Linear convolution of one signal with many filters. The signal spectrum
// is computed once; each Apply costs one forward and one inverse real FFT.
class Convolver {
 public:
  // `max_filter_length` bounds the filters passed to Apply.
  Convolver(std::span<const double> signal, int max_filter_length);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  // First `out_length` samples of signal * filter.
  std::vector<double> Apply(std::span<const double> filter, int out_length);

 private:
  int fft_size_ = 0;
  int signal_length_ = 0;
  std::vector<std::complex<double>> spectrum_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

// Direct-form causal convolution truncated to `out_length`, skipping zero
// filter taps; efficient for short or sparse filters.
std::vector<double> ConvolveDirect(std::span<const double> signal,
                                   std::span<const double> filter,
                                   int out_length);

}  // namespace drn::sim

#endif  // DRN_SIM_CONVOLVE_H_
