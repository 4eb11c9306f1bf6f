#ifndef DRN_METRICS_PCM_LOSS_H_
#define DRN_METRICS_PCM_LOSS_H_

#include <span>

#include "drn/ad/tensor.h"
#include "drn/dsp/stft.h"
#include "drn/dsp/waveform.h"

namespace drn::metrics {

// 32 ms Hann analysis with a 16 ms hop at 16 kHz.
struct PcmConfig {
  int fft_size = 512;
  int hop = 256;
};

// Phase-constrained magnitude loss
//   L = 1/2 [l(est, ref) + l(mix - est, mix - ref)],
//   l(a, b) = mean_{t,f} ||Re A| - |Re B|| + ||Im A| - |Im B||,
// with A, B the STFTs of a, b. `est` is a [1 x N] (or [N]) graph tensor.
template <typename T>
ad::Tensor<T> PcmLoss(const ad::Tensor<T>& est, std::span<const double> ref,
                      std::span<const double> mix,
                      const PcmConfig& config = {});

// Plain evaluation on mono waveforms of equal length.
double PcmLossValue(const dsp::Waveform& est, const dsp::Waveform& ref,
                    const dsp::Waveform& mix, const PcmConfig& config = {});

}  // namespace drn::metrics

#endif  // DRN_METRICS_PCM_LOSS_H_
