#ifndef DRN_DSP_STFT_H_
#define DRN_DSP_STFT_H_

#include <vector>

#include "drn/dsp/fft.h"
#include "drn/dsp/waveform.h"
#include "drn/dsp/window.h"

namespace drn::dsp {

struct StftConfig {
  int fft_size = 512;
  int hop = 256;
  WindowKind window = WindowKind::kSqrtHann;

  int bins() const { return fft_size / 2 + 1; }
  // Frames needed to cover `num_samples` completely; frame t covers
  // [t*hop - (fft_size - hop), t*hop + hop).
  int NumFrames(int num_samples) const;
  // Throws unless the window pair is COLA at this hop and fft_size is even.
  void Validate() const;
};

// Complex coefficients [C][T][F].
struct Spectrogram {
  int channels = 0;
  int frames = 0;
  int bins = 0;
  StftConfig config;
  std::vector<Complex> data;

  Complex& at(int c, int t, int f) { return data[Index(c, t, f)]; }
  const Complex& at(int c, int t, int f) const { return data[Index(c, t, f)]; }

 private:
  size_t Index(int c, int t, int f) const {
    return (static_cast<size_t>(c) * frames + t) * bins + f;
  }
};

Spectrogram Stft(const Waveform& x, const StftConfig& config);

// Inverse with the matching synthesis window; returns `num_samples` samples.
Waveform Istft(const Spectrogram& spec, int num_samples,
               double sample_rate = kDefaultSampleRate);

}  // namespace drn::dsp

#endif  // DRN_DSP_STFT_H_
