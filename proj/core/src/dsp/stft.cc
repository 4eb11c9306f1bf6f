#include "drn/dsp/stft.h"

#include <stdexcept>

namespace drn::dsp {

int StftConfig::NumFrames(int num_samples) const {
  const int overlap_frames = (fft_size + hop - 1) / hop;
  return (num_samples - 1) / hop + overlap_frames;
}

void StftConfig::Validate() const {
  if (fft_size < 2 || fft_size % 2 != 0) {
    throw std::invalid_argument("STFT size must be even");
  }
  if (hop < 1 || hop > fft_size) {
    throw std::invalid_argument("STFT hop must be in [1, fft_size]");
  }
  auto pair = MakeWindowPair(window, fft_size, hop);
  CheckCola(pair.analysis, pair.synthesis, hop);
}

Spectrogram Stft(const Waveform& x, const StftConfig& config) {
  config.Validate();
  if (x.empty()) throw std::invalid_argument("Stft: empty signal");
  const WindowPair windows =
      MakeWindowPair(config.window, config.fft_size, config.hop);
  const RealFft fft(config.fft_size);

  Spectrogram spec;
  spec.channels = x.channels();
  spec.frames = config.NumFrames(x.samples());
  spec.bins = config.bins();
  spec.config = config;
  spec.data.resize(static_cast<size_t>(spec.channels) * spec.frames *
                   spec.bins);

  const int lead = config.fft_size - config.hop;
  std::vector<double> frame(config.fft_size);
  for (int c = 0; c < x.channels(); ++c) {
    auto src = x.channel(c);
    for (int t = 0; t < spec.frames; ++t) {
      const int start = t * config.hop - lead;
      for (int i = 0; i < config.fft_size; ++i) {
        const int n = start + i;
        frame[i] = (n >= 0 && n < x.samples())
                       ? src[n] * windows.analysis[i]
                       : 0.0;
      }
      fft.Forward(frame, {&spec.at(c, t, 0), static_cast<size_t>(spec.bins)});
    }
  }
  return spec;
}

Waveform Istft(const Spectrogram& spec, int num_samples, double sample_rate) {
  const StftConfig& config = spec.config;
  config.Validate();
  const WindowPair windows =
      MakeWindowPair(config.window, config.fft_size, config.hop);
  const RealFft fft(config.fft_size);
  const int lead = config.fft_size - config.hop;

  Waveform out(spec.channels, num_samples, sample_rate);
  std::vector<double> frame(config.fft_size);
  for (int c = 0; c < spec.channels; ++c) {
    auto dst = out.channel(c);
    for (int t = 0; t < spec.frames; ++t) {
      fft.Inverse({&spec.at(c, t, 0), static_cast<size_t>(spec.bins)}, frame);
      const int start = t * config.hop - lead;
      for (int i = 0; i < config.fft_size; ++i) {
        const int n = start + i;
        if (n >= 0 && n < num_samples) {
          dst[n] += frame[i] * windows.synthesis[i];
        }
      }
    }
  }
  return out;
}

}  // namespace drn::dsp
