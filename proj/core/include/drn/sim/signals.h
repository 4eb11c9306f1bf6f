#ifndef DRN_SIM_SIGNALS_H_
#define DRN_SIM_SIGNALS_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "drn/util/rng.h"

namespace drn::sim {

double Rms(std::span<const double> x);

// Speech-like signal: harmonic voiced syllables with moving formants,
// unvoiced noise bursts and pauses under a 3-8 Hz syllabic envelope.
// Normalized to unit RMS.
std::vector<double> SyntheticSpeech(Rng& rng, int samples,
                                    double sample_rate = 16000.0);

// Stationary colored noise (white noise through a random one-pole tilt and
// a random resonance), unit RMS.
std::vector<double> ColoredNoise(Rng& rng, int samples,
                                 double sample_rate = 16000.0);

// Source of dry mono signals for scene rendering.
class DrySignalProvider {
 public:
  virtual ~DrySignalProvider() = default;
  virtual std::vector<double> Speech(Rng& rng, int samples) = 0;
  virtual std::vector<double> Noise(Rng& rng, int samples) = 0;
};

class SyntheticProvider : public DrySignalProvider {
 public:
  explicit SyntheticProvider(double sample_rate = 16000.0)
      : sample_rate_(sample_rate) {}
  std::vector<double> Speech(Rng& rng, int samples) override;
  std::vector<double> Noise(Rng& rng, int samples) override;

 private:
  double sample_rate_;
};

// Draws random excerpts (looped when short) from mono or multichannel WAV
// files found under a speech directory and a noise directory. Channel 0 is
// used. Falls back to synthetic signals for an empty directory argument.
class WavCorpusProvider : public DrySignalProvider {
 public:
  WavCorpusProvider(const std::string& speech_dir,
                    const std::string& noise_dir,
                    double sample_rate = 16000.0);
  std::vector<double> Speech(Rng& rng, int samples) override;
  std::vector<double> Noise(Rng& rng, int samples) override;

  size_t speech_files() const { return speech_.size(); }
  size_t noise_files() const { return noise_.size(); }

 private:
  std::vector<double> Draw(const std::vector<std::string>& files, Rng& rng,
                           int samples);

  std::vector<std::string> speech_;
  std::vector<std::string> noise_;
  SyntheticProvider fallback_;
  double sample_rate_;
};

std::unique_ptr<DrySignalProvider> MakeProvider(const std::string& speech_dir,
                                                const std::string& noise_dir,
                                                double sample_rate);

}  // namespace drn::sim

#endif  // DRN_SIM_SIGNALS_H_
