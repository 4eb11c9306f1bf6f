#include "drn/sim/signals.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "drn/dsp/wav_io.h"

namespace drn::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void Normalize(std::vector<double>& x) {
  const double r = Rms(x);
  if (r <= 0.0) throw std::runtime_error("dry signal is silent");
  for (auto& v : x) v /= r;
}

// Resonance gain of a formant at frequency f.
double Formant(double f, double center, double bandwidth) {
  const double d = (f - center) / bandwidth;
  return 1.0 / (1.0 + d * d);
}

// Two-pole resonator applied in place.
void Resonate(std::vector<double>& x, size_t begin, size_t end, double freq,
              double bandwidth, double fs) {
  const double r = std::exp(-std::numbers::pi * bandwidth / fs);
  const double a1 = 2.0 * r * std::cos(kTwoPi * freq / fs);
  const double a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  for (size_t n = begin; n < end; ++n) {
    const double y = (1.0 - r) * x[n] + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    x[n] = y;
  }
}

}  // namespace

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

std::vector<double> SyntheticSpeech(Rng& rng, int samples, double fs) {
  if (samples < 1) throw std::invalid_argument("SyntheticSpeech: no samples");
  std::vector<double> out(samples, 0.0);
  const double base_f0 = rng.Uniform(90.0, 240.0);
  const double syllable_rate = rng.Uniform(3.0, 8.0);
  double phase = 0.0;
  int n = static_cast<int>(rng.Uniform(0.0, 0.15) * fs);
  while (n < samples) {
    const double dur = rng.Uniform(0.7, 1.3) / syllable_rate;
    const int len = std::max(8, static_cast<int>(dur * fs));
    const int end = std::min(samples, n + len);
    const double kind = rng.Uniform();
    if (kind < 0.12) {
      n = end;  // pause
      continue;
    }
    const double gain = rng.Uniform(0.4, 1.0);
    if (kind < 0.3) {
      // Unvoiced burst: noise through a high resonance.
      std::vector<double> burst(end - n);
      for (auto& v : burst) v = rng.Normal();
      Resonate(burst, 0, burst.size(), rng.Uniform(2500.0, 6000.0),
               rng.Uniform(800.0, 2000.0), fs);
      const double br = Rms(burst);
      for (int i = n; i < end; ++i) {
        const double env = std::pow(std::sin(std::numbers::pi * (i - n) / len), 2);
        out[i] += gain * 0.5 * env * burst[i - n] / std::max(br, 1e-12);
      }
    } else {
      // Voiced syllable with gliding f0 and formants.
      const double f0a = base_f0 * rng.Uniform(0.85, 1.2);
      const double f0b = base_f0 * rng.Uniform(0.85, 1.2);
      const double f1a = rng.Uniform(300, 850), f1b = rng.Uniform(300, 850);
      const double f2a = rng.Uniform(900, 2400), f2b = rng.Uniform(900, 2400);
      const double f3 = rng.Uniform(2400, 3400);
      const double vib = rng.Uniform(4.0, 7.0);
      std::vector<double> amp;
      for (int i = n; i < end; ++i) {
        const double u = static_cast<double>(i - n) / len;
        const double f0 =
            (f0a + (f0b - f0a) * u) * (1.0 + 0.01 * std::sin(kTwoPi * vib * i / fs));
        phase = std::fmod(phase + kTwoPi * f0 / fs, kTwoPi);
        if ((i - n) % 16 == 0) {
          const double f1 = f1a + (f1b - f1a) * u;
          const double f2 = f2a + (f2b - f2a) * u;
          const int harmonics = static_cast<int>(std::min(7000.0, 0.45 * fs) / f0);
          amp.resize(harmonics);
          for (int h = 1; h <= harmonics; ++h) {
            const double f = h * f0;
            amp[h - 1] = (Formant(f, f1, 90.0) + 0.6 * Formant(f, f2, 120.0) +
                          0.3 * Formant(f, f3, 180.0)) /
                         std::sqrt(static_cast<double>(h));
          }
        }
        // sin(h * phase) by the Chebyshev recurrence.
        const double c2 = 2.0 * std::cos(phase);
        double s_prev = 0.0, s_cur = std::sin(phase), v = 0.0;
        for (size_t h = 0; h < amp.size(); ++h) {
          v += amp[h] * s_cur;
          const double s_next = c2 * s_cur - s_prev;
          s_prev = s_cur;
          s_cur = s_next;
        }
        const double env = std::pow(std::sin(std::numbers::pi * u), 1.5);
        out[i] += gain * env * v;
      }
    }
    n = end;
  }
  // Breath noise floor keeps the signal strictly non-silent.
  for (auto& v : out) v += 1e-3 * rng.Normal();
  Normalize(out);
  return out;
}

std::vector<double> ColoredNoise(Rng& rng, int samples, double fs) {
  if (samples < 1) throw std::invalid_argument("ColoredNoise: no samples");
  std::vector<double> out(samples);
  for (auto& v : out) v = rng.Normal();
  const double a = rng.Uniform(-0.5, 0.97);
  double prev = 0.0;
  for (auto& v : out) {
    prev = v + a * prev;
    v = prev;
  }
  if (rng.Bernoulli(0.5)) {
    std::vector<double> res(out);
    Resonate(res, 0, res.size(), rng.Uniform(200.0, 4000.0),
             rng.Uniform(100.0, 1000.0), fs);
    const double ro = Rms(out), rr = Rms(res);
    const double mix = rng.Uniform(0.3, 0.8);
    for (int i = 0; i < samples; ++i) {
      out[i] = (1.0 - mix) * out[i] / ro + mix * res[i] / rr;
    }
  }
  Normalize(out);
  return out;
}

std::vector<double> SyntheticProvider::Speech(Rng& rng, int samples) {
  return SyntheticSpeech(rng, samples, sample_rate_);
}

std::vector<double> SyntheticProvider::Noise(Rng& rng, int samples) {
  return ColoredNoise(rng, samples, sample_rate_);
}

namespace {

std::vector<std::string> ListWavs(const std::string& dir) {
  std::vector<std::string> files;
  if (dir.empty()) return files;
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir);
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

WavCorpusProvider::WavCorpusProvider(const std::string& speech_dir,
                                     const std::string& noise_dir,
                                     double sample_rate)
    : speech_(ListWavs(speech_dir)),
      noise_(ListWavs(noise_dir)),
      fallback_(sample_rate),
      sample_rate_(sample_rate) {}

std::vector<double> WavCorpusProvider::Draw(
    const std::vector<std::string>& files, Rng& rng, int samples) {
  const auto& path = files[rng.UniformInt(0, static_cast<int>(files.size()) - 1)];
  const auto wav = dsp::ReadWav(path);
  if (wav.sample_rate() != sample_rate_) {
    throw std::runtime_error(path + ": sample rate does not match");
  }
  auto ch = wav.channel(0);
  const int len = static_cast<int>(ch.size());
  const int offset = rng.UniformInt(0, len - 1);
  std::vector<double> out(samples);
  for (int i = 0; i < samples; ++i) out[i] = ch[(offset + i) % len];
  Normalize(out);
  return out;
}

std::vector<double> WavCorpusProvider::Speech(Rng& rng, int samples) {
  return speech_.empty() ? fallback_.Speech(rng, samples)
                         : Draw(speech_, rng, samples);
}

std::vector<double> WavCorpusProvider::Noise(Rng& rng, int samples) {
  return noise_.empty() ? fallback_.Noise(rng, samples)
                        : Draw(noise_, rng, samples);
}

std::unique_ptr<DrySignalProvider> MakeProvider(const std::string& speech_dir,
                                                const std::string& noise_dir,
                                                double sample_rate) {
  if (speech_dir.empty() && noise_dir.empty()) {
    return std::make_unique<SyntheticProvider>(sample_rate);
  }
  return std::make_unique<WavCorpusProvider>(speech_dir, noise_dir, sample_rate);
}

}  // namespace drn::sim
