#include "drn/baselines/beamformer.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drn::baselines {

namespace {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

double BinFrequency(int f, int fft_size, double fs) {
  return f * fs / fft_size;
}

}  // namespace

std::vector<Complex> SteeringVector(const sim::ArrayGeometry& array,
                                    const sim::Doa& doa, double freq,
                                    double c) {
  if (freq < 0) throw std::invalid_argument("steering: negative frequency");
  const sim::Vec3 u = sim::DirectionFromDoa(doa.azimuth_deg, doa.elevation_deg);
  std::vector<Complex> d(array.channels());
  for (int m = 0; m < array.channels(); ++m) {
    const double tau = -u.Dot(array.local[m]) / c;
    d[m] = std::polar(1.0, -2.0 * std::numbers::pi * freq * tau);
  }
  return d;
}

std::vector<double> DiffuseCoherence(const sim::ArrayGeometry& array,
                                     double freq, double c) {
  const int C = array.channels();
  std::vector<double> g(static_cast<size_t>(C) * C);
  for (int i = 0; i < C; ++i) {
    for (int j = 0; j < C; ++j) {
      const double x =
          2.0 * std::numbers::pi * freq * (array.local[i] - array.local[j]).Norm() / c;
      g[i * C + j] = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
    }
  }
  return g;
}

BeamformerWeights MaxDiWeights(const sim::ArrayGeometry& array,
                               const sim::Doa& doa, int fft_size,
                               double fs, double loading_factor) {
  if (!(loading_factor > 0)) {
    throw std::invalid_argument("maxDI: loading must be positive");
  }
  const int C = array.channels();
  BeamformerWeights out;
  out.bins = fft_size / 2 + 1;
  out.channels = C;
  out.doa = doa;
  out.w.resize(static_cast<size_t>(out.bins) * C);
  for (int f = 0; f < out.bins; ++f) {
    const double freq = BinFrequency(f, fft_size, fs);
    const auto g = DiffuseCoherence(array, freq);
    CMatrix A(C, C);
    double trace = 0.0;
    for (int i = 0; i < C; ++i) {
      trace += g[i * C + i];
      for (int j = 0; j < C; ++j) A(i, j) = g[i * C + j];
    }
    const double delta = loading_factor * trace / C;
    out.loading = delta;
    A.diagonal().array() += delta;
    const auto dv = SteeringVector(array, doa, freq);
    const CVector d = Eigen::Map<const CVector>(dv.data(), C);
    Eigen::LLT<CMatrix> llt(A);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("maxDI: loaded coherence matrix is singular at bin " +
                               std::to_string(f));
    }
    const CVector x = llt.solve(d);
    const Complex denom = d.dot(x);  // d^H x
    if (!(std::abs(denom) > 0)) {
      throw std::runtime_error("maxDI: degenerate steering at bin " +
                               std::to_string(f));
    }
    for (int c = 0; c < C; ++c) out.at(f, c) = x(c) / std::conj(denom);
  }
  return out;
}

BeamformerWeights DelayAndSumWeights(const sim::ArrayGeometry& array,
                                     const sim::Doa& doa, int fft_size,
                                     double fs) {
  const int C = array.channels();
  BeamformerWeights out;
  out.bins = fft_size / 2 + 1;
  out.channels = C;
  out.doa = doa;
  out.w.resize(static_cast<size_t>(out.bins) * C);
  for (int f = 0; f < out.bins; ++f) {
    const auto d = SteeringVector(array, doa, BinFrequency(f, fft_size, fs));
    for (int c = 0; c < C; ++c) out.at(f, c) = d[c] / static_cast<double>(C);
  }
  return out;
}

double DirectivityIndexDb(std::span<const Complex> w,
                          std::span<const Complex> d,
                          std::span<const double> gamma) {
  const size_t C = w.size();
  Complex resp = 0.0;
  for (size_t i = 0; i < C; ++i) resp += std::conj(w[i]) * d[i];
  Complex noise = 0.0;
  for (size_t i = 0; i < C; ++i) {
    for (size_t j = 0; j < C; ++j) {
      noise += std::conj(w[i]) * gamma[i * C + j] * w[j];
    }
  }
  return 10.0 * std::log10(std::norm(resp) / noise.real());
}

dsp::Spectrogram ApplyBeamformer(const dsp::Spectrogram& y,
                                 const BeamformerWeights& w) {
  if (y.channels != w.channels || y.bins != w.bins) {
    throw std::invalid_argument("beamformer: weights do not match input");
  }
  dsp::Spectrogram out;
  out.channels = 1;
  out.frames = y.frames;
  out.bins = y.bins;
  out.config = y.config;
  out.data.assign(static_cast<size_t>(y.frames) * y.bins, Complex(0.0));
  for (int t = 0; t < y.frames; ++t) {
    for (int f = 0; f < y.bins; ++f) {
      Complex acc = 0.0;
      for (int c = 0; c < y.channels; ++c) {
        acc += std::conj(w.at(f, c)) * y.at(c, t, f);
      }
      out.at(0, t, f) = acc;
    }
  }
  return out;
}

dsp::Waveform ApplyBeamformer(const dsp::Waveform& y,
                              const BeamformerWeights& w,
                              const dsp::StftConfig& stft) {
  return dsp::Istft(ApplyBeamformer(dsp::Stft(y, stft), w), y.samples(),
                    y.sample_rate());
}

MaxDiCache::MaxDiCache(sim::ArrayGeometry array, model::DoaGrid grid,
                       int fft_size, double sample_rate, double loading_factor)
    : array_(std::move(array)),
      grid_(grid),
      fft_size_(fft_size),
      sample_rate_(sample_rate),
      loading_factor_(loading_factor) {}

const BeamformerWeights& MaxDiCache::Get(int az, int el) {
  std::lock_guard lock(mu_);
  auto it = cache_.find({az, el});
  if (it != cache_.end()) return it->second;
  const sim::Doa doa{grid_.AzimuthCenter(az), grid_.ElevationCenter(el)};
  return cache_
      .emplace(std::make_pair(az, el),
               MaxDiWeights(array_, doa, fft_size_, sample_rate_, loading_factor_))
      .first->second;
}

int MaxDiCache::computed() const {
  std::lock_guard lock(mu_);
  return static_cast<int>(cache_.size());
}

dsp::Waveform MaxDiInformedInput(const dsp::Waveform& y,
                                 const model::DoaTrack& track, int track_hop,
                                 const dsp::StftConfig& stft,
                                 MaxDiCache& cache,
                                 const model::DoaGrid& grid) {
  if (track.frames() == 0) throw std::invalid_argument("maxDI input: empty DOA track");
  const int C = y.channels();
  const int N = y.samples();
  const auto spec = dsp::Stft(y, stft);
  dsp::Spectrogram beam;
  beam.channels = 1;
  beam.frames = spec.frames;
  beam.bins = spec.bins;
  beam.config = stft;
  beam.data.assign(static_cast<size_t>(spec.frames) * spec.bins, Complex(0.0));
  const auto cells = track.Quantize(grid);
  for (int t = 0; t < spec.frames; ++t) {
    const int row = std::min(
        static_cast<int>(static_cast<int64_t>(t) * stft.hop / track_hop),
        track.frames() - 1);
    const auto& w = cache.Get(cells.azimuth[row], cells.elevation[row]);
    if (w.channels != C) throw std::invalid_argument("maxDI input: channel mismatch");
    for (int f = 0; f < spec.bins; ++f) {
      Complex acc = 0.0;
      for (int c = 0; c < C; ++c) acc += std::conj(w.at(f, c)) * spec.at(c, t, f);
      beam.at(0, t, f) = acc;
    }
  }
  const auto b = dsp::Istft(beam, N, y.sample_rate());
  dsp::Waveform out(C + 1, N, y.sample_rate());
  for (int c = 0; c < C; ++c) {
    std::copy(y.channel(c).begin(), y.channel(c).end(), out.channel(c).begin());
  }
  std::copy(b.channel(0).begin(), b.channel(0).end(), out.channel(C).begin());
  return out;
}

}  // namespace drn::baselines
