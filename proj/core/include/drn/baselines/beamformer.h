#ifndef DRN_BASELINES_BEAMFORMER_H_
#define DRN_BASELINES_BEAMFORMER_H_

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "drn/dsp/stft.h"
#include "drn/dsp/waveform.h"
#include "drn/model/doa.h"
#include "drn/sim/geometry.h"

namespace drn::baselines {

using Complex = std::complex<double>;

// Far-field plane-wave response, d_c = exp(-j 2 pi f tau_c) with
// tau_c = -(u . p_c) / c and p_c the mic offset in the array frame.
std::vector<Complex> SteeringVector(const sim::ArrayGeometry& array,
                                    const sim::Doa& doa, double freq,
                                    double speed_of_sound = sim::kSpeedOfSound);

// Spherically isotropic coherence, Gamma_ij = sin(x) / x with
// x = 2 pi f |p_i - p_j| / c. Row-major [C x C].
std::vector<double> DiffuseCoherence(const sim::ArrayGeometry& array,
                                     double freq,
                                     double speed_of_sound = sim::kSpeedOfSound);

struct BeamformerWeights {
  int bins = 0;
  int channels = 0;
  sim::Doa doa;
  double loading = 0.0;
  std::vector<Complex> w;  // [F x C]

  Complex& at(int f, int c) { return w[static_cast<size_t>(f) * channels + c]; }
  Complex at(int f, int c) const {
    return w[static_cast<size_t>(f) * channels + c];
  }
  std::span<const Complex> bin(int f) const {
    return {w.data() + static_cast<size_t>(f) * channels,
            static_cast<size_t>(channels)};
  }
};

// w = (Gamma + delta I)^-1 d / (d^H (Gamma + delta I)^-1 d) at each bin of a
// `fft_size` STFT, with delta = loading_factor * trace(Gamma) / C.
// Throws std::runtime_error if the loaded system cannot be factored.
BeamformerWeights MaxDiWeights(const sim::ArrayGeometry& array,
                               const sim::Doa& doa, int fft_size,
                               double sample_rate,
                               double loading_factor = 1e-3);

// w = d / C.
BeamformerWeights DelayAndSumWeights(const sim::ArrayGeometry& array,
                                     const sim::Doa& doa, int fft_size,
                                     double sample_rate);

// |w^H d|^2 / (w^H Gamma w) in dB.
double DirectivityIndexDb(std::span<const Complex> w,
                          std::span<const Complex> d,
                          std::span<const double> gamma);

// y_out(t, f) = w(f)^H Y(t, f), resynthesized with the same STFT.
dsp::Waveform ApplyBeamformer(const dsp::Waveform& y,
                              const BeamformerWeights& weights,
                              const dsp::StftConfig& stft);
dsp::Spectrogram ApplyBeamformer(const dsp::Spectrogram& y,
                                 const BeamformerWeights& weights);

// maxDI weights per DOA grid cell, steered at the cell center. Thread-safe.
class MaxDiCache {
 public:
  MaxDiCache(sim::ArrayGeometry array, model::DoaGrid grid, int fft_size,
             double sample_rate, double loading_factor = 1e-3);

  const BeamformerWeights& Get(int azimuth_index, int elevation_index);
  int computed() const;

 private:
  sim::ArrayGeometry array_;
  model::DoaGrid grid_;
  int fft_size_;
  double sample_rate_;
  double loading_factor_;
  mutable std::mutex mu_;
  std::map<std::pair<int, int>, BeamformerWeights> cache_;
};

// Mic channels followed by the maxDI output steered by the DOA stream.
// STFT frame t uses track row floor(t * hop / track_hop), clamped to the
// track; weights change when the quantized cell changes.
dsp::Waveform MaxDiInformedInput(const dsp::Waveform& y,
                                 const model::DoaTrack& track, int track_hop,
                                 const dsp::StftConfig& stft,
                                 MaxDiCache& cache,
                                 const model::DoaGrid& grid);

}  // namespace drn::baselines

#endif  // DRN_BASELINES_BEAMFORMER_H_
