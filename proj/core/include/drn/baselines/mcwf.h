#ifndef DRN_BASELINES_MCWF_H_
#define DRN_BASELINES_MCWF_H_

#include <complex>
#include <span>
#include <vector>

#include "drn/dsp/stft.h"
#include "drn/dsp/waveform.h"

namespace drn::baselines {

// Cumulative per-bin statistics Phi_yy = sum Y Y^H and phi_ys = sum Y S_ref^*.
class CovarianceTracker {
 public:
  CovarianceTracker(int bins, int channels);

  void Reset();
  // y and s hold one STFT frame, [C x F] channel-major; s is the oracle
  // multichannel target, of which channel `ref` is used.
  void Update(std::span<const std::complex<double>> y,
              std::span<const std::complex<double>> s, int ref = 0);
  // (Phi_yy + delta I)^-1 phi_ys with delta = loading * trace / C; zero
  // weights while the statistics are empty.
  std::vector<std::complex<double>> Weights(int bin, double loading) const;

  int bins() const { return bins_; }
  int channels() const { return channels_; }
  int frames() const { return frames_; }
  const std::complex<double>* phi_yy(int bin) const {
    return phi_yy_.data() + static_cast<size_t>(bin) * channels_ * channels_;
  }
  const std::complex<double>* phi_ys(int bin) const {
    return phi_ys_.data() + static_cast<size_t>(bin) * channels_;
  }

 private:
  int bins_;
  int channels_;
  int frames_ = 0;
  std::vector<std::complex<double>> phi_yy_;  // [F x C x C]
  std::vector<std::complex<double>> phi_ys_;  // [F x C]
};

struct McwfConfig {
  int window = 512;  // hop = window / 2
  dsp::WindowKind kind = dsp::WindowKind::kSqrtHann;
  double loading = 1e-3;
  int reference = 0;

  dsp::StftConfig stft() const { return {window, window / 2, kind}; }
};

struct McwfResult {
  dsp::Waveform output;             // [1 x N]
  std::vector<int> reset_frames;    // STFT frames where statistics restart
  std::vector<int> frames_in_stats; // tracker frame count after each update
};

// Oracle online MCWF. Statistics restart at the first STFT frame whose hop
// block starts at or after each switch sample; frame t is filtered with
// statistics of frames <= t. Throws std::invalid_argument for a switch
// outside [0, N) or mismatched shapes.
McwfResult McwfOnline(const dsp::Waveform& y, const dsp::Waveform& target,
                      std::span<const int> switch_samples,
                      const McwfConfig& config = {});

}  // namespace drn::baselines

#endif  // DRN_BASELINES_MCWF_H_
