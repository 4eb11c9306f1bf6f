#include "drn/baselines/mcwf.h"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace drn::baselines {

namespace {

using Complex = std::complex<double>;
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

}  // namespace

CovarianceTracker::CovarianceTracker(int bins, int channels)
    : bins_(bins),
      channels_(channels),
      phi_yy_(static_cast<size_t>(bins) * channels * channels),
      phi_ys_(static_cast<size_t>(bins) * channels) {}

void CovarianceTracker::Reset() {
  std::fill(phi_yy_.begin(), phi_yy_.end(), Complex(0.0));
  std::fill(phi_ys_.begin(), phi_ys_.end(), Complex(0.0));
  frames_ = 0;
}

void CovarianceTracker::Update(std::span<const Complex> y,
                               std::span<const Complex> s, int ref) {
  const int C = channels_;
  for (int f = 0; f < bins_; ++f) {
    Complex* pyy = phi_yy_.data() + static_cast<size_t>(f) * C * C;
    Complex* pys = phi_ys_.data() + static_cast<size_t>(f) * C;
    const Complex sr = std::conj(s[static_cast<size_t>(ref) * bins_ + f]);
    for (int i = 0; i < C; ++i) {
      const Complex yi = y[static_cast<size_t>(i) * bins_ + f];
      pys[i] += yi * sr;
      for (int j = 0; j < C; ++j) {
        pyy[i * C + j] += yi * std::conj(y[static_cast<size_t>(j) * bins_ + f]);
      }
    }
  }
  ++frames_;
}

std::vector<Complex> CovarianceTracker::Weights(int bin, double loading) const {
  const int C = channels_;
  std::vector<Complex> w(C, Complex(0.0));
  if (frames_ == 0) return w;
  const Complex* pyy = phi_yy(bin);
  CMatrix A(C, C);
  double trace = 0.0;
  for (int i = 0; i < C; ++i) {
    trace += pyy[i * C + i].real();
    for (int j = 0; j < C; ++j) A(i, j) = pyy[i * C + j];
  }
  if (!(trace > 0.0)) return w;
  A.diagonal().array() += loading * trace / C;
  const CVector b = Eigen::Map<const CVector>(phi_ys(bin), C);
  const CVector x = A.llt().solve(b);
  for (int c = 0; c < C; ++c) w[c] = x(c);
  return w;
}

McwfResult McwfOnline(const dsp::Waveform& y, const dsp::Waveform& target,
                      std::span<const int> switch_samples,
                      const McwfConfig& cfg) {
  if (y.channels() != target.channels() || y.samples() != target.samples()) {
    throw std::invalid_argument("MCWF: oracle target does not match mixture");
  }
  if (cfg.reference < 0 || cfg.reference >= y.channels()) {
    throw std::invalid_argument("MCWF: bad reference channel");
  }
  const int N = y.samples();
  const dsp::StftConfig stft = cfg.stft();
  std::vector<int> resets;
  for (int s : switch_samples) {
    if (s < 0 || s >= N) {
      throw std::invalid_argument("MCWF: switch at sample " + std::to_string(s) +
                                  " outside the clip");
    }
    resets.push_back((s + stft.hop - 1) / stft.hop);
  }
  std::sort(resets.begin(), resets.end());
  resets.erase(std::unique(resets.begin(), resets.end()), resets.end());

  const auto Y = dsp::Stft(y, stft);
  const auto S = dsp::Stft(target, stft);
  const int C = y.channels();
  const int F = Y.bins;
  CovarianceTracker tracker(F, C);
  McwfResult res;
  dsp::Spectrogram out;
  out.channels = 1;
  out.frames = Y.frames;
  out.bins = F;
  out.config = stft;
  out.data.assign(static_cast<size_t>(Y.frames) * F, Complex(0.0));
  std::vector<Complex> yt(static_cast<size_t>(C) * F), st(yt.size());
  size_t next_reset = 0;
  for (int t = 0; t < Y.frames; ++t) {
    if (next_reset < resets.size() && resets[next_reset] == t) {
      tracker.Reset();
      res.reset_frames.push_back(t);
      ++next_reset;
    }
    for (int c = 0; c < C; ++c) {
      for (int f = 0; f < F; ++f) {
        yt[static_cast<size_t>(c) * F + f] = Y.at(c, t, f);
        st[static_cast<size_t>(c) * F + f] = S.at(c, t, f);
      }
    }
    tracker.Update(yt, st, cfg.reference);
    res.frames_in_stats.push_back(tracker.frames());
    for (int f = 0; f < F; ++f) {
      const auto w = tracker.Weights(f, cfg.loading);
      Complex acc = 0.0;
      for (int c = 0; c < C; ++c) acc += std::conj(w[c]) * Y.at(c, t, f);
      out.at(0, t, f) = acc;
    }
  }
  res.output = dsp::Istft(out, N, y.sample_rate());
  return res;
}

}  // namespace drn::baselines
