#include "drn/metrics/pcm_loss.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "drn/dsp/fft.h"
#include "drn/dsp/window.h"

namespace drn::metrics {

namespace {

using dsp::Complex;

double Sign(double x) { return (x > 0) - (x < 0); }

// Frame t covers [t*hop - (fft - hop), t*hop + hop), zero outside [0, N).
class PcmStft {
 public:
  PcmStft(const PcmConfig& cfg, int samples)
      : cfg_(cfg),
        samples_(samples),
        fft_(cfg.fft_size),
        window_(dsp::HannWindow(cfg.fft_size)) {
    if (cfg.hop < 1 || cfg.hop > cfg.fft_size) {
      throw std::invalid_argument("PcmLoss: hop must be in [1, fft_size]");
    }
    frames_ = (samples + cfg.hop - 1) / cfg.hop + (cfg.fft_size - cfg.hop) / cfg.hop;
    bins_ = cfg.fft_size / 2 + 1;
  }

  int frames() const { return frames_; }
  int bins() const { return bins_; }

  int Start(int t) const { return t * cfg_.hop - (cfg_.fft_size - cfg_.hop); }

  std::vector<Complex> Analyze(std::span<const double> x) const {
    std::vector<Complex> out(static_cast<size_t>(frames_) * bins_);
    std::vector<double> frame(cfg_.fft_size);
    for (int t = 0; t < frames_; ++t) {
      const int s = Start(t);
      for (int i = 0; i < cfg_.fft_size; ++i) {
        const int n = s + i;
        frame[i] = (n >= 0 && n < samples_) ? x[n] * window_[i] : 0.0;
      }
      fft_.Forward(frame, std::span<Complex>(out.data() + t * bins_, bins_));
    }
    return out;
  }

  // Adjoint of Analyze: accumulates into grad (length N).
  void AnalyzeAdjoint(const std::vector<Complex>& g,
                      std::span<double> grad) const {
    std::vector<double> frame(cfg_.fft_size);
    for (int t = 0; t < frames_; ++t) {
      fft_.ForwardAdjoint(
          std::span<const Complex>(g.data() + t * bins_, bins_), frame);
      const int s = Start(t);
      for (int i = 0; i < cfg_.fft_size; ++i) {
        const int n = s + i;
        if (n >= 0 && n < samples_) grad[n] += frame[i] * window_[i];
      }
    }
  }

 private:
  PcmConfig cfg_;
  int samples_;
  dsp::RealFft fft_;
  std::vector<double> window_;
  int frames_ = 0;
  int bins_ = 0;
};

struct PcmResult {
  double loss = 0.0;
  std::vector<Complex> grad;  // dL/d(Re, Im) of STFT(est)
};

PcmResult Evaluate(const PcmStft& stft, std::span<const double> est,
                   std::span<const double> ref, std::span<const double> mix,
                   bool want_grad) {
  const auto E = stft.Analyze(est);
  const auto S = stft.Analyze(ref);
  const auto Y = stft.Analyze(mix);
  const double norm = 1.0 / (static_cast<double>(E.size()));
  PcmResult r;
  if (want_grad) r.grad.resize(E.size());
  double speech = 0.0, noise = 0.0;
  for (size_t k = 0; k < E.size(); ++k) {
    const Complex ne = Y[k] - E[k];
    const Complex ns = Y[k] - S[k];
    const double dsr = std::abs(E[k].real()) - std::abs(S[k].real());
    const double dsi = std::abs(E[k].imag()) - std::abs(S[k].imag());
    const double dnr = std::abs(ne.real()) - std::abs(ns.real());
    const double dni = std::abs(ne.imag()) - std::abs(ns.imag());
    speech += std::abs(dsr) + std::abs(dsi);
    noise += std::abs(dnr) + std::abs(dni);
    if (want_grad) {
      const double gr = Sign(dsr) * Sign(E[k].real()) -
                        Sign(dnr) * Sign(ne.real());
      const double gi = Sign(dsi) * Sign(E[k].imag()) -
                        Sign(dni) * Sign(ne.imag());
      r.grad[k] = Complex(0.5 * norm * gr, 0.5 * norm * gi);
    }
  }
  r.loss = 0.5 * norm * (speech + noise);
  return r;
}

void CheckLengths(size_t est, size_t ref, size_t mix) {
  if (est != ref || est != mix) {
    throw std::invalid_argument("PcmLoss: est/ref/mix lengths differ (" +
                                std::to_string(est) + ", " +
                                std::to_string(ref) + ", " +
                                std::to_string(mix) + ")");
  }
  if (est == 0) throw std::invalid_argument("PcmLoss: empty signal");
}

}  // namespace

template <typename T>
ad::Tensor<T> PcmLoss(const ad::Tensor<T>& est, std::span<const double> ref,
                      std::span<const double> mix, const PcmConfig& config) {
  CheckLengths(est.size(), ref.size(), mix.size());
  const int N = static_cast<int>(est.size());
  auto stft = std::make_shared<PcmStft>(config, N);
  std::vector<double> e(est.value().begin(), est.value().end());
  auto result = Evaluate(*stft, e, ref, mix, est.requires_grad());
  const int eid = est.id();
  auto grad = std::make_shared<std::vector<Complex>>(std::move(result.grad));
  return est.graph()->AddNode(
      {1}, {static_cast<T>(result.loss)}, {est},
      [stft, grad, eid, N](ad::Graph<T>& g, int self) {
        const double up = static_cast<double>(g.grad(self)[0]);
        std::vector<double> dx(N, 0.0);
        stft->AnalyzeAdjoint(*grad, dx);
        auto out = g.grad(eid);
        for (int n = 0; n < N; ++n) out[n] += static_cast<T>(up * dx[n]);
      });
}

double PcmLossValue(const dsp::Waveform& est, const dsp::Waveform& ref,
                    const dsp::Waveform& mix, const PcmConfig& config) {
  if (est.channels() != 1 || ref.channels() != 1 || mix.channels() != 1) {
    throw std::invalid_argument("PcmLossValue: mono signals required");
  }
  CheckLengths(est.data().size(), ref.data().size(), mix.data().size());
  PcmStft stft(config, est.samples());
  return Evaluate(stft, est.data(), ref.data(), mix.data(), false).loss;
}

template ad::Tensor<float> PcmLoss(const ad::Tensor<float>&,
                                   std::span<const double>,
                                   std::span<const double>, const PcmConfig&);
template ad::Tensor<double> PcmLoss(const ad::Tensor<double>&,
                                    std::span<const double>,
                                    std::span<const double>, const PcmConfig&);

}  // namespace drn::metrics
