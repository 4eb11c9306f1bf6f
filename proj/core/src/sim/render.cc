#include "drn/sim/render.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "drn/sim/convolve.h"
#include "drn/sim/ism.h"

namespace drn::sim {

namespace {

constexpr uint64_t kDryStream = 0xd27;

double MeanSquare(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double DbToAmplitude(double db) { return std::pow(10.0, db / 20.0); }

void Accumulate(dsp::Waveform& acc, const dsp::Waveform& x, double gain) {
  auto& a = acc.data();
  const auto& b = x.data();
  for (size_t i = 0; i < a.size(); ++i) a[i] += gain * b[i];
}

void CheckShape(const dsp::Waveform& w, int channels, int samples,
                const std::string& what) {
  if (w.channels() != channels || w.samples() != samples) {
    throw std::invalid_argument("ScaleAndMix: " + what + " has shape " +
                                std::to_string(w.channels()) + "x" +
                                std::to_string(w.samples()));
  }
}

struct Rendered {
  dsp::Waveform direct;
  dsp::Waveform reverb;
};

Rendered RenderSource(const RoomSpec& room, const Vec3& src,
                      const std::vector<Vec3>& mics,
                      std::span<const double> dry, const IsmConfig& ism,
                      double fs, bool split) {
  const int C = static_cast<int>(mics.size());
  const int N = static_cast<int>(dry.size());
  const auto rirs = ComputeRirs(room, src, mics, ism);
  size_t longest = 1;
  for (const auto& r : rirs) longest = std::max(longest, r.reverb.size());
  Convolver conv(dry, static_cast<int>(longest));
  Rendered out{dsp::Waveform(C, N, fs), dsp::Waveform(C, N, fs)};
  for (int c = 0; c < C; ++c) {
    auto d = ConvolveDirect(dry, rirs[c].direct, N);
    std::vector<double> r =
        rirs[c].reverb.empty() ? std::vector<double>(N, 0.0)
                               : conv.Apply(rirs[c].reverb, N);
    auto dc = out.direct.channel(c);
    auto rc = out.reverb.channel(c);
    if (split) {
      std::copy(d.begin(), d.end(), dc.begin());
      std::copy(r.begin(), r.end(), rc.begin());
    } else {
      for (int n = 0; n < N; ++n) dc[n] = d[n] + r[n];
    }
  }
  return out;
}

}  // namespace

SourceImages RenderSourceImages(const SceneSpec& scene,
                                DrySignalProvider& provider,
                                const SceneConfig& config) {
  const int N = scene.samples;
  const double fs = scene.sample_rate;
  const auto mics = scene.array.Positions();
  const IsmConfig ism{config.ism_order, fs, kSpeedOfSound};
  Rng rng = Rng::ForStream(scene.seed, kDryStream);
  std::vector<std::vector<double>> target_dry, interferer_dry, noise_dry;
  for (size_t k = 0; k < scene.targets.size(); ++k) {
    target_dry.push_back(provider.Speech(rng, N));
  }
  for (size_t i = 0; i < scene.interferers.size(); ++i) {
    interferer_dry.push_back(provider.Speech(rng, N));
  }
  for (size_t i = 0; i < scene.noises.size(); ++i) {
    noise_dry.push_back(provider.Noise(rng, N));
  }
  SourceImages img;
  for (size_t k = 0; k < scene.targets.size(); ++k) {
    auto r = RenderSource(scene.room, scene.targets[k], mics, target_dry[k],
                          ism, fs, true);
    img.target_direct.push_back(std::move(r.direct));
    img.target_reverb.push_back(std::move(r.reverb));
  }
  for (size_t i = 0; i < scene.interferers.size(); ++i) {
    img.interferer.push_back(RenderSource(scene.room, scene.interferers[i],
                                          mics, interferer_dry[i], ism, fs,
                                          false)
                                 .direct);
  }
  for (size_t i = 0; i < scene.noises.size(); ++i) {
    img.noise.push_back(
        RenderSource(scene.room, scene.noises[i], mics, noise_dry[i], ism, fs,
                     false)
            .direct);
  }
  return img;
}

UtteranceBundle ScaleAndMix(const SceneSpec& scene, const SourceImages& img,
                            int doa_hop) {
  const int C = scene.array.channels();
  const int N = scene.samples;
  const double fs = scene.sample_rate;
  const size_t K = scene.targets.size();
  if (K == 0) throw std::invalid_argument("ScaleAndMix: no target talkers");
  if (img.target_direct.size() != K || img.target_reverb.size() != K ||
      img.interferer.size() != scene.interferers.size() ||
      img.noise.size() != scene.noises.size() ||
      scene.target_level_db.size() != K ||
      scene.interferer_level_db.size() != img.interferer.size() ||
      scene.noise_level_db.size() != img.noise.size()) {
    throw std::invalid_argument("ScaleAndMix: source counts do not match");
  }
  for (size_t k = 0; k < K; ++k) {
    CheckShape(img.target_direct[k], C, N, "target direct");
    CheckShape(img.target_reverb[k], C, N, "target reverb");
  }
  for (const auto& w : img.interferer) CheckShape(w, C, N, "interferer");
  for (const auto& w : img.noise) CheckShape(w, C, N, "noise");

  UtteranceBundle b;
  b.scene = scene;
  b.doa_hop = doa_hop;
  MixGains& g = b.gains;
  const double nominal = scene.nominal_level_dbfs;

  g.reference_power = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < K; ++k) {
    const double rms = Rms(img.target_direct[k].channel(0));
    if (!(rms > 0.0)) {
      throw std::invalid_argument("ScaleAndMix: target " + std::to_string(k) +
                                  " is silent at the reference mic");
    }
    g.target.push_back(DbToAmplitude(nominal + scene.target_level_db[k]) / rms);
  }

  b.direct = dsp::Waveform(C, N, fs);
  b.reverb = dsp::Waveform(C, N, fs);
  for (size_t k = 0; k < K; ++k) {
    dsp::Waveform d(C, N, fs);
    Accumulate(d, img.target_direct[k], g.target[k]);
    g.reference_power =
        std::min(g.reference_power, MeanSquare(d.channel(0)));
    Accumulate(b.direct, d, 1.0);
    Accumulate(b.reverb, img.target_reverb[k], g.target[k]);
    b.talker_direct.push_back(std::move(d));
  }

  auto group = [&](const std::vector<dsp::Waveform>& srcs,
                   const std::vector<double>& levels, std::vector<double>& gains,
                   double ratio_db, bool clamp, double& scale, bool* clamped) {
    dsp::Waveform sum(C, N, fs);
    for (size_t i = 0; i < srcs.size(); ++i) {
      const double rms = Rms(srcs[i].channel(0));
      const double gi = rms > 0.0 ? DbToAmplitude(nominal + levels[i]) / rms : 0.0;
      gains.push_back(gi);
      Accumulate(sum, srcs[i], gi);
    }
    const double p = MeanSquare(sum.channel(0));
    scale = 1.0;
    if (p > 0.0) {
      scale = std::sqrt(g.reference_power / (p * std::pow(10.0, ratio_db / 10.0)));
      if (clamp && scale > 1.0) {
        scale = 1.0;
        if (clamped) *clamped = true;
      }
    }
    for (auto& v : sum.data()) v *= scale;
    return sum;
  };
  b.interference = group(img.interferer, scene.interferer_level_db, g.interferer,
                         scene.sir_db, true, g.interferer_scale,
                         &g.interferer_clamped);
  b.noise = group(img.noise, scene.noise_level_db, g.noise, scene.snr_db, false,
                  g.noise_scale, nullptr);

  b.mixture = dsp::Waveform(C, N, fs);
  auto& y = b.mixture.data();
  const auto& sd = b.direct.data();
  const auto& sr = b.reverb.data();
  const auto& in = b.interference.data();
  const auto& nz = b.noise.data();
  for (size_t i = 0; i < y.size(); ++i) y[i] = ((sd[i] + sr[i]) + in[i]) + nz[i];

  b.target = dsp::Waveform(1, N, fs);
  for (int n = 0; n < N; ++n) {
    b.target.at(0, n) = b.talker_direct[ActiveTalker(scene.schedule, n)].at(0, n);
  }
  b.doa = BuildDoaTrack(scene, doa_hop);
  return b;
}

UtteranceBundle RenderScene(const SceneSpec& scene, DrySignalProvider& provider,
                            const SceneConfig& config) {
  return ScaleAndMix(scene, RenderSourceImages(scene, provider, config),
                     config.doa_hop);
}

model::DoaTrack BuildDoaTrack(const SceneSpec& scene, int hop) {
  if (hop < 1) throw std::invalid_argument("DOA hop must be >= 1");
  const auto doas = scene.TargetDoas();
  model::DoaTrack t;
  const int rows = (scene.samples + hop - 1) / hop;
  for (int i = 0; i < rows; ++i) {
    const Doa& d = doas.at(ActiveTalker(scene.schedule, i * hop));
    t.azimuth_deg.push_back(d.azimuth_deg);
    t.elevation_deg.push_back(d.elevation_deg);
  }
  return t;
}

double MixingResidual(const UtteranceBundle& b) {
  double worst = 0.0;
  const auto& y = b.mixture.data();
  for (size_t i = 0; i < y.size(); ++i) {
    const double sum = ((b.direct.data()[i] + b.reverb.data()[i]) +
                        b.interference.data()[i]) +
                       b.noise.data()[i];
    worst = std::max(worst, std::abs(y[i] - sum));
  }
  for (size_t i = 0; i < b.direct.data().size(); ++i) {
    double sum = 0.0;
    for (const auto& d : b.talker_direct) sum += d.data()[i];
    worst = std::max(worst, std::abs(b.direct.data()[i] - sum));
  }
  return worst;
}

model::DoaTrack JitterDoa(const model::DoaTrack& truth, Rng& rng,
                          const JitterConfig& cfg, Doa* mean_offset) {
  auto draw = [&rng](double r) { return r > 0.0 ? rng.Uniform(-r, r) : 0.0; };
  const double mu_az = draw(cfg.mean_range_deg);
  const double mu_el = draw(cfg.mean_range_deg);
  if (mean_offset) *mean_offset = {mu_az, mu_el};
  model::DoaTrack out = truth;
  for (int i = 0; i < truth.frames(); ++i) {
    double az = truth.azimuth_deg[i] + mu_az + draw(cfg.frame_range_deg);
    az = std::fmod(az, 360.0);
    if (az < 0.0) az += 360.0;
    out.azimuth_deg[i] = az;
    out.elevation_deg[i] = std::clamp(
        truth.elevation_deg[i] + mu_el + draw(cfg.frame_range_deg), -90.0, 90.0);
  }
  return out;
}

}  // namespace drn::sim
