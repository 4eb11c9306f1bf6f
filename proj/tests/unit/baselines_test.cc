#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "drn/baselines/beamformer.h"
#include "drn/baselines/mcwf.h"
#include "drn/metrics/metrics.h"
#include "drn/sim/convolve.h"
#include "drn/sim/ism.h"
#include "drn/sim/signals.h"

namespace drn::baselines {
namespace {

constexpr double kFs = 16000.0;

sim::ArrayGeometry Array() {
  auto a = sim::ArrayGeometry::Circular(8, 0.1);
  a.center = {5, 5, 1.5};
  return a;
}

// Anechoic image of `dry` arriving from `az` at 3 m, one row per mic and a
// last row at the array center.
dsp::Waveform Anechoic(const std::vector<double>& dry, double az) {
  const sim::RoomSpec room{10, 10, 4, 1.0};
  const auto array = Array();
  auto mics = array.Positions();
  mics.push_back(array.center);
  const sim::Vec3 src = array.center + sim::DirectionFromDoa(az, 0.0) * 3.0;
  const auto rirs = sim::ComputeRirs(room, src, mics, {0, kFs, 343.0});
  const int N = static_cast<int>(dry.size());
  dsp::Waveform out(static_cast<int>(mics.size()), N, kFs);
  for (size_t c = 0; c < mics.size(); ++c) {
    const auto x = sim::ConvolveDirect(dry, rirs[c].direct, N);
    std::copy(x.begin(), x.end(), out.channel(static_cast<int>(c)).begin());
  }
  return out;
}

dsp::Waveform Rows(const dsp::Waveform& w, int first, int count) {
  dsp::Waveform out(count, w.samples(), w.sample_rate());
  for (int c = 0; c < count; ++c) {
    std::copy(w.channel(first + c).begin(), w.channel(first + c).end(),
              out.channel(c).begin());
  }
  return out;
}

std::vector<double> Speech(uint64_t seed, int n) {
  Rng rng(seed);
  return sim::SyntheticSpeech(rng, n, kFs);
}

TEST(Steering, ZeroFrequencyIsAllOnes) {
  for (const auto& d : SteeringVector(Array(), {37, 12}, 0.0)) {
    EXPECT_EQ(d, Complex(1.0, 0.0));
  }
}

TEST(Steering, OppositeMicsAreConjugate) {
  const auto d = SteeringVector(Array(), {71, 20}, 2500.0);
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(std::abs(d[c] - std::conj(d[c + 4])), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(d[c]), 1.0, 1e-12);
  }
}

TEST(Steering, EndfirePairPhase) {
  sim::ArrayGeometry pair;
  pair.local = {{-0.1, 0, 0}, {0.1, 0, 0}};
  const auto d = SteeringVector(pair, {0, 0}, 1000.0);
  // 2 pi * 1000 * 0.2 / 343.
  // The wrapped phase reads 3.663665 - 2 pi.
  EXPECT_NEAR(std::arg(d[1] / d[0]), 3.663665 - 2 * std::numbers::pi, 1e-6);
}

TEST(MaxDi, SingleMicIsUnity) {
  sim::ArrayGeometry one;
  one.local = {{0, 0, 0}};
  const auto w = MaxDiWeights(one, {10, 0}, 64, kFs);
  for (const auto& v : w.w) EXPECT_NEAR(std::abs(v - Complex(1.0)), 0.0, 1e-12);
}

TEST(MaxDi, DistortionlessAtEveryBin) {
  const auto array = Array();
  for (double az : {0.0, 45.0, 200.0}) {
    const sim::Doa doa{az, 10.0};
    const auto w = MaxDiWeights(array, doa, 512, kFs);
    for (int f = 0; f < w.bins; ++f) {
      const auto d = SteeringVector(array, doa, f * kFs / 512);
      Complex r = 0.0;
      for (int c = 0; c < 8; ++c) r += std::conj(w.at(f, c)) * d[c];
      ASSERT_LT(std::abs(r - 1.0), 1e-6) << f;
    }
  }
}

TEST(MaxDi, DirectivityAtLeastDelayAndSum) {
  const auto array = Array();
  const sim::Doa doa{30, 0};
  const auto w = MaxDiWeights(array, doa, 256, kFs, 1e-9);
  const auto das = DelayAndSumWeights(array, doa, 256, kFs);
  for (int f = 1; f < w.bins; ++f) {
    const double freq = f * kFs / 256;
    const auto d = SteeringVector(array, doa, freq);
    const auto g = DiffuseCoherence(array, freq);
    EXPECT_GE(DirectivityIndexDb(w.bin(f), d, g),
              DirectivityIndexDb(das.bin(f), d, g) - 1e-6)
        << f;
  }
}

TEST(MaxDi, WeightsFinite) {
  const auto w = MaxDiWeights(Array(), {0, 0}, 512, kFs);
  for (const auto& v : w.w) ASSERT_TRUE(std::isfinite(std::norm(v)));
}

TEST(MaxDi, LoadingMustBePositive) {
  EXPECT_THROW(MaxDiWeights(Array(), {0, 0}, 64, kFs, 0.0), std::invalid_argument);
}

TEST(Beamformer, ExtractsSteeredPlaneWave) {
  const auto img = Anechoic(Speech(1, 32000), 75.0);
  const auto y = Rows(img, 0, 8);
  const auto ref = Rows(img, 8, 1);
  const dsp::StftConfig stft{512, 256, dsp::WindowKind::kSqrtHann};
  const auto w = MaxDiWeights(Array(), {75.0, 0.0}, 512, kFs);
  const auto out = ApplyBeamformer(y, w, stft);
  EXPECT_GT(metrics::SiSdr(out.channel(0), ref.channel(0)), 20.0);
}

TEST(Beamformer, SelectMicZeroRoundTrips) {
  const auto y = Rows(Anechoic(Speech(2, 8000), 10.0), 0, 8);
  const dsp::StftConfig stft{512, 256, dsp::WindowKind::kSqrtHann};
  auto w = MaxDiWeights(Array(), {0, 0}, 512, kFs);
  std::fill(w.w.begin(), w.w.end(), Complex(0.0));
  for (int f = 0; f < w.bins; ++f) w.at(f, 0) = 1.0;
  const auto out = ApplyBeamformer(y, w, stft);
  for (int n = 0; n < 8000; ++n) ASSERT_NEAR(out.at(0, n), y.at(0, n), 1e-9);
  const auto zero = ApplyBeamformer(dsp::Waveform(8, 8000, kFs), w, stft);
  for (double v : zero.data()) ASSERT_EQ(v, 0.0);
}

TEST(Mcwf, NoiseFreeConvergesToTarget) {
  const auto img = Anechoic(Speech(3, 48000), 120.0);
  const auto y = Rows(img, 0, 8);
  const auto res = McwfOnline(y, y, {});
  const auto tail = [](const dsp::Waveform& w) {
    return std::vector<double>(w.channel(0).begin() + 16000, w.channel(0).end());
  };
  EXPECT_GT(metrics::SiSdr(tail(res.output), tail(y)), 15.0);
}

struct TwoTalker {
  dsp::Waveform y, s0, s1;
};

TwoTalker MakeTwoTalker(int n) {
  const auto a = Rows(Anechoic(Speech(4, n), 30.0), 0, 8);
  const auto b = Rows(Anechoic(Speech(5, n), 150.0), 0, 8);
  TwoTalker t{dsp::Waveform(8, n, kFs), a, b};
  // 0 dB at mic 0.
  const double g = sim::Rms(a.channel(0)) / sim::Rms(b.channel(0));
  for (auto& v : t.s1.data()) v *= g;
  for (size_t i = 0; i < t.y.data().size(); ++i) {
    t.y.data()[i] = t.s0.data()[i] + t.s1.data()[i];
  }
  return t;
}

TEST(Mcwf, ImprovesTwoSourceAnechoic) {
  const auto t = MakeTwoTalker(64000);
  const auto res = McwfOnline(t.y, t.s0, {});
  const double mix = metrics::SiSdr(t.y.channel(0), t.s0.channel(0));
  const double out = metrics::SiSdr(res.output.channel(0), t.s0.channel(0));
  EXPECT_NEAR(mix, 0.0, 0.5);
  EXPECT_GT(out - mix, 5.0);
}

TEST(Mcwf, StatisticsResetAtSwitchFrames) {
  const auto t = MakeTwoTalker(32000);
  dsp::Waveform target(8, 32000, kFs);
  for (int c = 0; c < 8; ++c) {
    for (int n = 0; n < 32000; ++n) {
      target.at(c, n) = n < 16000 ? t.s0.at(c, n) : t.s1.at(c, n);
    }
  }
  const std::vector<int> switches{16000, 24100};
  const auto res = McwfOnline(t.y, target, switches);
  ASSERT_EQ(res.reset_frames, (std::vector<int>{63, 95}));
  for (int f = 0; f < static_cast<int>(res.frames_in_stats.size()); ++f) {
    const int expect = f < 63 ? f + 1 : f < 95 ? f - 62 : f - 94;
    ASSERT_EQ(res.frames_in_stats[f], expect) << f;
  }
  const int bad[] = {32000};
  EXPECT_THROW(McwfOnline(t.y, target, bad), std::invalid_argument);
}

TEST(Mcwf, TrackerResetAndHermitian) {
  const auto t = MakeTwoTalker(4096);
  const auto Y = dsp::Stft(t.y, {64, 32, dsp::WindowKind::kSqrtHann});
  CovarianceTracker tr(Y.bins, 8);
  std::vector<Complex> frame(8 * Y.bins);
  for (int k = 0; k < 20; ++k) {
    for (int c = 0; c < 8; ++c) {
      for (int f = 0; f < Y.bins; ++f) frame[c * Y.bins + f] = Y.at(c, k + 10, f);
    }
    tr.Update(frame, frame);
  }
  for (int f = 0; f < Y.bins; ++f) {
    Eigen::MatrixXcd A(8, 8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) A(i, j) = tr.phi_yy(f)[i * 8 + j];
    }
    ASSERT_LT((A - A.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
    ASSERT_GE(es.eigenvalues().minCoeff(), -1e-12 * std::max(1.0, A.trace().real()));
  }
  tr.Reset();
  EXPECT_EQ(tr.frames(), 0);
  for (int f = 0; f < Y.bins; ++f) {
    for (int i = 0; i < 64; ++i) ASSERT_EQ(tr.phi_yy(f)[i], Complex(0.0));
    for (const auto& v : tr.Weights(f, 1e-3)) ASSERT_EQ(v, Complex(0.0));
  }
}

TEST(Mcwf, OutputIgnoresFutureFrames) {
  auto t = MakeTwoTalker(16000);
  const auto base = McwfOnline(t.y, t.s0, {});
  const int p = 9000;
  for (int c = 0; c < 8; ++c) {
    for (int n = p; n < 16000; ++n) t.y.at(c, n) += 0.3 * std::sin(0.1 * n);
  }
  const auto pert = McwfOnline(t.y, t.s0, {});
  for (int n = 0; n < p - 512; ++n) ASSERT_EQ(base.output.at(0, n), pert.output.at(0, n));
  double diff = 0.0;
  for (int n = p; n < 16000; ++n) diff += std::abs(base.output.at(0, n) - pert.output.at(0, n));
  EXPECT_GT(diff, 0.0);
}

TEST(MaxDiInformed, ConstantDoaComputesOnce) {
  const auto y = Rows(Anechoic(Speech(6, 8000), 45.0), 0, 8);
  model::DoaTrack track;
  track.azimuth_deg.assign(500, 45.0);
  track.elevation_deg.assign(500, 0.0);
  const model::DoaGrid grid;
  MaxDiCache cache(Array(), grid, 512, kFs);
  const dsp::StftConfig stft{512, 256, dsp::WindowKind::kSqrtHann};
  const auto out = MaxDiInformedInput(y, track, 16, stft, cache, grid);
  EXPECT_EQ(cache.computed(), 1);
  ASSERT_EQ(out.channels(), 9);
  for (int c = 0; c < 8; ++c) {
    for (int n = 0; n < 8000; ++n) ASSERT_EQ(out.at(c, n), y.at(c, n));
  }
}

TEST(MaxDiInformed, MatchesBeamformerPerSegment) {
  const auto y = Rows(Anechoic(Speech(7, 16000), 45.0), 0, 8);
  model::DoaTrack track;
  for (int i = 0; i < 1000; ++i) {
    track.azimuth_deg.push_back(i < 500 ? 45.0 : 200.0);
    track.elevation_deg.push_back(0.0);
  }
  const model::DoaGrid grid;
  MaxDiCache cache(Array(), grid, 512, kFs);
  const dsp::StftConfig stft{512, 256, dsp::WindowKind::kSqrtHann};
  const auto out = MaxDiInformedInput(y, track, 16, stft, cache, grid);
  EXPECT_EQ(cache.computed(), 2);
  const auto a = ApplyBeamformer(y, cache.Get(grid.AzimuthIndex(45), grid.ElevationIndex(0)), stft);
  const auto b = ApplyBeamformer(y, cache.Get(grid.AzimuthIndex(200), grid.ElevationIndex(0)), stft);
  // Segment switch at sample 8000; frames straddling it mix both weights.
  for (int n = 0; n < 8000 - 512; ++n) ASSERT_NEAR(out.at(8, n), a.at(0, n), 1e-12);
  for (int n = 8000 + 256; n < 16000; ++n) ASSERT_NEAR(out.at(8, n), b.at(0, n), 1e-12);
}

}  // namespace
}  // namespace drn::baselines
