#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "drn/sim/convolve.h"
#include "drn/sim/dataset.h"
#include "drn/sim/geometry.h"
#include "drn/sim/ism.h"
#include "drn/sim/render.h"
#include "drn/sim/scene.h"
#include "drn/sim/signals.h"

namespace drn::sim {
namespace {

constexpr double kFs = 16000.0;

int PeakIndex(const std::vector<double>& h) {
  return static_cast<int>(std::max_element(h.begin(), h.end(),
                                           [](double a, double b) {
                                             return std::abs(a) < std::abs(b);
                                           }) -
                          h.begin());
}

// Sub-sample delay of a symmetric kernel from its low-frequency phase.
double PeakPosition(const std::vector<double>& h) {
  const double w = 2 * std::numbers::pi * 50.0 / 16000.0;
  double re = 0.0, im = 0.0;
  for (size_t n = 0; n < h.size(); ++n) {
    re += h[n] * std::cos(w * n);
    im -= h[n] * std::sin(w * n);
  }
  return -std::atan2(im, re) / w;
}

double Sum(const std::vector<double>& h) {
  double s = 0.0;
  for (double v : h) s += v;
  return s;
}

double Energy(const std::vector<double>& h) {
  double s = 0.0;
  for (double v : h) s += v * v;
  return s;
}

RoomSpec Room(double a = 0.25) { return {6.0, 5.0, 3.0, a}; }

TEST(Ism, ImageCountIsFullLattice) {
  EXPECT_EQ(ImageCount(0), 8u);
  EXPECT_EQ(ImageCount(6), 26u * 26u * 26u);
  const auto imgs = ImageSources(Room(), {1, 1, 1}, 2);
  EXPECT_EQ(imgs.size(), ImageCount(2));
  EXPECT_EQ(imgs.front().reflections, 0);
  EXPECT_EQ(imgs.front().position, (Vec3{1, 1, 1}));
}

TEST(Ism, OrderZeroDirectDelayOneMetre) {
  const Vec3 mic{3, 2.5, 1.5};
  const auto rir = ComputeRir(Room(), mic + Vec3{1, 0, 0}, mic, {0, kFs, 343.0});
  // 16000 / 343 = 46.647 samples.
  EXPECT_LE(std::abs(PeakIndex(rir.direct) - 47), 1);
  EXPECT_NEAR(PeakPosition(rir.direct), 46.647, 0.01);
}

TEST(Ism, RandomPairsDirectPeakWithinOneSample) {
  Rng rng(7);
  const RoomSpec room = Room();
  for (int i = 0; i < 100; ++i) {
    const Vec3 s{rng.Uniform(0.3, 5.7), rng.Uniform(0.3, 4.7), rng.Uniform(0.3, 2.7)};
    const Vec3 m{rng.Uniform(0.3, 5.7), rng.Uniform(0.3, 4.7), rng.Uniform(0.3, 2.7)};
    const auto rir = ComputeRir(room, s, m, {2, kFs, 343.0});
    const double delay = (s - m).Norm() * kFs / 343.0;
    EXPECT_LE(std::abs(PeakIndex(rir.direct) - std::lround(delay)), 1) << i;
  }
}

TEST(Ism, FullAbsorptionLeavesDirectPathOnly) {
  const auto rir = ComputeRir(Room(1.0), {1, 1, 1}, {4, 3, 2}, {6, kFs, 343.0});
  for (double v : rir.reverb) ASSERT_EQ(v, 0.0);
  EXPECT_GT(Energy(rir.direct), 0.0);
}

TEST(Ism, DoublingDistanceHalvesAmplitude) {
  const RoomSpec room{20, 20, 20, 0.25};
  const Vec3 m{5, 10, 10};
  const auto near = ComputeRir(room, m + Vec3{1, 0, 0}, m, {0, kFs, 343.0});
  const auto far = ComputeRir(room, m + Vec3{2, 0, 0}, m, {0, kFs, 343.0});
  EXPECT_NEAR(Sum(far.direct) / Sum(near.direct), 0.5, 0.005);
  EXPECT_NEAR(Sum(near.direct), 1.0 / (4 * std::numbers::pi), 0.01 / (4 * std::numbers::pi));
}

TEST(Ism, ReverbEnergyFallsWithAbsorption) {
  double prev = std::numeric_limits<double>::infinity();
  for (double a : {0.1, 0.2, 0.4, 0.7, 0.9}) {
    const auto rir = ComputeRir(Room(a), {1, 1, 1}, {4, 3, 2}, {4, kFs, 343.0});
    const double e = Energy(rir.reverb);
    EXPECT_LT(e, prev) << a;
    prev = e;
  }
}

TEST(Ism, OppositeMicTdoaMatchesGeometry) {
  const RoomSpec room{10, 10, 4, 0.3};
  ArrayGeometry array = ArrayGeometry::Circular(8, 0.1);
  array.center = {5, 5, 1.5};
  const auto mics = array.Positions();
  for (double angle : {0.0, 30.0, 60.0, 100.0}) {
    const Vec3 src = array.center + DirectionFromDoa(angle, 0.0) * 3.0;
    const auto rirs = ComputeRirs(room, src, mics, {0, kFs, 343.0});
    for (int c = 0; c < 4; ++c) {
      const double measured =
          PeakPosition(rirs[c + 4].direct) - PeakPosition(rirs[c].direct);
      const double mic_angle = 45.0 * c;
      // Far-field: 2 r cos(angle between source and mic direction) / c.
      const double expected = 2 * 0.1 *
                              std::cos((angle - mic_angle) * std::numbers::pi / 180) /
                              343.0 * kFs;
      EXPECT_NEAR(measured, expected, 1.0) << angle << " " << c;
      const double exact = ((src - mics[c + 4]).Norm() - (src - mics[c]).Norm()) / 343.0 * kFs;
      EXPECT_NEAR(measured, exact, 0.01);
    }
  }
}

TEST(Ism, OutsideRoomThrows) {
  EXPECT_THROW(ComputeRir(Room(), {7, 1, 1}, {1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(ComputeRir(Room(), {1, 1, 1}, {1, 1, -1}), std::invalid_argument);
}

TEST(Convolve, FftMatchesDirect) {
  Rng rng(3);
  std::vector<double> x(500), h(90);
  for (auto& v : x) v = rng.Normal();
  for (auto& v : h) v = rng.Normal();
  Convolver conv(x, 100);
  const auto a = conv.Apply(h, 520);
  const auto b = ConvolveDirect(x, h, 520);
  ASSERT_EQ(a.size(), 520u);
  for (size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-10);
  EXPECT_NEAR(b[3], x[3] * h[0] + x[2] * h[1] + x[1] * h[2] + x[0] * h[3], 1e-12);
}

TEST(Geometry, DoaFrame) {
  ArrayGeometry a = ArrayGeometry::Circular();
  a.center = {2, 2, 1};
  auto d = DoaOf(a.center + Vec3{1, 0, 0}, a);
  EXPECT_NEAR(d.azimuth_deg, 0.0, 1e-9);
  EXPECT_NEAR(d.elevation_deg, 0.0, 1e-9);
  EXPECT_NEAR(DoaOf(a.center + Vec3{0, 0, 2}, a).elevation_deg, 90.0, 1e-9);
  EXPECT_THROW(DoaOf(a.center, a), std::invalid_argument);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec3 s = a.center + Vec3{rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1)};
    ArrayGeometry r = a;
    r.yaw_deg = 30.0;
    const double before = DoaOf(s, a).azimuth_deg;
    const double after = DoaOf(s, r).azimuth_deg;
    EXPECT_NEAR(std::fmod(before - 30.0 + 720.0, 360.0), after, 1e-9);
  }
}

TEST(Schedule, TestModeExactSplit) {
  Rng rng(1);
  const auto s = MakeSwitchSchedule(2, 1, 160000, ScheduleMode::kTest, rng);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].sample, 0);
  EXPECT_EQ(s[1].sample, 80000);
  EXPECT_NE(s[0].talker, s[1].talker);
  EXPECT_EQ(ActiveTalker(s, 79999), s[0].talker);
  EXPECT_EQ(ActiveTalker(s, 80000), s[1].talker);
}

TEST(Schedule, NoSwitchSingleTalker) {
  Rng rng(2);
  const auto s = MakeSwitchSchedule(3, 0, 1000, ScheduleMode::kTrain, rng);
  ASSERT_EQ(s.size(), 1u);
  for (int n : {0, 500, 999}) EXPECT_EQ(ActiveTalker(s, n), s[0].talker);
}

TEST(Schedule, TrainJitterWithinFivePercent) {
  double lo = 1e9, hi = -1e9;
  for (uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    const auto s = MakeSwitchSchedule(2, 1, 160000, ScheduleMode::kTrain, rng);
    lo = std::min<double>(lo, s[1].sample);
    hi = std::max<double>(hi, s[1].sample);
  }
  EXPECT_GE(lo, 72000);
  EXPECT_LE(hi, 88000);
  EXPECT_LT(lo, 73000);
  EXPECT_GT(hi, 87000);
}

TEST(Schedule, DistinctTalkersAndErrors) {
  Rng rng(3);
  const auto s = MakeSwitchSchedule(5, 2, 64000, ScheduleMode::kTest, rng);
  EXPECT_EQ(s[1].sample, 21333);
  EXPECT_EQ(s[2].sample, 42667);
  EXPECT_NE(s[0].talker, s[1].talker);
  EXPECT_NE(s[1].talker, s[2].talker);
  EXPECT_NE(s[0].talker, s[2].talker);
  EXPECT_THROW(MakeSwitchSchedule(2, 2, 64000, ScheduleMode::kTest, rng),
               std::invalid_argument);
  EXPECT_THROW(MakeSwitchSchedule(2, -1, 64000, ScheduleMode::kTest, rng),
               std::invalid_argument);
}

TEST(Scene, DeterministicPerSeed) {
  SceneConfig cfg;
  const nlohmann::json a = SampleScene(42, cfg);
  const nlohmann::json b = SampleScene(42, cfg);
  const nlohmann::json c = SampleScene(43, cfg);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_NE(a.dump(), c.dump());
  EXPECT_EQ(nlohmann::json(a.get<SceneSpec>()).dump(), a.dump());
}

TEST(Scene, ThousandScenesSatisfyConstraints) {
  SceneConfig cfg;
  for (Split split : {Split::kTrain, Split::kTest}) {
    for (uint64_t seed = 0; seed < 1000; ++seed) {
      const auto s = SampleScene(seed, cfg, SceneMode::kStandard, split);
      const auto v = CheckSceneConstraints(s, cfg);
      ASSERT_TRUE(v.empty()) << seed << ": " << v.front();
    }
  }
}

TEST(Scene, ConstraintCheckerFlagsViolations) {
  SceneConfig cfg;
  auto s = SampleScene(1, cfg);
  s.targets[0] = s.array.center + Vec3{0.2, 0, 0};
  EXPECT_FALSE(CheckSceneConstraints(s, cfg).empty());
  s = SampleScene(1, cfg);
  s.sir_db = 11.0;
  EXPECT_FALSE(CheckSceneConstraints(s, cfg).empty());
}

TEST(Scene, InterfererPresenceRate) {
  SceneConfig cfg;
  int present = 0;
  for (uint64_t seed = 0; seed < 10000; ++seed) {
    present += SampleScene(seed, cfg).interferers_present;
  }
  EXPECT_NEAR(present / 10000.0, 0.75, 0.02);
}

TEST(Scene, ImpossibleRoomThrows) {
  SceneConfig cfg;
  cfg.room_length = cfg.room_width = cfg.room_height = {1.0, 1.0};
  cfg.target_distance = {2.0, 2.5};
  cfg.max_retries = 20;
  EXPECT_THROW(SampleScene(1, cfg), std::runtime_error);
}

TEST(Scene, Modes) {
  SceneConfig cfg;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const auto e = SampleScene(seed, cfg, SceneMode::kEasy, Split::kTest);
    EXPECT_EQ(e.targets.size(), 1u);
    EXPECT_TRUE(e.interferers.empty());
    const auto d = SampleScene(seed, cfg, SceneMode::kSwitchDemo, Split::kTest);
    EXPECT_EQ(d.targets.size(), 2u);
    EXPECT_EQ(d.n_switches, 1);
    EXPECT_EQ(d.room.absorption, 1.0);
    EXPECT_TRUE(CheckSceneConstraints(d, cfg).empty());
  }
}

TEST(Scene, ConfigJsonRejectsUnknownKeys) {
  SceneConfig cfg;
  cfg.snr_db = {0, 3};
  const nlohmann::json j = cfg;
  EXPECT_EQ(j.get<SceneConfig>(), cfg);
  nlohmann::json bad = j;
  bad["snr"] = 1;
  EXPECT_THROW(bad.get<SceneConfig>(), std::invalid_argument);
}

SceneConfig SmallConfig() {
  SceneConfig cfg;
  cfg.clip_seconds = 0.5;
  cfg.ism_order = 2;
  return cfg;
}

double PowerDb(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return 10 * std::log10(acc / x.size());
}

TEST(Mix, LevelsSirSnrAndIdentity) {
  const SceneConfig cfg = SmallConfig();
  SyntheticProvider provider;
  int unclamped = 0;
  for (uint64_t seed = 0; seed < 12; ++seed) {
    const auto s = SampleScene(seed, cfg);
    const auto b = RenderScene(s, provider, cfg);
    EXPECT_EQ(MixingResidual(b), 0.0);
    double ref_db = 1e9;
    for (size_t k = 0; k < s.targets.size(); ++k) {
      const double l = PowerDb(b.talker_direct[k].channel(0));
      EXPECT_NEAR(l, s.nominal_level_dbfs + s.target_level_db[k], 1e-9);
      ref_db = std::min(ref_db, l);
    }
    const double snr = ref_db - PowerDb(b.noise.channel(0));
    EXPECT_NEAR(snr, s.snr_db, 0.1);
    if (!s.interferers.empty()) {
      const double sir = ref_db - PowerDb(b.interference.channel(0));
      if (b.gains.interferer_clamped) {
        EXPECT_EQ(b.gains.interferer_scale, 1.0);
        EXPECT_GT(sir, s.sir_db);
      } else {
        ++unclamped;
        EXPECT_NEAR(sir, s.sir_db, 0.1);
      }
    }
    for (int n = 0; n < s.samples; ++n) {
      ASSERT_EQ(b.target.at(0, n),
                b.talker_direct[ActiveTalker(s.schedule, n)].at(0, n));
    }
  }
  EXPECT_GT(unclamped, 0);
}

TEST(Mix, ClampSetsScaleToOne) {
  SceneConfig cfg = SmallConfig();
  auto s = SampleScene(3, cfg);
  s.targets.resize(1);
  s.target_level_db = {2.5};
  s.schedule = {{0, 0}};
  s.n_switches = 0;
  s.interferers.resize(1, s.targets[0]);
  s.interferers[0] = s.array.center + Vec3{0.01, 0, 0};
  s.interferers_present = true;
  s.interferer_level_db = {-10.0};
  s.sir_db = 5.0;
  SourceImages img;
  const int C = s.array.channels();
  dsp::Waveform tone(C, s.samples, kFs);
  for (int c = 0; c < C; ++c) {
    for (int n = 0; n < s.samples; ++n) tone.at(c, n) = std::sin(0.01 * n * (c + 1));
  }
  img.target_direct = {tone};
  img.target_reverb = {dsp::Waveform(C, s.samples, kFs)};
  img.interferer = {tone};
  for (size_t i = 0; i < s.noises.size(); ++i) img.noise.push_back(tone);
  // The interferer at -10 dB sits only 12.5 dB under the target, so a 5 dB
  // SIR would need a gain above one.
  const auto b = ScaleAndMix(s, img);
  EXPECT_TRUE(b.gains.interferer_clamped);
  EXPECT_EQ(b.gains.interferer_scale, 1.0);
  EXPECT_NEAR(PowerDb(b.talker_direct[0].channel(0)) - PowerDb(b.interference.channel(0)),
              12.5, 1e-9);

  s.interferer_level_db = {-5.0};
  s.target_level_db = {-2.5};
  s.sir_db = 10.0;
  const auto u = ScaleAndMix(s, img);
  EXPECT_FALSE(u.gains.interferer_clamped);
  EXPECT_LT(u.gains.interferer_scale, 1.0);
}

TEST(Mix, SilentTargetThrows) {
  const SceneConfig cfg = SmallConfig();
  const auto s = SampleScene(2, SmallConfig(), SceneMode::kEasy);
  SyntheticProvider provider;
  auto img = RenderSourceImages(s, provider, cfg);
  for (auto& v : img.target_direct[0].data()) v = 0.0;
  EXPECT_THROW(ScaleAndMix(s, img), std::invalid_argument);
}

TEST(Mix, RenderIsPure) {
  const SceneConfig cfg = SmallConfig();
  const auto s = SampleScene(9, cfg);
  SyntheticProvider p1, p2;
  const auto a = RenderScene(s, p1, cfg);
  const auto b = RenderScene(s, p2, cfg);
  EXPECT_EQ(a.mixture.data(), b.mixture.data());
  EXPECT_EQ(a.target.data(), b.target.data());
}

TEST(Mix, DoaTrackFollowsSchedule) {
  SceneConfig cfg = SmallConfig();
  const auto s = SampleScene(4, cfg, SceneMode::kSwitchDemo, Split::kTest);
  const auto t = BuildDoaTrack(s, 16);
  EXPECT_EQ(t.frames(), 500);
  const auto doas = s.TargetDoas();
  const int sw = s.schedule[1].sample;
  EXPECT_EQ(sw, 4000);
  EXPECT_EQ(t.azimuth_deg[249], doas[s.schedule[0].talker].azimuth_deg);
  EXPECT_EQ(t.azimuth_deg[250], doas[s.schedule[1].talker].azimuth_deg);
}

TEST(Jitter, BoundedAndMeanRecovered) {
  model::DoaTrack truth;
  truth.azimuth_deg.assign(100000, 359.0);
  truth.elevation_deg.assign(100000, 10.0);
  Rng rng(11);
  Doa mu;
  const auto j = JitterDoa(truth, rng, {}, &mu);
  double sum_az = 0.0, sum_el = 0.0;
  for (int i = 0; i < truth.frames(); ++i) {
    double daz = j.azimuth_deg[i] - truth.azimuth_deg[i];
    daz = std::remainder(daz, 360.0);
    const double del = j.elevation_deg[i] - truth.elevation_deg[i];
    ASSERT_LE(std::abs(daz), 5.0);
    ASSERT_LE(std::abs(del), 5.0);
    ASSERT_GE(j.azimuth_deg[i], 0.0);
    ASSERT_LT(j.azimuth_deg[i], 360.0);
    sum_az += daz;
    sum_el += del;
  }
  EXPECT_NEAR(sum_az / truth.frames(), mu.azimuth_deg, 0.1);
  EXPECT_NEAR(sum_el / truth.frames(), mu.elevation_deg, 0.1);
}

TEST(Jitter, ZeroWidthIsIdentity) {
  model::DoaTrack truth{{10, 20, 30}, {0, -5, 5}};
  Rng rng(1);
  const auto j = JitterDoa(truth, rng, {0.0, 0.0});
  EXPECT_EQ(j.azimuth_deg, truth.azimuth_deg);
  EXPECT_EQ(j.elevation_deg, truth.elevation_deg);
}

TEST(Signals, SyntheticSpeechUnitRmsAndModulated) {
  Rng rng(4);
  const auto x = SyntheticSpeech(rng, 32000);
  EXPECT_NEAR(Rms(x), 1.0, 1e-9);
  // Envelope varies: 20 ms block energies spread over more than 10 dB.
  double lo = 1e9, hi = 0;
  for (int b = 0; b + 320 <= 32000; b += 320) {
    const double e = Rms(std::span<const double>(x).subspan(b, 320));
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  EXPECT_GT(20 * std::log10(hi / lo), 10.0);
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Dataset, GenerateLoadAndWorkerInvariance) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "drn_sim_dataset_test";
  fs::remove_all(root);
  const SceneConfig cfg = SmallConfig();
  GenerateOptions opt;
  opt.split = Split::kTest;
  opt.count = 3;
  opt.seed = 5;
  opt.out_dir = (root / "a").string();
  const auto recs = GenerateSplit(cfg, opt);
  opt.out_dir = (root / "b").string();
  opt.workers = 2;
  GenerateSplit(cfg, opt);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(Slurp(root / "a" / "test.jsonl"), Slurp(root / "b" / "test.jsonl"));
  EXPECT_EQ(Slurp(root / "a" / recs[2].mixture), Slurp(root / "b" / recs[2].mixture));

  const auto back = ReadManifest((root / "a" / "test.jsonl").string());
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].id, "test_00001");
  const auto u = LoadUtterance(back[1], (root / "a").string());
  EXPECT_EQ(u.mixture.channels(), 8);
  EXPECT_EQ(u.mixture.samples(), 8000);
  EXPECT_EQ(u.mixture.sample_rate(), 16000.0);
  EXPECT_EQ(u.doa.frames(), 500);
  EXPECT_EQ(u.scene.seed, back[1].seed);
  SyntheticProvider provider;
  const auto b = RenderScene(u.scene, provider, cfg);
  for (int n = 0; n < 8000; n += 97) {
    EXPECT_EQ(static_cast<float>(b.mixture.at(3, n)), u.mixture.at(3, n));
    EXPECT_EQ(static_cast<float>(b.target.at(0, n)), u.target.at(0, n));
  }
  for (int i = 1; i < static_cast<int>(u.scene.schedule.size()); ++i) {
    EXPECT_EQ(u.scene.schedule[i].sample, std::lround(i * 8000.0 / (u.scene.n_switches + 1)));
  }
  fs::remove(root / "a" / back[0].target);
  EXPECT_THROW(LoadUtterance(back[0], (root / "a").string()), std::runtime_error);
  fs::remove_all(root);
}

}  // namespace
}  // namespace drn::sim
