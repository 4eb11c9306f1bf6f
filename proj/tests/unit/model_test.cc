#include <gtest/gtest.h>

#include <cmath>

#include "drn/ad/gradcheck.h"
#include "drn/model/config.h"
#include "drn/model/doa.h"
#include "drn/model/drn.h"
#include "drn/util/rng.h"

namespace drn::model {
namespace {

dsp::Waveform Noise(int channels, int samples, uint64_t seed) {
  Rng rng(seed);
  dsp::Waveform w(channels, samples);
  for (auto& v : w.data()) v = rng.Uniform(-0.5, 0.5);
  return w;
}

DoaStream RandomDoa(int frames, const DoaGrid& grid, uint64_t seed) {
  Rng rng(seed);
  DoaStream s;
  for (int t = 0; t < frames; ++t) {
    s.azimuth.push_back(rng.UniformInt(0, grid.azimuth_bins - 1));
    s.elevation.push_back(rng.UniformInt(0, grid.elevation_bins - 1));
  }
  return s;
}

DrnConfig Small(int R = 16, int iW = 64, int oW = 32) {
  DrnConfig c;
  c.channels = 3;
  c.shift = R;
  c.input_window = iW;
  c.output_window = oW;
  c.hidden = 12;
  c.channel_embed = 6;
  c.frame_embed = 8;
  c.lstm_layers = 2;
  c.grid = DoaGrid::FromResolution(15.0, 15.0);
  return c;
}

TEST(DoaTest, AzimuthIndexing) {
  DoaGrid g;
  EXPECT_EQ(g.AzimuthIndex(0.0), 0);
  EXPECT_EQ(g.AzimuthIndex(357.5), 143);
  EXPECT_EQ(g.AzimuthIndex(360.0), 0);
  EXPECT_EQ(g.AzimuthIndex(-2.5), 143);
  EXPECT_EQ(g.ElevationIndex(-90.0), 0);
  EXPECT_EQ(g.ElevationIndex(90.0), 71);
  EXPECT_EQ(g.ElevationIndex(0.0), 36);
  EXPECT_DOUBLE_EQ(g.azimuth_resolution() * g.azimuth_bins, 360.0);
}

TEST(DoaTest, EncodeOneHot) {
  DoaGrid g;
  auto s = DoaStream::Constant(3, 5, 7);
  auto oh = EncodeDoa(s, g);
  for (int t = 0; t < 3; ++t) {
    double sa = 0, se = 0;
    for (int k = 0; k < 144; ++k) sa += oh.azimuth[t * 144 + k];
    for (int k = 0; k < 72; ++k) se += oh.elevation[t * 72 + k];
    EXPECT_EQ(sa, 1.0);
    EXPECT_EQ(se, 1.0);
    EXPECT_EQ(oh.azimuth[t * 144 + 5], 1.0);
  }
  s.azimuth[1] = 144;
  EXPECT_THROW(EncodeDoa(s, g), std::invalid_argument);
}

TEST(DoaTest, TrackResampleAndCsv) {
  DoaTrack tr;
  for (int i = 0; i < 20; ++i) {
    tr.azimuth_deg.push_back(i * 10.0);
    tr.elevation_deg.push_back(0.0);
  }
  auto r = tr.Resample(16, 32, 5);
  ASSERT_EQ(r.frames(), 5);
  EXPECT_EQ(r.azimuth_deg[3], 60.0);
  const std::string path = testing::TempDir() + "/doa.csv";
  WriteDoaCsv(path, tr);
  auto back = ReadDoaCsv(path);
  EXPECT_EQ(back.azimuth_deg, tr.azimuth_deg);
}

TEST(ConfigTest, JsonRoundTripAndUnknownKeys) {
  auto c = DrnConfig::Latency16ms();
  c.domain = Domain::kFrequency;
  c.embedding = EmbeddingMode::kAzimuth;
  nlohmann::json j = c;
  EXPECT_EQ(j.get<DrnConfig>(), c);
  j["bogus"] = 1;
  EXPECT_THROW(j.get<DrnConfig>(), std::invalid_argument);
  auto bad = DrnConfig{};
  bad.output_window = 8;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(ConfigTest, FeatureWidths) {
  auto c = DrnConfig::LowLatency2ms();
  EXPECT_EQ(c.input_features(), 64);
  c.domain = Domain::kFrequency;
  EXPECT_EQ(c.input_features(), 66);
  EXPECT_EQ(c.output_features(), 34);
}

TEST(DrnModelTest, ParameterNamesPerPath) {
  auto c = Small();
  DrnModel<float> both(c);
  EXPECT_TRUE(both.params().Contains("chan_emb.2.el.weight"));
  EXPECT_TRUE(both.params().Contains("frame_emb.proj.1.norm.gamma"));
  EXPECT_FALSE(both.params().Contains("output.bias"));
  c.fusion = FusionMode::kNone;
  DrnModel<float> none(c);
  EXPECT_FALSE(none.params().Contains("chan_emb.proj.weight"));
  EXPECT_FALSE(none.params().Contains("frame_emb.az.weight"));
  c.fusion = FusionMode::kBoth;
  c.embedding = EmbeddingMode::kAzimuth;
  DrnModel<float> a(c);
  EXPECT_FALSE(a.params().Contains("chan_emb.0.el.weight"));
  EXPECT_FALSE(a.params().Contains("frame_emb.el.weight"));
}

TEST(DrnModelTest, InitializationConventions) {
  DrnModel<double> m(Small());
  m.Initialize(3);
  const auto& b = m.params().Get("lstm.0.bias").value();
  for (int j = 12; j < 24; ++j) EXPECT_EQ(b[j], 1.0);
  for (double g : m.params().Get("spatial.norm.gamma").value()) EXPECT_EQ(g, 1.0);
  for (double a : m.params().Get("input.prelu").value()) EXPECT_EQ(a, 0.25);
  const double bound = 1.0 / std::sqrt(64.0);
  for (double w : m.params().Get("input.weight").value()) {
    EXPECT_LE(std::abs(w), bound);
  }
  DrnModel<double> m2(Small());
  m2.Initialize(3);
  EXPECT_EQ(m.params().Get("output.weight").value(),
            m2.params().Get("output.weight").value());
}

// Zeroes every additive offset on the signal path (biases and layer-norm
// betas outside the DOA embeddings).
template <typename T>
void ZeroSignalOffsets(DrnModel<T>& m) {
  for (int i = 0; i < m.params().count(); ++i) {
    auto& p = m.params()[i];
    const auto& n = p.name();
    const bool offset = n.ends_with(".bias") || n.ends_with(".beta");
    const bool embedding = n.rfind("chan_emb.", 0) == 0 || n.rfind("frame_emb.", 0) == 0;
    if (offset && !embedding) std::fill(p.value().begin(), p.value().end(), T(0));
  }
}

TEST(DrnModelTest, ZeroInputZeroOutput) {
  for (auto domain : {Domain::kTime, Domain::kFrequency}) {
    auto c = Small();
    c.domain = domain;
    DrnModel<float> m(c);
    ZeroSignalOffsets(m);
    auto y = m.ForwardUtterance(dsp::Waveform(3, 320),
                                RandomDoa(20, c.grid, 1));
    ASSERT_EQ(y.samples(), 320);
    for (double v : y.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(DrnModelTest, DoaLengthAndChannelMismatchThrow) {
  DrnModel<float> m(Small());
  EXPECT_THROW(m.ForwardUtterance(Noise(3, 320, 1), RandomDoa(19, m.config().grid, 1)),
               std::invalid_argument);
  EXPECT_THROW(m.ForwardUtterance(Noise(2, 320, 1), RandomDoa(20, m.config().grid, 1)),
               std::invalid_argument);
  auto state = DrnState<float>::Zeros(Small(16, 64, 16));
  EXPECT_THROW(m.ForwardStreaming(Noise(3, 32, 1), RandomDoa(2, m.config().grid, 1), state),
               std::invalid_argument);
}

// Largest (last input sample that changes output n) - n + 1.
int MeasureLatency(const DrnModel<double>& m, int samples) {
  const auto& c = m.config();
  auto x = Noise(c.channels, samples, 5);
  auto doa = RandomDoa(c.NumFrames(samples), c.grid, 6);
  const auto base = m.ForwardUtterance(x, doa);
  int latency = 0;
  for (int pos = c.output_window; pos < samples - c.output_window;
       pos += std::max(1, c.shift / 4) + 1) {
    auto xp = x;
    xp.at(1, pos) += 0.25;
    const auto y = m.ForwardUtterance(xp, doa);
    int first = -1;
    for (int n = 0; n < y.samples(); ++n) {
      if (y.at(0, n) != base.at(0, n)) {
        first = n;
        break;
      }
    }
    if (first < 0) continue;
    latency = std::max(latency, pos - first + 1);
  }
  return latency;
}

TEST(DrnModelTest, LatencyEqualsOutputWindow) {
  {
    DrnModel<double> m(Small(16, 64, 32));
    EXPECT_EQ(MeasureLatency(m, 480), 32);
  }
  {
    auto c = Small(128, 256, 256);
    DrnModel<double> m(c);
    EXPECT_EQ(MeasureLatency(m, 2048), 256);
  }
  {
    auto c = Small(16, 48, 16);
    c.domain = Domain::kFrequency;
    DrnModel<double> m(c);
    EXPECT_EQ(MeasureLatency(m, 320), 16);
  }
}

void ExpectStreamingMatchesBatch(const DrnConfig& c, int samples,
                                 std::vector<int> chunk_frames) {
  DrnModel<float> m(c);
  m.Initialize(11);
  auto x = Noise(c.channels, samples, 7);
  const int T = c.NumFrames(samples);
  ASSERT_EQ(T * c.shift, samples);
  auto doa = RandomDoa(T, c.grid, 8);
  const auto batch = m.ForwardUtterance(x, doa);
  auto state = DrnState<float>::Zeros(c);
  std::vector<double> stream;
  int t = 0, k = 0;
  while (t < T) {
    const int n = std::min(chunk_frames[k++ % chunk_frames.size()], T - t);
    auto out = m.ForwardStreaming(x.Slice(t * c.shift, n * c.shift),
                                  doa.Slice(t, n), state);
    stream.insert(stream.end(), out.data().begin(), out.data().end());
    t += n;
  }
  auto tail = m.Flush(state);
  stream.insert(stream.end(), tail.data().begin(), tail.data().end());
  const int lag = c.output_window - c.shift;
  double err = 0.0;
  for (int n = 0; n < samples; ++n) {
    err = std::max(err, std::abs(stream[n + lag] - batch.at(0, n)));
  }
  EXPECT_LT(err, 1e-5);
}

TEST(DrnModelTest, StreamingEquivalence) {
  ExpectStreamingMatchesBatch(Small(), 800, {1, 3, 7, 2});
  ExpectStreamingMatchesBatch(Small(128, 256, 256), 2560, {1, 4});
  auto f = Small();
  f.domain = Domain::kFrequency;
  ExpectStreamingMatchesBatch(f, 640, {5, 1});
  auto r = Small(16, 32, 16);
  r.fusion = FusionMode::kChannelwise;
  ExpectStreamingMatchesBatch(r, 320, {2});
}

TEST(DrnModelTest, StreamingZeroChunkZeroState) {
  DrnModel<float> m(Small());
  ZeroSignalOffsets(m);
  auto state = DrnState<float>::Zeros(m.config());
  auto y = m.ForwardStreaming(dsp::Waveform(3, 64),
                              RandomDoa(4, m.config().grid, 1), state);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(DrnModelTest, StateSerializationRoundTrip) {
  DrnModel<float> m(Small());
  auto state = DrnState<float>::Zeros(m.config());
  auto doa = RandomDoa(10, m.config().grid, 2);
  m.ForwardStreaming(Noise(3, 80, 3), doa.Slice(0, 5), state);
  auto restored = DrnState<float>::Deserialize(state.Serialize());
  EXPECT_EQ(restored, state);
  auto a = m.ForwardStreaming(Noise(3, 80, 4), doa.Slice(5, 5), state);
  auto b = m.ForwardStreaming(Noise(3, 80, 4), doa.Slice(5, 5), restored);
  EXPECT_EQ(a.data(), b.data());
  EXPECT_EQ(restored, state);
  auto bytes = state.Serialize();
  bytes.pop_back();
  EXPECT_THROW(DrnState<float>::Deserialize(bytes), std::runtime_error);
  EXPECT_THROW(DrnState<double>::Deserialize(state.Serialize()),
               std::runtime_error);
  restored.Reset();
  EXPECT_EQ(restored, DrnState<float>::Zeros(m.config()));
}

TEST(DrnModelTest, AzimuthModeIgnoresElevation) {
  auto c = Small();
  c.embedding = EmbeddingMode::kAzimuth;
  DrnModel<double> m(c);
  auto x = Noise(3, 320, 9);
  auto d1 = RandomDoa(20, c.grid, 10);
  auto d2 = d1;
  for (auto& e : d2.elevation) e = (e + 3) % c.grid.elevation_bins;
  EXPECT_EQ(m.ForwardUtterance(x, d1).data(), m.ForwardUtterance(x, d2).data());
}

TEST(DrnModelTest, DoaSensitivity) {
  auto c = Small();
  DrnModel<double> m(c);
  auto x = Noise(3, 320, 9);
  auto d1 = RandomDoa(20, c.grid, 10);
  auto d2 = RandomDoa(20, c.grid, 11);
  double diff = 0.0;
  auto y1 = m.ForwardUtterance(x, d1), y2 = m.ForwardUtterance(x, d2);
  for (int n = 0; n < 320; ++n) diff += std::pow(y1.at(0, n) - y2.at(0, n), 2);
  EXPECT_GT(diff, 0.0);
  // Zeroed one-hot weights remove every DOA dependency.
  for (int i = 0; i < m.params().count(); ++i) {
    auto& p = m.params()[i];
    const auto& n = p.name();
    const bool emb = n.find(".az.weight") != std::string::npos ||
                     n.find(".el.weight") != std::string::npos;
    if (emb) std::fill(p.value().begin(), p.value().end(), 0.0);
  }
  EXPECT_EQ(m.ForwardUtterance(x, d1).data(), m.ForwardUtterance(x, d2).data());
}

TEST(EmbeddingTest, ChannelwiseZeroWeightsGiveZeros) {
  DrnModel<double> m(Small());
  for (int i = 0; i < m.params().count(); ++i) {
    auto& p = m.params()[i];
    if (p.name().rfind("chan_emb.", 0) == 0 &&
        p.name().find(".gamma") == std::string::npos) {
      std::fill(p.value().begin(), p.value().end(), 0.0);
    }
  }
  ad::Graph<double> g;
  auto e = m.ChannelwiseEmbedding(g, RandomDoa(5, m.config().grid, 1));
  ASSERT_EQ(static_cast<int>(e.size()), 3);
  for (const auto& t : e) {
    EXPECT_EQ(t.rows(), 5);
    EXPECT_EQ(t.cols(), 6);
    for (double v : t.value()) EXPECT_EQ(v, 0.0);
  }
}

TEST(EmbeddingTest, ChannelwiseDistinctPerChannelAndPointwise) {
  DrnModel<double> m(Small());
  ad::Graph<double> g;
  auto doa = DoaStream::Constant(2, 4, 2);
  auto e = m.ChannelwiseEmbedding(g, doa);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(e[0].value()[k], e[0].value()[6 + k]);
  bool differs = false;
  for (int k = 0; k < 6; ++k) differs |= e[0].value()[k] != e[1].value()[k];
  EXPECT_TRUE(differs);
}

TEST(EmbeddingTest, FramewisePermutationEquivariant) {
  DrnModel<double> m(Small());
  auto doa = RandomDoa(6, m.config().grid, 4);
  const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  DoaStream p;
  for (int i : perm) {
    p.azimuth.push_back(doa.azimuth[i]);
    p.elevation.push_back(doa.elevation[i]);
  }
  ad::Graph<double> g;
  auto a = m.FramewiseEmbedding(g, doa);
  auto b = m.FramewiseEmbedding(g, p);
  const int E = a.cols();
  for (int r = 0; r < 6; ++r) {
    for (int k = 0; k < E; ++k) {
      EXPECT_EQ(b.value()[r * E + k], a.value()[perm[r] * E + k]);
    }
  }
}

TEST(EmbeddingTest, FramewiseZeroWeightsAndModeA) {
  auto c = Small();
  c.embedding = EmbeddingMode::kAzimuth;
  DrnModel<double> m(c);
  ad::Graph<double> g;
  auto d1 = RandomDoa(4, c.grid, 5);
  auto d2 = d1;
  for (auto& e : d2.elevation) e = (e + 1) % c.grid.elevation_bins;
  auto a = m.FramewiseEmbedding(g, d1);
  auto b = m.FramewiseEmbedding(g, d2);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.value()[i], b.value()[i]);
  for (int i = 0; i < m.params().count(); ++i) {
    auto& p = m.params()[i];
    if (p.name().rfind("frame_emb.", 0) == 0 &&
        p.name().find(".gamma") == std::string::npos) {
      std::fill(p.value().begin(), p.value().end(), 0.0);
    }
  }
  auto z = m.FramewiseEmbedding(g, d1);
  for (double v : z.value()) EXPECT_EQ(v, 0.0);
}

TEST(DrnModelTest, MicroModelGradcheck) {
  DrnConfig c;
  c.channels = 2;
  c.shift = 4;
  c.input_window = 8;
  c.output_window = 8;
  c.hidden = 8;
  c.channel_embed = 4;
  c.frame_embed = 4;
  c.lstm_layers = 2;
  c.grid = DoaGrid::FromResolution(45.0, 45.0);
  for (auto domain : {Domain::kTime, Domain::kFrequency}) {
    c.domain = domain;
    DrnModel<double> m(c);
    m.Initialize(21);
    auto x = Noise(2, 16, 22);
    auto doa = RandomDoa(4, c.grid, 23);
    auto report = ad::CheckParameterGradients(m.params(), [&](ad::Graph<double>& g) {
      auto state = DrnState<double>::Zeros(c);
      auto y = m.BuildFrames(g, x, 0, 4, doa, state);
      return ad::Sum(ad::Mul(y, y));
    });
    EXPECT_TRUE(report.Passed(1e-3))
        << report.worst.name << "[" << report.worst.index
        << "] rel=" << report.max_rel_error;
  }
}

TEST(DftMatrixTest, MatchesRoundTrip) {
  const int n = 8;
  auto f = RealDftMatrix(n);
  auto inv = InverseRealDftMatrix(n);
  const int F = 2 * (n / 2 + 1);
  Rng rng(1);
  std::vector<double> x(n), X(F, 0.0), y(n, 0.0);
  for (auto& v : x) v = rng.Uniform(-1, 1);
  for (int k = 0; k < F; ++k)
    for (int j = 0; j < n; ++j) X[k] += f[k * n + j] * x[j];
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < F; ++k) y[j] += inv[j * F + k] * X[k];
  for (int j = 0; j < n; ++j) EXPECT_NEAR(y[j], x[j], 1e-12);
}

}  // namespace
}  // namespace drn::model
