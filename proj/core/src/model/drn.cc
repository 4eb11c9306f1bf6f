#include "drn/model/drn.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "drn/util/rng.h"

namespace drn::model {

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename V>
void Put(std::string& out, const V& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
void PutVector(std::string& out, const std::vector<V>& v) {
  Put<uint64_t>(out, v.size());
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(V));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename V>
  V Get() {
    V v;
    Take(&v, sizeof(V));
    return v;
  }

  template <typename V>
  std::vector<V> GetVector() {
    const auto n = Get<uint64_t>();
    if (n > bytes_.size()) throw std::runtime_error("DrnState: corrupt size");
    std::vector<V> v(n);
    Take(v.data(), n * sizeof(V));
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Take(void* dst, size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw std::runtime_error("DrnState: truncated data");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

constexpr uint32_t kStateMagic = 0x534e5244;  // "DRNS"

bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<double> RealDftMatrix(int n) {
  Require(n >= 2 && n % 2 == 0, "RealDftMatrix: size must be even");
  const int bins = n / 2 + 1;
  std::vector<double> m(static_cast<size_t>(2 * bins) * n);
  for (int k = 0; k < bins; ++k) {
    for (int j = 0; j < n; ++j) {
      const double phase = 2.0 * std::numbers::pi * ((int64_t{k} * j) % n) / n;
      m[static_cast<size_t>(k) * n + j] = std::cos(phase);
      m[static_cast<size_t>(bins + k) * n + j] = -std::sin(phase);
    }
  }
  return m;
}

std::vector<double> InverseRealDftMatrix(int n) {
  Require(n >= 2 && n % 2 == 0, "InverseRealDftMatrix: size must be even");
  const int bins = n / 2 + 1;
  const int cols = 2 * bins;
  std::vector<double> m(static_cast<size_t>(n) * cols, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < bins; ++k) {
      const double phase = 2.0 * std::numbers::pi * ((int64_t{k} * j) % n) / n;
      const bool edge = k == 0 || k == n / 2;
      const double scale = (edge ? 1.0 : 2.0) / n;
      m[static_cast<size_t>(j) * cols + k] = scale * std::cos(phase);
      m[static_cast<size_t>(j) * cols + bins + k] =
          edge ? 0.0 : -scale * std::sin(phase);
    }
  }
  return m;
}

// ------------------------------------------------------------------ state

template <typename T>
DrnState<T> DrnState<T>::Zeros(const DrnConfig& config) {
  config.Validate();
  DrnState s;
  s.channels = config.channels;
  s.history.assign(
      static_cast<size_t>(config.channels) *
          (config.input_window - config.shift),
      T(0));
  s.lstm.assign(config.lstm_layers, ad::LstmState<T>::Zeros(config.hidden));
  s.carry.assign(config.output_window - config.shift, T(0));
  return s;
}

template <typename T>
void DrnState<T>::Reset() {
  std::fill(history.begin(), history.end(), T(0));
  for (auto& l : lstm) {
    std::fill(l.h.begin(), l.h.end(), T(0));
    std::fill(l.c.begin(), l.c.end(), T(0));
  }
  std::fill(carry.begin(), carry.end(), T(0));
  frames = 0;
}

template <typename T>
void DrnState<T>::CheckCompatible(const DrnConfig& config) const {
  bool ok = channels == config.channels &&
            history.size() == static_cast<size_t>(config.channels) *
                                  (config.input_window - config.shift) &&
            static_cast<int>(lstm.size()) == config.lstm_layers &&
            carry.size() ==
                static_cast<size_t>(config.output_window - config.shift);
  for (const auto& l : lstm) {
    ok = ok && static_cast<int>(l.h.size()) == config.hidden &&
         static_cast<int>(l.c.size()) == config.hidden;
  }
  Require(ok, "DrnState does not match the model configuration");
}

template <typename T>
std::string DrnState<T>::Serialize() const {
  std::string out;
  Put<uint32_t>(out, kStateMagic);
  Put<uint32_t>(out, sizeof(T));
  Put<int32_t>(out, channels);
  Put<int64_t>(out, frames);
  PutVector(out, history);
  Put<uint32_t>(out, static_cast<uint32_t>(lstm.size()));
  for (const auto& l : lstm) {
    PutVector(out, l.h);
    PutVector(out, l.c);
  }
  PutVector(out, carry);
  return out;
}

template <typename T>
DrnState<T> DrnState<T>::Deserialize(const std::string& bytes) {
  Reader in(bytes);
  if (in.Get<uint32_t>() != kStateMagic) {
    throw std::runtime_error("DrnState: bad magic");
  }
  if (in.Get<uint32_t>() != sizeof(T)) {
    throw std::runtime_error("DrnState: scalar type mismatch");
  }
  DrnState s;
  s.channels = in.Get<int32_t>();
  s.frames = in.Get<int64_t>();
  s.history = in.GetVector<T>();
  const auto layers = in.Get<uint32_t>();
  if (layers > bytes.size()) throw std::runtime_error("DrnState: corrupt");
  s.lstm.resize(layers);
  for (auto& l : s.lstm) {
    l.h = in.GetVector<T>();
    l.c = in.GetVector<T>();
  }
  s.carry = in.GetVector<T>();
  if (!in.done()) throw std::runtime_error("DrnState: trailing bytes");
  return s;
}

template <typename T>
bool DrnState<T>::operator==(const DrnState& o) const {
  if (channels != o.channels || frames != o.frames || history != o.history ||
      carry != o.carry || lstm.size() != o.lstm.size()) {
    return false;
  }
  for (size_t i = 0; i < lstm.size(); ++i) {
    if (lstm[i].h != o.lstm[i].h || lstm[i].c != o.lstm[i].c) return false;
  }
  return true;
}

// ------------------------------------------------------------------ model

template <typename T>
DrnModel<T>::DrnModel(DrnConfig config) : config_(std::move(config)) {
  config_.Validate();
  const int C = config_.channels;
  const int H = config_.hidden;
  const int Ec = config_.channel_embed;
  const int Ef = config_.frame_embed;
  const int Da = config_.grid.azimuth_bins;
  const int De = config_.grid.elevation_bins;

  AddDense("input", H, config_.input_features());
  AddNorm("input.norm", H);
  AddPRelu("input", H);

  if (config_.uses_channelwise()) {
    for (int c = 0; c < C; ++c) {
      const std::string p = "chan_emb." + std::to_string(c);
      AddDense(p + ".az", Ec, Da);
      AddNorm(p + ".az.norm", Ec);
      AddPRelu(p + ".az", Ec);
      if (config_.uses_elevation()) {
        AddDense(p + ".el", Ec, De);
        AddNorm(p + ".el.norm", Ec);
        AddPRelu(p + ".el", Ec);
      }
      AddNorm(p + ".norm", Ec);
    }
    AddDense("chan_emb.proj", H, Ec);
    AddNorm("chan_emb.proj.norm", H);
  }

  AddDense("spatial", H, C * H);
  AddNorm("spatial.norm", H);
  AddPRelu("spatial", H);

  if (config_.uses_framewise()) {
    AddDense("frame_emb.az", Ef, Da);
    AddNorm("frame_emb.az.norm", Ef);
    AddPRelu("frame_emb.az", Ef);
    if (config_.uses_elevation()) {
      AddDense("frame_emb.el", Ef, De);
      AddNorm("frame_emb.el.norm", Ef);
      AddPRelu("frame_emb.el", Ef);
    }
    AddNorm("frame_emb.norm", Ef);
    for (int i = 0; i < config_.framewise_fusions(); ++i) {
      const std::string fc = "frame_emb.fc." + std::to_string(i);
      AddDense(fc, Ef, Ef);
      AddNorm(fc + ".norm", Ef);
      AddPRelu(fc, Ef);
      const std::string proj = "frame_emb.proj." + std::to_string(i);
      AddDense(proj, H, Ef);
      AddNorm(proj + ".norm", H);
    }
  }

  for (int l = 0; l < config_.lstm_layers; ++l) {
    const std::string p = "lstm." + std::to_string(l);
    params_.Add(p + ".w_ih", {4 * H, H});
    params_.Add(p + ".w_hh", {4 * H, H});
    params_.Add(p + ".bias", {4 * H});
  }
  AddDense("output", config_.output_features(), H, /*bias=*/false);

  if (config_.domain == Domain::kFrequency) {
    const auto dft = RealDftMatrix(config_.input_window);
    input_dft_.assign(dft.begin(), dft.end());
    const auto idft = InverseRealDftMatrix(config_.output_window);
    output_idft_.assign(idft.begin(), idft.end());
  }
  synthesis_ = config_.OutputWindows().synthesis;
  Initialize(0);
}

template <typename T>
void DrnModel<T>::AddDense(const std::string& prefix, int out, int in,
                           bool bias) {
  params_.Add(prefix + ".weight", {out, in});
  if (bias) params_.Add(prefix + ".bias", {out});
}

template <typename T>
void DrnModel<T>::AddNorm(const std::string& prefix, int dim) {
  params_.Add(prefix + ".gamma", {dim});
  params_.Add(prefix + ".beta", {dim});
}

template <typename T>
void DrnModel<T>::AddPRelu(const std::string& prefix, int dim) {
  params_.Add(prefix + ".prelu", {dim});
}

template <typename T>
void DrnModel<T>::Initialize(uint64_t seed) {
  Rng rng = Rng::ForStream(seed, 0x1417);
  const int H = config_.hidden;
  for (int i = 0; i < params_.count(); ++i) {
    auto& p = params_[i];
    const std::string& name = p.name();
    auto& v = p.value();
    std::fill(p.grad().begin(), p.grad().end(), T(0));
    if (EndsWith(name, ".gamma")) {
      std::fill(v.begin(), v.end(), T(1));
    } else if (EndsWith(name, ".beta")) {
      std::fill(v.begin(), v.end(), T(0));
    } else if (EndsWith(name, ".prelu")) {
      std::fill(v.begin(), v.end(), T(0.25));
    } else {
      int fan_in = H;
      if (EndsWith(name, ".weight")) {
        fan_in = p.shape()[1];
      } else if (EndsWith(name, ".bias") && name.rfind("lstm.", 0) != 0) {
        const std::string w = name.substr(0, name.size() - 5) + ".weight";
        fan_in = params_.Get(w).shape()[1];
      }
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (auto& x : v) x = static_cast<T>(rng.Uniform(-bound, bound));
      if (name.rfind("lstm.", 0) == 0 && EndsWith(name, ".bias")) {
        for (int j = H; j < 2 * H; ++j) v[j] = T(1);
      }
    }
  }
}

template <typename T>
ad::Tensor<T> DrnModel<T>::P(ad::Graph<T>& graph,
                             const std::string& name) const {
  return graph.Param(params_.Get(name));
}

template <typename T>
ad::Tensor<T> DrnModel<T>::Dense(ad::Graph<T>& graph, const ad::Tensor<T>& x,
                                 const std::string& prefix) const {
  const std::string bias = prefix + ".bias";
  if (params_.Contains(bias)) {
    return ad::Linear(x, P(graph, prefix + ".weight"), P(graph, bias));
  }
  return ad::Linear(x, P(graph, prefix + ".weight"));
}

template <typename T>
ad::Tensor<T> DrnModel<T>::Norm(ad::Graph<T>& graph, const ad::Tensor<T>& x,
                                const std::string& prefix) const {
  return ad::LayerNorm(x, P(graph, prefix + ".gamma"),
                       P(graph, prefix + ".beta"));
}

template <typename T>
ad::Tensor<T> DrnModel<T>::DenseNormPRelu(ad::Graph<T>& graph,
                                          const ad::Tensor<T>& x,
                                          const std::string& prefix) const {
  auto y = Norm(graph, Dense(graph, x, prefix), prefix + ".norm");
  return ad::PRelu(y, P(graph, prefix + ".prelu"));
}

template <typename T>
ad::Tensor<T> DrnModel<T>::EmbedOneHot(ad::Graph<T>& graph,
                                       const std::vector<int>& idx, int depth,
                                       const std::string& prefix) const {
  auto b = P(graph, prefix + ".bias");
  auto y = ad::OneHotLinear<T>(idx, depth, P(graph, prefix + ".weight"), &b);
  y = Norm(graph, y, prefix + ".norm");
  return ad::PRelu(y, P(graph, prefix + ".prelu"));
}

template <typename T>
std::vector<ad::Tensor<T>> DrnModel<T>::ChannelwiseEmbedding(
    ad::Graph<T>& graph, const DoaStream& doa) const {
  Require(config_.uses_channelwise(), "channel-wise fusion is disabled");
  doa.Validate(config_.grid);
  std::vector<ad::Tensor<T>> out;
  for (int c = 0; c < config_.channels; ++c) {
    const std::string p = "chan_emb." + std::to_string(c);
    auto e = EmbedOneHot(graph, doa.azimuth, config_.grid.azimuth_bins,
                         p + ".az");
    if (config_.uses_elevation()) {
      e = ad::Add(e, EmbedOneHot(graph, doa.elevation,
                                 config_.grid.elevation_bins, p + ".el"));
    }
    out.push_back(Norm(graph, e, p + ".norm"));
  }
  return out;
}

template <typename T>
ad::Tensor<T> DrnModel<T>::FramewiseEmbedding(ad::Graph<T>& graph,
                                              const DoaStream& doa) const {
  Require(config_.uses_framewise(), "frame-wise fusion is disabled");
  doa.Validate(config_.grid);
  auto e = EmbedOneHot(graph, doa.azimuth, config_.grid.azimuth_bins,
                       "frame_emb.az");
  if (config_.uses_elevation()) {
    e = ad::Add(e, EmbedOneHot(graph, doa.elevation,
                               config_.grid.elevation_bins, "frame_emb.el"));
  }
  return Norm(graph, e, "frame_emb.norm");
}

template <typename T>
ad::Tensor<T> DrnModel<T>::BuildFrames(ad::Graph<T>& graph,
                                       const dsp::Waveform& mixture,
                                       int first_frame, int num_frames,
                                       const DoaStream& doa,
                                       DrnState<T>& state) const {
  const int C = config_.channels;
  const int R = config_.shift;
  const int iW = config_.input_window;
  const int oW = config_.output_window;
  const int hist = iW - R;
  Require(mixture.channels() == C,
          "mixture has " + std::to_string(mixture.channels()) +
              " channels, model expects " + std::to_string(C));
  Require(first_frame >= 0 && num_frames >= 1, "BuildFrames: bad frame range");
  state.CheckCompatible(config_);

  DoaStream local;
  if (config_.uses_doa()) {
    Require(doa.frames() >= first_frame + num_frames,
            "DOA stream has " + std::to_string(doa.frames()) +
                " frames, need " + std::to_string(first_frame + num_frames));
    local = doa.Slice(first_frame, num_frames);
    local.Validate(config_.grid);
  }

  // Per-channel frame matrices [T x iW] from history ++ new samples.
  const int buf_len = hist + num_frames * R;
  const int n0 = first_frame * R;
  std::vector<ad::Tensor<T>> frames;
  std::vector<T> buf(buf_len);
  for (int c = 0; c < C; ++c) {
    std::copy(state.history.begin() + static_cast<ptrdiff_t>(c) * hist,
              state.history.begin() + static_cast<ptrdiff_t>(c + 1) * hist,
              buf.begin());
    auto x = mixture.channel(c);
    for (int j = 0; j < num_frames * R; ++j) {
      const int n = n0 + j;
      buf[hist + j] = n < mixture.samples() ? static_cast<T>(x[n]) : T(0);
    }
    std::vector<T> m(static_cast<size_t>(num_frames) * iW);
    for (int t = 0; t < num_frames; ++t) {
      std::copy(buf.begin() + t * R, buf.begin() + t * R + iW,
                m.begin() + static_cast<ptrdiff_t>(t) * iW);
    }
    std::copy(buf.end() - hist, buf.end(),
              state.history.begin() + static_cast<ptrdiff_t>(c) * hist);
    frames.push_back(graph.Constant({num_frames, iW}, std::move(m)));
  }

  ad::Tensor<T> dft;
  if (config_.domain == Domain::kFrequency) {
    dft = graph.Constant({config_.input_features(), iW}, input_dft_);
  }
  std::vector<ad::Tensor<T>> chan_emb;
  ad::Tensor<T> chan_proj_w, chan_proj_b;
  if (config_.uses_channelwise()) chan_emb = ChannelwiseEmbedding(graph, local);

  std::vector<ad::Tensor<T>> per_channel;
  for (int c = 0; c < C; ++c) {
    auto x = frames[c];
    if (dft.valid()) x = ad::Linear(x, dft);
    auto h = DenseNormPRelu(graph, x, "input");
    if (config_.uses_channelwise()) {
      auto e = Norm(graph, Dense(graph, chan_emb[c], "chan_emb.proj"),
                    "chan_emb.proj.norm");
      h = ad::Mul(h, e);
    }
    per_channel.push_back(h);
  }
  auto z = DenseNormPRelu(graph, ad::ConcatCols(per_channel), "spatial");

  std::vector<ad::Tensor<T>> frame_fusion;
  if (config_.uses_framewise()) {
    auto f = FramewiseEmbedding(graph, local);
    for (int i = 0; i < config_.framewise_fusions(); ++i) {
      f = DenseNormPRelu(graph, f, "frame_emb.fc." + std::to_string(i));
      const std::string proj = "frame_emb.proj." + std::to_string(i);
      frame_fusion.push_back(
          Norm(graph, Dense(graph, f, proj), proj + ".norm"));
    }
  }

  for (int l = 0; l < config_.lstm_layers; ++l) {
    const std::string p = "lstm." + std::to_string(l);
    ad::LstmState<T> next;
    z = ad::Lstm(z, P(graph, p + ".w_ih"), P(graph, p + ".w_hh"),
                 P(graph, p + ".bias"), state.lstm[l], &next);
    state.lstm[l] = std::move(next);
    if (l < static_cast<int>(frame_fusion.size())) {
      z = ad::Mul(z, frame_fusion[l]);
    }
  }

  auto y = Dense(graph, z, "output");
  if (config_.domain == Domain::kFrequency) {
    y = ad::Linear(
        y, graph.Constant({oW, config_.output_features()}, output_idft_));
  }
  auto ola = ad::OverlapAdd<T>(y, R, synthesis_, state.carry);
  auto full = ola.value();
  std::copy(full.begin() + num_frames * R, full.end(), state.carry.begin());
  state.frames += num_frames;
  return ad::SliceCols(ola, 0, num_frames * R);
}

template <typename T>
dsp::Waveform DrnModel<T>::ForwardUtterance(const dsp::Waveform& mixture,
                                            const DoaStream& doa) const {
  mixture.Validate();
  const int R = config_.shift;
  const int lag = config_.output_window - R;
  const int frames = config_.NumFrames(mixture.samples());
  ad::Graph<T> graph;
  graph.set_grad_enabled(false);
  auto state = DrnState<T>::Zeros(config_);
  auto y = BuildFrames(graph, mixture, 0, frames, doa, state);
  auto v = y.value();
  dsp::Waveform out(1, frames * R, mixture.sample_rate());
  for (int n = 0; n < frames * R; ++n) {
    const int b = n + lag;
    out.at(0, n) = static_cast<double>(
        b < frames * R ? v[b] : state.carry[b - frames * R]);
  }
  return out;
}

template <typename T>
dsp::Waveform DrnModel<T>::ForwardStreaming(const dsp::Waveform& chunk,
                                            const DoaStream& doa,
                                            DrnState<T>& state) const {
  const int R = config_.shift;
  Require(chunk.samples() % R == 0 && chunk.samples() > 0,
          "streaming chunk length must be a positive multiple of R");
  const int frames = chunk.samples() / R;
  ad::Graph<T> graph;
  graph.set_grad_enabled(false);
  auto y = BuildFrames(graph, chunk, 0, frames, doa, state);
  auto v = y.value();
  dsp::Waveform out(1, frames * R, chunk.sample_rate());
  for (int n = 0; n < frames * R; ++n) out.at(0, n) = static_cast<double>(v[n]);
  return out;
}

template <typename T>
dsp::Waveform DrnModel<T>::Flush(const DrnState<T>& state) const {
  state.CheckCompatible(config_);
  const int n = static_cast<int>(state.carry.size());
  dsp::Waveform out(1, n, config_.sample_rate);
  for (int i = 0; i < n; ++i) out.at(0, i) = static_cast<double>(state.carry[i]);
  return out;
}

template class DrnModel<float>;
template class DrnModel<double>;
template struct DrnState<float>;
template struct DrnState<double>;

}  // namespace drn::model
