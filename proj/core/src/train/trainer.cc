#include "drn/train/trainer.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "drn/ad/checkpoint.h"
#include "drn/metrics/pcm_loss.h"
#include "drn/sim/render.h"

namespace drn::train {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kJitterStream = 0x7177e2;
constexpr uint64_t kShuffleStream = 0x5f1e;

double WrapAzimuth(double az) {
  az = std::fmod(az, 360.0);
  return az < 0 ? az + 360.0 : az;
}

std::vector<double> Channel0(const dsp::Waveform& w) {
  return {w.channel(0).begin(), w.channel(0).end()};
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void CheckInputMode(const model::DrnConfig& m, const TrainConfig& cfg,
                    int mic_channels) {
  const int want =
      cfg.input == InputMode::kMics ? mic_channels : mic_channels + 1;
  if (m.channels != want) {
    throw std::invalid_argument(
        "model expects " + std::to_string(m.channels) + " channels but input "
        "mode " + ToString(cfg.input) + " provides " + std::to_string(want));
  }
}

Prepared Prepare(const sim::Utterance& u, const model::DrnConfig& mc,
                 const TrainConfig& tc, Rng* jitter_rng,
                 baselines::MaxDiCache* maxdi, double offset) {
  CheckInputMode(mc, tc, u.mixture.channels());
  Prepared p;
  p.id = u.id;
  p.target = Channel0(u.target);
  p.reference = Channel0(u.mixture);
  model::DoaTrack track = u.doa;
  if (jitter_rng && tc.jitter) {
    track = sim::JitterDoa(track, *jitter_rng,
                           {tc.jitter_mean_deg, tc.jitter_frame_deg});
  }
  if (offset != 0.0) {
    for (auto& az : track.azimuth_deg) az = WrapAzimuth(az + offset);
  }
  if (tc.input == InputMode::kMaxDiInformed) {
    if (!maxdi) throw std::invalid_argument("maxDI input needs a weight cache");
    const dsp::StftConfig stft{tc.maxdi_window, tc.maxdi_window / 2,
                               dsp::WindowKind::kSqrtHann};
    p.input = baselines::MaxDiInformedInput(u.mixture, track, u.doa_hop, stft,
                                            *maxdi, mc.grid);
  } else {
    p.input = u.mixture;
  }
  const int frames = mc.NumFrames(u.mixture.samples());
  p.doa = track.Resample(u.doa_hop, mc.shift, frames).Quantize(mc.grid);
  return p;
}

ad::Tensor<float> AlignedLoss(const ad::Tensor<float>& est, const Prepared& u,
                              int begin) {
  const int n = static_cast<int>(est.size());
  const int N = static_cast<int>(u.target.size());
  std::vector<double> ref(n, 0.0), mix(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int t = begin + j;
    if (t >= 0 && t < N) {
      ref[j] = u.target[t];
      mix[j] = u.reference[t];
    }
  }
  return metrics::PcmLoss<float>(est, ref, mix, {});
}

Trainer::Trainer(model::DrnModel<float>& model, TrainConfig config)
    : model_(model),
      config_(std::move(config)),
      optimizer_(model.params(), {config_.lr, config_.beta1, config_.beta2,
                                  config_.eps, config_.amsgrad}) {
  config_.Validate();
  const auto& mc = model_.config();
  segment_frames_ = std::max(
      1, static_cast<int>(std::lround(config_.tbptt_seconds * mc.sample_rate /
                                      mc.shift)));
}

std::vector<StepStats> Trainer::TrainBatch(const std::vector<Prepared>& batch) {
  if (batch.empty()) return {};
  const auto& mc = model_.config();
  const int R = mc.shift;
  const int lag = mc.output_window - R;
  std::vector<model::DrnState<float>> states;
  int max_frames = 0;
  for (const auto& u : batch) {
    states.push_back(model::DrnState<float>::Zeros(mc));
    max_frames = std::max(max_frames, mc.NumFrames(u.input.samples()));
  }
  std::vector<StepStats> out;
  for (int f0 = 0; f0 < max_frames; f0 += segment_frames_) {
    model_.params().ZeroGrad();
    double loss_sum = 0.0;
    int active = 0;
    for (size_t b = 0; b < batch.size(); ++b) {
      const auto& u = batch[b];
      const int frames = mc.NumFrames(u.input.samples());
      if (f0 >= frames) continue;
      const int nf = std::min(segment_frames_, frames - f0);
      ad::Graph<float> graph;
      auto est = model_.BuildFrames(graph, u.input, f0, nf, u.doa, states[b]);
      auto loss = AlignedLoss(est, u, f0 * R - lag);
      const double lv = loss.item();
      if (!std::isfinite(lv)) {
        throw std::runtime_error("non-finite loss at step " +
                                 std::to_string(optimizer_.steps() + 1) +
                                 " on utterance " + u.id);
      }
      graph.Backward(loss);
      graph.CollectParamGrads(model_.params());
      loss_sum += lv;
      ++active;
    }
    model_.params().ScaleGrad(1.0 / active);
    StepStats s;
    s.loss = loss_sum / active;
    s.grad_norm = ClipGradNorm(model_.params(), config_.grad_clip_norm);
    s.clipped_norm = model_.params().GradNorm();
    if (!std::isfinite(s.grad_norm)) {
      std::string ids;
      for (const auto& u : batch) ids += (ids.empty() ? "" : ",") + u.id;
      throw std::runtime_error("non-finite gradient norm at step " +
                               std::to_string(optimizer_.steps() + 1) +
                               ", batch [" + ids + "]");
    }
    optimizer_.Step();
    s.step = optimizer_.steps();
    out.push_back(s);
  }
  return out;
}

double Trainer::SegmentedLoss(const Prepared& u) const {
  const auto& mc = model_.config();
  const int R = mc.shift;
  const int frames = mc.NumFrames(u.input.samples());
  auto state = model::DrnState<float>::Zeros(mc);
  ad::Graph<float> graph;
  graph.set_grad_enabled(false);
  std::vector<ad::Tensor<float>> parts;
  for (int f0 = 0; f0 < frames; f0 += segment_frames_) {
    const int nf = std::min(segment_frames_, frames - f0);
    parts.push_back(model_.BuildFrames(graph, u.input, f0, nf, u.doa, state));
  }
  auto est = ad::ConcatCols(parts);
  return AlignedLoss(est, u, -(mc.output_window - R)).item();
}

double Trainer::FullLoss(const Prepared& u) const {
  const auto& mc = model_.config();
  auto state = model::DrnState<float>::Zeros(mc);
  ad::Graph<float> graph;
  graph.set_grad_enabled(false);
  auto est = model_.BuildFrames(graph, u.input, 0,
                                mc.NumFrames(u.input.samples()), u.doa, state);
  return AlignedLoss(est, u, -(mc.output_window - mc.shift)).item();
}

void SaveModel(const std::string& path, const model::DrnModel<float>& model,
               const TrainConfig& config, const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["model"] = model.config();
  meta["train"] = config;
  ad::SaveCheckpoint(path, model.params(), meta);
}

LoadedModel LoadModel(const std::string& path) {
  const auto header = ad::ReadCheckpointHeader(path);
  if (!header.meta.contains("model")) {
    throw std::runtime_error("checkpoint " + path + " has no model config");
  }
  LoadedModel out;
  out.model = std::make_unique<model::DrnModel<float>>(
      header.meta.at("model").get<model::DrnConfig>());
  out.meta = ad::LoadCheckpoint(path, out.model->params());
  if (header.meta.contains("train")) {
    out.train = header.meta.at("train").get<TrainConfig>();
  }
  return out;
}

TrainResult Train(model::DrnModel<float>& model, const TrainConfig& cfg,
                  const TrainOptions& opt) {
  cfg.Validate();
  auto log = [&](const std::string& s) {
    if (opt.log) opt.log(s);
  };
  fs::create_directories(opt.out_dir);
  const fs::path out_dir(opt.out_dir);
  const auto train_recs = sim::ReadManifest(opt.train_manifest);
  if (train_recs.empty()) throw std::runtime_error("empty training manifest");
  const std::string train_dir = fs::path(opt.train_manifest).parent_path().string();
  std::vector<sim::ManifestRecord> val_recs;
  std::string val_dir;
  if (!opt.val_manifest.empty()) {
    val_recs = sim::ReadManifest(opt.val_manifest);
    val_dir = fs::path(opt.val_manifest).parent_path().string();
  }
  const auto& mc = model.config();
  std::unique_ptr<baselines::MaxDiCache> cache;
  auto ensure_cache = [&](const sim::Utterance& u) {
    if (cfg.input == InputMode::kMaxDiInformed && !cache) {
      cache = std::make_unique<baselines::MaxDiCache>(
          u.scene.array, mc.grid, cfg.maxdi_window, mc.sample_rate);
    }
  };

  // Validation set is prepared once, without jitter.
  std::vector<Prepared> val;
  for (const auto& r : val_recs) {
    const auto u = sim::LoadUtterance(r, val_dir);
    ensure_cache(u);
    val.push_back(Prepare(u, mc, cfg, nullptr, cache.get()));
  }

  Trainer trainer(model, cfg);
  TrainResult result;
  std::ofstream curve(out_dir / "loss.csv");
  curve << "step,train_loss,val_loss\n";
  double best = std::numeric_limits<double>::infinity();
  bool stop = false;
  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    std::vector<int> order(train_recs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = Rng::ForStream(cfg.seed, kShuffleStream + epoch);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.UniformInt(0, i)]);
    }
    double epoch_loss = 0.0;
    int epoch_steps = 0;
    for (size_t b0 = 0; b0 < order.size() && !stop; b0 += cfg.batch_size) {
      std::vector<Prepared> batch;
      for (size_t i = b0; i < std::min(order.size(), b0 + cfg.batch_size); ++i) {
        const int idx = order[i];
        const auto u = sim::LoadUtterance(train_recs[idx], train_dir);
        ensure_cache(u);
        Rng jitter = Rng::ForStream(cfg.seed ^ (static_cast<uint64_t>(epoch) << 32),
                                    kJitterStream + idx);
        batch.push_back(Prepare(u, mc, cfg, &jitter, cache.get()));
      }
      for (const auto& s : trainer.TrainBatch(batch)) {
        result.steps.push_back(s);
        curve << s.step << ',' << Fmt(s.loss) << ",\n";
        epoch_loss += s.loss;
        ++epoch_steps;
        if (s.step % cfg.log_every == 0) {
          log("epoch " + std::to_string(epoch) + " step " + std::to_string(s.step) +
              " loss " + Fmt(s.loss) + " grad_norm " + Fmt(s.grad_norm));
        }
        if (cfg.max_steps > 0 && s.step >= cfg.max_steps) stop = true;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = trainer.steps();
    rec.train_loss = epoch_steps ? epoch_loss / epoch_steps : 0.0;
    rec.val_loss = std::numeric_limits<double>::quiet_NaN();
    if (!val.empty()) {
      double sum = 0.0;
      for (const auto& u : val) sum += trainer.FullLoss(u);
      rec.val_loss = sum / val.size();
      curve << rec.step << ",," << Fmt(rec.val_loss) << '\n';
    }
    curve.flush();
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
    rec.checkpoint = name;
    SaveModel((out_dir / name).string(), model, cfg,
              {{"epoch", epoch}, {"step", rec.step},
               {"train_loss", rec.train_loss},
               {"val_loss", val.empty() ? nlohmann::json(nullptr)
                                        : nlohmann::json(rec.val_loss)}});
    const double score = val.empty() ? rec.train_loss : rec.val_loss;
    if (score < best) {
      best = score;
      for (auto& e : result.epochs) e.best = false;
      rec.best = true;
      fs::copy_file(out_dir / name, out_dir / "best.ckpt",
                    fs::copy_options::overwrite_existing);
      result.best_checkpoint = (out_dir / "best.ckpt").string();
    }
    log("epoch " + std::to_string(epoch) + " train " + Fmt(rec.train_loss) +
        " val " + Fmt(rec.val_loss) + (rec.best ? " (best)" : ""));
    result.epochs.push_back(rec);
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& e : result.epochs) {
      listing.push_back({{"epoch", e.epoch},
                         {"step", e.step},
                         {"train_loss", e.train_loss},
                         {"val_loss", std::isnan(e.val_loss) ? nlohmann::json(nullptr)
                                                             : nlohmann::json(e.val_loss)},
                         {"checkpoint", e.checkpoint},
                         {"best", e.best}});
    }
    std::ofstream(out_dir / "checkpoints.json") << listing.dump(2) << '\n';
  }
  return result;
}

}  // namespace drn::train
