#include "drn/train/evaluate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "drn/metrics/metrics.h"
#include "drn/metrics/pcm_loss.h"
#include "drn/train/trainer.h"

namespace drn::train {

namespace fs = std::filesystem;

std::string ToString(System s) {
  switch (s) {
    case System::kDrn:
      return "drn";
    case System::kMcwf:
      return "mcwf";
    case System::kMaxDiInformed:
      return "maxdi-informed";
    case System::kPassthrough:
      return "passthrough";
  }
  return "drn";
}

System SystemFromString(const std::string& s) {
  for (System v : {System::kDrn, System::kMcwf, System::kMaxDiInformed,
                   System::kPassthrough}) {
    if (ToString(v) == s) return v;
  }
  throw std::invalid_argument("unknown system: " + s);
}

Estimator PassthroughEstimator() {
  return [](const sim::Utterance& u, double) { return u.mixture.Channel(0); };
}

namespace {

dsp::Waveform Trim(const dsp::Waveform& w, int n) {
  return w.samples() == n ? w : w.Slice(0, n);
}

// Lazily built maxDI weight cache shared by all calls of one estimator.
struct SharedCache {
  std::mutex mu;
  std::unique_ptr<baselines::MaxDiCache> cache;
};

}  // namespace

Estimator ModelEstimator(std::shared_ptr<const model::DrnModel<float>> model,
                         const TrainConfig& config) {
  auto shared = std::make_shared<SharedCache>();
  return [model, config, shared](const sim::Utterance& u, double offset) {
    const auto& mc = model->config();
    baselines::MaxDiCache* cache = nullptr;
    if (config.input == InputMode::kMaxDiInformed) {
      std::lock_guard<std::mutex> lock(shared->mu);
      if (!shared->cache) {
        shared->cache = std::make_unique<baselines::MaxDiCache>(
            u.scene.array, mc.grid, config.maxdi_window, mc.sample_rate);
      }
      cache = shared->cache.get();
    }
    const Prepared p = Prepare(u, mc, config, nullptr, cache, offset);
    return Trim(model->ForwardUtterance(p.input, p.doa).Channel(0),
                u.mixture.samples());
  };
}

Estimator McwfEstimator(McwfOptions options) {
  return [options](const sim::Utterance& u, double) {
    auto provider = sim::MakeProvider(options.speech_dir, options.noise_dir,
                                      u.scene.sample_rate);
    const auto bundle = sim::RenderScene(u.scene, *provider, options.scene);
    const int C = bundle.mixture.channels();
    const int N = bundle.mixture.samples();
    if (N != u.mixture.samples() || C != u.mixture.channels()) {
      throw std::runtime_error("re-rendered scene does not match " + u.id);
    }
    dsp::Waveform target(C, N, u.mixture.sample_rate());
    for (int n = 0; n < N; ++n) {
      const auto& src = bundle.talker_direct[sim::ActiveTalker(u.scene.schedule, n)];
      for (int c = 0; c < C; ++c) target.channel(c)[n] = src.channel(c)[n];
    }
    std::vector<int> switches;
    for (size_t i = 1; i < u.scene.schedule.size(); ++i) {
      switches.push_back(u.scene.schedule[i].sample);
    }
    auto res = baselines::McwfOnline(u.mixture, target, switches, options.mcwf);
    return Trim(res.output.Channel(0), N);
  };
}

namespace {

metrics::MetricRow Score(const Estimator& estimator, const sim::Utterance& u,
                         double offset) {
  metrics::MetricRow row;
  row.id = u.id;
  const auto est = estimator(u, offset);
  if (est.samples() != u.target.samples()) {
    throw std::runtime_error("estimate has " + std::to_string(est.samples()) +
                             " samples, target " +
                             std::to_string(u.target.samples()));
  }
  const auto mix = u.mixture.Channel(0);
  row.si_sdr_db = metrics::SiSdr(est.channel(0), u.target.channel(0));
  row.snr_db = metrics::Snr(est.channel(0), u.target.channel(0));
  row.mix_si_sdr_db = metrics::SiSdr(mix.channel(0), u.target.channel(0));
  row.mix_snr_db = metrics::Snr(mix.channel(0), u.target.channel(0));
  row.loss = metrics::PcmLossValue(est, u.target, mix);
  return row;
}

}  // namespace

metrics::MetricReport Evaluate(const Estimator& estimator,
                               const std::vector<sim::ManifestRecord>& records,
                               const std::string& manifest_dir,
                               const EvalOptions& options) {
  std::vector<metrics::MetricRow> rows(records.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < records.size(); i = next++) {
      try {
        const auto u = sim::LoadUtterance(records[i], manifest_dir);
        rows[i] = Score(estimator, u, options.offset_deg);
      } catch (const std::exception& e) {
        rows[i] = metrics::MetricRow{};
        rows[i].id = records[i].id;
        rows[i].error = e.what();
      }
    }
  };
  const int workers = std::max(1, options.workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  metrics::MetricReport report;
  for (auto& r : rows) report.Add(std::move(r));
  report.SetTag("offset_deg", metrics::FormatNumber(options.offset_deg));
  return report;
}

metrics::MetricReport Evaluate(const Estimator& estimator,
                               const std::string& manifest,
                               const EvalOptions& options) {
  return Evaluate(estimator, sim::ReadManifest(manifest),
                  fs::path(manifest).parent_path().string(), options);
}

std::vector<double> ParseOffsets(const std::string& spec) {
  auto num = [&](const std::string& s) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != s.size()) throw std::invalid_argument("bad offset list: " + spec);
    return v;
  };
  std::vector<double> out;
  if (std::count(spec.begin(), spec.end(), ':') == 2) {
    const size_t a = spec.find(':'), b = spec.rfind(':');
    const double lo = num(spec.substr(0, a));
    const double step = num(spec.substr(a + 1, b - a - 1));
    const double hi = num(spec.substr(b + 1));
    if (step <= 0 || hi < lo) throw std::invalid_argument("bad offset range: " + spec);
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(num(item));
  if (out.empty()) throw std::invalid_argument("empty offset list");
  return out;
}

std::vector<SweepPoint> DeltaSnrSweep(const Estimator& estimator,
                                      const std::string& manifest,
                                      const std::vector<double>& offsets,
                                      const EvalOptions& options,
                                      std::vector<metrics::MetricReport>* reports) {
  const auto records = sim::ReadManifest(manifest);
  const auto dir = fs::path(manifest).parent_path().string();
  std::vector<SweepPoint> points;
  for (double off : offsets) {
    EvalOptions o = options;
    o.offset_deg = off;
    auto report = Evaluate(estimator, records, dir, o);
    points.push_back({off, report.Get("delta_snr_db")});
    if (reports) reports->push_back(std::move(report));
  }
  return points;
}

void WriteSweepCsv(const std::string& path,
                   const std::vector<SweepPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "offset_deg,mean_delta_snr,ci95,count\n";
  for (const auto& p : points) {
    out << metrics::FormatNumber(p.offset_deg) << ','
        << metrics::FormatNumber(p.delta_snr.mean) << ','
        << metrics::FormatNumber(p.delta_snr.ci95) << ',' << p.delta_snr.count
        << '\n';
  }
}

MagnitudeGrid Magnitudes(std::span<const double> x,
                         const dsp::StftConfig& stft) {
  dsp::Waveform w(1, static_cast<int>(x.size()),
                  std::vector<double>(x.begin(), x.end()));
  const auto spec = dsp::Stft(w, stft);
  MagnitudeGrid g;
  g.bins = spec.bins;
  g.frames = spec.frames;
  g.data.resize(static_cast<size_t>(g.bins) * g.frames);
  for (int t = 0; t < g.frames; ++t) {
    for (int f = 0; f < g.bins; ++f) g.data[f * g.frames + t] = std::abs(spec.at(0, t, f));
  }
  return g;
}

bool SwitchDemoResult::Flipped() const {
  if (segments.size() < 2) return false;
  for (const auto& s : segments) {
    const auto best = std::max_element(s.si_sdr_db.begin(), s.si_sdr_db.end());
    if (best - s.si_sdr_db.begin() != s.active) return false;
  }
  return true;
}

sim::Utterance ToUtterance(const sim::UtteranceBundle& bundle,
                           const std::string& id) {
  sim::Utterance u;
  u.id = id;
  u.mixture = bundle.mixture;
  u.target = bundle.target;
  u.doa = bundle.doa;
  u.doa_hop = bundle.doa_hop;
  u.scene = bundle.scene;
  return u;
}

SwitchDemoResult SwitchDemo(const Estimator& estimator,
                            const sim::UtteranceBundle& bundle,
                            const SwitchDemoOptions& options) {
  const auto u = ToUtterance(bundle, "switch_demo");
  SwitchDemoResult r;
  r.estimate = estimator(u, 0.0);
  const int N = u.mixture.samples();
  if (r.estimate.samples() != N) {
    throw std::runtime_error("estimate length does not match the scene");
  }
  r.noisy = Magnitudes(u.mixture.channel(0), options.stft);
  r.enhanced = Magnitudes(r.estimate.channel(0), options.stft);
  r.target = Magnitudes(u.target.channel(0), options.stft);
  const int settle = static_cast<int>(
      std::lround(options.settle_seconds * u.mixture.sample_rate()));
  const auto& sched = u.scene.schedule;
  for (size_t i = 0; i < sched.size(); ++i) {
    SegmentScore s;
    s.begin = sched[i].sample + settle;
    s.end = i + 1 < sched.size() ? sched[i + 1].sample : N;
    s.active = sched[i].talker;
    if (s.end - s.begin < 1) continue;
    const auto est = r.estimate.channel(0).subspan(s.begin, s.end - s.begin);
    for (const auto& talker : bundle.talker_direct) {
      const auto ref = talker.channel(0).subspan(s.begin, s.end - s.begin);
      s.si_sdr_db.push_back(metrics::SiSdr(est, ref));
    }
    r.segments.push_back(std::move(s));
  }
  return r;
}

namespace {

void WriteGridCsv(const std::string& path, const MagnitudeGrid& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int f = 0; f < g.bins; ++f) {
    for (int t = 0; t < g.frames; ++t) {
      out << (t ? "," : "") << metrics::FormatNumber(g.at(f, t));
    }
    out << '\n';
  }
}

// 8-bit log magnitude over an 80 dB range, low frequencies at the bottom.
void WritePgm(const std::string& path, const MagnitudeGrid& g, double peak) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << g.frames << ' ' << g.bins << "\n255\n";
  for (int f = g.bins - 1; f >= 0; --f) {
    for (int t = 0; t < g.frames; ++t) {
      const double db = 20.0 * std::log10(std::max(g.at(f, t), 1e-12) / peak);
      const double v = std::clamp((db + 80.0) / 80.0, 0.0, 1.0);
      out.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }
}

}  // namespace

void WriteSwitchDemo(const std::string& dir, const SwitchDemoResult& r) {
  fs::create_directories(dir);
  const fs::path d(dir);
  double peak = 1e-12;
  for (const auto* g : {&r.noisy, &r.enhanced, &r.target}) {
    for (double v : g->data) peak = std::max(peak, v);
  }
  const std::pair<const char*, const MagnitudeGrid*> grids[] = {
      {"noisy", &r.noisy}, {"enhanced", &r.enhanced}, {"target", &r.target}};
  for (const auto& [name, g] : grids) {
    WriteGridCsv((d / (std::string(name) + ".csv")).string(), *g);
    WritePgm((d / (std::string(name) + ".pgm")).string(), *g, peak);
  }
  std::ofstream seg(d / "segments.csv");
  seg << "begin,end,active";
  const size_t K = r.segments.empty() ? 0 : r.segments[0].si_sdr_db.size();
  for (size_t k = 0; k < K; ++k) seg << ",si_sdr_talker" << k;
  seg << '\n';
  for (const auto& s : r.segments) {
    seg << s.begin << ',' << s.end << ',' << s.active;
    for (double v : s.si_sdr_db) seg << ',' << metrics::FormatNumber(v);
    seg << '\n';
  }
  std::ofstream(d / "flipped.txt") << (r.Flipped() ? "1" : "0") << '\n';
}

}  // namespace drn::train
