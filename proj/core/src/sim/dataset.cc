#include "drn/sim/dataset.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "drn/dsp/wav_io.h"

namespace drn::sim {

namespace fs = std::filesystem;

void to_json(nlohmann::json& j, const ManifestRecord& r) {
  j = {{"id", r.id},           {"split", ToString(r.split)},
       {"mode", ToString(r.mode)}, {"seed", r.seed},
       {"mixture", r.mixture}, {"target", r.target},
       {"doa", r.doa},         {"scene", r.scene},
       {"doa_hop", r.doa_hop}, {"num_talkers", r.num_talkers},
       {"n_switches", r.n_switches}};
}

void from_json(const nlohmann::json& j, ManifestRecord& r) {
  j.at("id").get_to(r.id);
  r.split = SplitFromString(j.at("split").get<std::string>());
  r.mode = SceneModeFromString(j.value("mode", std::string("standard")));
  j.at("seed").get_to(r.seed);
  j.at("mixture").get_to(r.mixture);
  j.at("target").get_to(r.target);
  j.at("doa").get_to(r.doa);
  j.at("scene").get_to(r.scene);
  r.doa_hop = j.value("doa_hop", 16);
  r.num_talkers = j.value("num_talkers", 1);
  r.n_switches = j.value("n_switches", 0);
}

void WriteManifest(const std::string& path,
                   const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

std::vector<ManifestRecord> ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path);
  std::vector<ManifestRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<ManifestRecord>());
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

ManifestRecord WriteBundle(const UtteranceBundle& b, const std::string& dir,
                           const std::string& id) {
  fs::create_directories(dir);
  const fs::path d(dir);
  ManifestRecord r;
  r.id = id;
  r.split = b.scene.split;
  r.mode = b.scene.mode;
  r.seed = b.scene.seed;
  r.mixture = id + "_mix.wav";
  r.target = id + "_target.wav";
  r.doa = id + "_doa.csv";
  r.scene = id + "_scene.json";
  r.doa_hop = b.doa_hop;
  r.num_talkers = static_cast<int>(b.scene.targets.size());
  r.n_switches = b.scene.n_switches;
  dsp::WriteWav((d / r.mixture).string(), b.mixture);
  dsp::WriteWav((d / r.target).string(), b.target);
  model::WriteDoaCsv((d / r.doa).string(), b.doa);
  std::ofstream js(d / r.scene, std::ios::binary);
  js << nlohmann::json(b.scene).dump(1) << '\n';
  if (!js) throw std::runtime_error("cannot write " + (d / r.scene).string());
  return r;
}

Utterance LoadUtterance(const ManifestRecord& r, const std::string& dir) {
  const fs::path d(dir);
  auto need = [&](const std::string& name) {
    const fs::path p = d / name;
    if (!fs::exists(p)) throw std::runtime_error("missing file " + p.string());
    return p.string();
  };
  Utterance u;
  u.id = r.id;
  u.mixture = dsp::ReadWav(need(r.mixture));
  u.target = dsp::ReadWav(need(r.target));
  u.doa = model::ReadDoaCsv(need(r.doa));
  u.doa_hop = r.doa_hop;
  std::ifstream js(need(r.scene));
  try {
    u.scene = nlohmann::json::parse(js).get<SceneSpec>();
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed scene " + (d / r.scene).string() +
                             ": " + e.what());
  }
  if (u.target.channels() != 1 || u.target.samples() != u.mixture.samples()) {
    throw std::runtime_error(r.id + ": target does not match mixture");
  }
  return u;
}

uint64_t SceneSeed(uint64_t base_seed, Split split, int index) {
  return Rng::ForStream(base_seed, (static_cast<uint64_t>(split) << 40) +
                                       static_cast<uint64_t>(index))
      .NextU64();
}

std::vector<ManifestRecord> GenerateSplit(const SceneConfig& config,
                                          const GenerateOptions& opt) {
  if (opt.count < 0) throw std::invalid_argument("count must be >= 0");
  const std::string split_name = ToString(opt.split);
  const fs::path split_dir = fs::path(opt.out_dir) / split_name;
  fs::create_directories(split_dir);
  std::vector<ManifestRecord> records(opt.count);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex log_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    auto provider = MakeProvider(opt.speech_dir, opt.noise_dir,
                                 config.sample_rate);
    for (int i = next++; i < opt.count; i = next++) {
      try {
        char id[32];
        std::snprintf(id, sizeof(id), "%s_%05d", split_name.c_str(), i);
        uint64_t seed = SceneSeed(opt.seed, opt.split, i);
        for (int attempt = 0;; ++attempt) {
          try {
            const auto scene = SampleScene(seed, config, opt.mode, opt.split);
            const auto violations = CheckSceneConstraints(scene, config);
            if (!violations.empty()) throw std::runtime_error(violations.front());
            const auto bundle = RenderScene(scene, *provider, config);
            auto rec = WriteBundle(bundle, split_dir.string(), id);
            rec.mixture = split_name + "/" + rec.mixture;
            rec.target = split_name + "/" + rec.target;
            rec.doa = split_name + "/" + rec.doa;
            rec.scene = split_name + "/" + rec.scene;
            records[i] = rec;
            break;
          } catch (const std::runtime_error& e) {
            if (attempt >= 100) throw;
            std::lock_guard lock(log_mu);
            std::cerr << id << ": seed " << seed << " rejected (" << e.what()
                      << "), resampling\n";
            seed = Rng::ForStream(seed, 0x7e5).NextU64();
          }
        }
        const int d = ++done;
        if (opt.progress) {
          std::lock_guard lock(log_mu);
          opt.progress(d, opt.count);
        }
      } catch (...) {
        std::lock_guard lock(log_mu);
        if (!failure) failure = std::current_exception();
        next = opt.count;
      }
    }
  };
  const int n = std::max(1, std::min(opt.workers, std::max(1, opt.count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  WriteManifest((fs::path(opt.out_dir) / (split_name + ".jsonl")).string(),
                records);
  return records;
}

}  // namespace drn::sim
