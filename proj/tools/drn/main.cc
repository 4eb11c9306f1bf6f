// drn: dataset generation, training, evaluation and diagnostics.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drn/sim/dataset.h"
#include "drn/sim/render.h"
#include "drn/train/cost.h"
#include "drn/train/evaluate.h"
#include "drn/train/gradcheck_suite.h"
#include "drn/train/run_config.h"
#include "drn/train/trainer.h"
#include "drn/util/rng.h"

namespace fs = std::filesystem;
using namespace drn;

namespace {

constexpr uint64_t kModelInitStream = 0x1417;

struct Common {
  std::string config_path;
  std::string name;
  std::string out;
  int workers = 1;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Pulls "--section.key value" and "--section.key=value" out of argv.
std::vector<std::string> ExtractOverrides(int argc, char** argv, Common& common) {
  std::vector<std::string> rest;
  for (int i = 0; i < argc; ++i) {
    std::string a = argv[i];
    if (i > 0 && a.rfind("--", 0) == 0) {
      const auto eq = a.find('=');
      const auto key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
      if (key.find('.') != std::string::npos) {
        if (eq != std::string::npos) {
          common.overrides.emplace_back(key, a.substr(eq + 1));
        } else if (i + 1 < argc) {
          common.overrides.emplace_back(key, argv[++i]);
        } else {
          throw std::invalid_argument("missing value for --" + key);
        }
        continue;
      }
    }
    rest.push_back(a);
  }
  return rest;
}

fs::path RunDir(const Common& c, const std::string& command) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("DRN_RUNS_ROOT");
  return fs::path(root && *root ? root : "runs") /
         (c.name.empty() ? command : c.name);
}

void EchoConfig(const fs::path& dir, const train::RunConfig& cfg,
                const nlohmann::json& command) {
  fs::create_directories(dir);
  nlohmann::json j = cfg;
  j["command"] = command;
  std::ofstream(dir / "config.json") << j.dump(2) << '\n';
}

std::string Manifest(const train::RunConfig& cfg, const std::string& given,
                     const std::string& split) {
  if (!given.empty()) return given;
  return (fs::path(cfg.paths.data) / (split + ".jsonl")).string();
}

// The scene settings a corpus was rendered with, when recorded next to it.
sim::SceneConfig CorpusScene(const std::string& manifest,
                             const sim::SceneConfig& fallback) {
  const auto p = fs::path(manifest).parent_path() / "config.json";
  if (!fs::exists(p)) return fallback;
  std::ifstream in(p);
  const auto j = nlohmann::json::parse(in);
  if (!j.contains("scene")) return fallback;
  return j.at("scene").get<sim::SceneConfig>();
}

train::Estimator MakeEstimator(train::System system, const train::RunConfig& cfg,
                               const std::string& checkpoint,
                               const std::string& manifest) {
  switch (system) {
    case train::System::kPassthrough:
      return train::PassthroughEstimator();
    case train::System::kMcwf: {
      train::McwfOptions o;
      o.scene = CorpusScene(manifest, cfg.scene);
      o.speech_dir = cfg.paths.speech_dir;
      o.noise_dir = cfg.paths.noise_dir;
      return train::McwfEstimator(o);
    }
    case train::System::kDrn:
    case train::System::kMaxDiInformed: {
      if (checkpoint.empty()) throw std::invalid_argument("--checkpoint is required");
      auto loaded = train::LoadModel(checkpoint);
      const bool maxdi = loaded.train.input == train::InputMode::kMaxDiInformed;
      if (maxdi != (system == train::System::kMaxDiInformed)) {
        throw std::invalid_argument("checkpoint input mode " +
                                    train::ToString(loaded.train.input) +
                                    " does not match --system " + train::ToString(system));
      }
      std::shared_ptr<const model::DrnModel<float>> m(std::move(loaded.model));
      return train::ModelEstimator(m, loaded.train);
    }
  }
  throw std::logic_error("unhandled system");
}

void PrintAggregates(const metrics::MetricReport& report) {
  for (const auto& [k, a] : report.Aggregates()) {
    std::printf("%-16s %9.3f +/- %.3f (n=%d)\n", k.c_str(), a.mean, a.ci95, a.count);
  }
  if (report.failed()) std::printf("failed rows: %d\n", report.failed());
}

int Run(int argc, char** argv) {
  Common common;
  auto args = ExtractOverrides(argc, argv, common);

  CLI::App app{"Directional recurrent network toolkit"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "run config JSON");
    sub->add_option("--name", common.name, "run name under the runs root");
    sub->add_option("--out", common.out, "output directory (overrides --name)");
    sub->add_option("--workers", common.workers, "parallel utterances")
        ->check(CLI::PositiveNumber);
  };

  std::string split = "all", mode = "standard";
  int count = -1;
  uint64_t seed = 1;
  auto* simulate = app.add_subcommand("simulate", "render a dataset split");
  add_common(simulate);
  simulate->add_option("--split", split, "train|val|test|all");
  simulate->add_option("--count", count, "utterances (default 2000/100/200)");
  simulate->add_option("--seed", seed, "base scene seed");
  simulate->add_option("--mode", mode, "standard|easy|switch_demo");

  std::string train_manifest, val_manifest;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_common(train_cmd);
  train_cmd->add_option("--train-manifest", train_manifest);
  train_cmd->add_option("--val-manifest", val_manifest);

  std::string system = "drn", checkpoint, manifest;
  double offset = 0.0;
  auto* eval = app.add_subcommand("eval", "evaluate a system on a manifest");
  add_common(eval);
  eval->add_option("--system", system, "drn|mcwf|maxdi-informed|passthrough");
  eval->add_option("--checkpoint", checkpoint);
  eval->add_option("--manifest", manifest, "default: <paths.data>/test.jsonl");
  eval->add_option("--offset", offset, "azimuth offset in degrees");

  std::string offsets = "-20:2.5:20";
  auto* sweep = app.add_subcommand("sweep", "delta-SNR versus DOA offset");
  add_common(sweep);
  sweep->add_option("--system", system);
  sweep->add_option("--checkpoint", checkpoint);
  sweep->add_option("--manifest", manifest);
  sweep->add_option("--offsets", offsets, "lo:step:hi or a comma list");

  int demo_count = 1;
  auto* demo = app.add_subcommand("demo-switch", "target switching demo");
  add_common(demo);
  demo->add_option("--system", system);
  demo->add_option("--checkpoint", checkpoint);
  demo->add_option("--count", demo_count, "scenes")->check(CLI::PositiveNumber);
  demo->add_option("--seed", seed);

  double tolerance = 1e-3;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks");
  add_common(gradcheck);
  gradcheck->add_option("--tolerance", tolerance);

  auto* cost = app.add_subcommand("cost", "parameter and MAC counts");
  add_common(cost);

  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto cfg = train::ResolveRunConfig(common.config_path, common.overrides);
  auto log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };

  if (*simulate) {
    const fs::path dir = RunDir(common, "simulate");
    const auto scene_mode = sim::SceneModeFromString(mode);
    EchoConfig(dir, cfg, {{"name", "simulate"}, {"split", split}, {"count", count},
                          {"seed", seed}, {"mode", mode}});
    std::vector<std::pair<sim::Split, int>> plan;
    if (split == "all") {
      plan = {{sim::Split::kVal, 100}, {sim::Split::kTest, 200}, {sim::Split::kTrain, 2000}};
      if (count >= 0) {
        for (auto& p : plan) p.second = count;
      }
    } else {
      const auto s = sim::SplitFromString(split);
      plan = {{s, count >= 0 ? count
                             : s == sim::Split::kTrain ? 2000
                             : s == sim::Split::kVal   ? 100
                                                       : 200}};
    }
    for (const auto& [s, n] : plan) {
      sim::GenerateOptions o;
      o.out_dir = dir.string();
      o.split = s;
      o.mode = scene_mode;
      o.count = n;
      o.seed = seed;
      o.workers = common.workers;
      o.speech_dir = cfg.paths.speech_dir;
      o.noise_dir = cfg.paths.noise_dir;
      o.progress = [&](int done, int total) {
        if (done % 50 == 0 || done == total) {
          std::fprintf(stderr, "%s %d/%d\n", sim::ToString(s).c_str(), done, total);
        }
      };
      sim::GenerateSplit(cfg.scene, o);
      std::printf("%s\n", (dir / (sim::ToString(s) + ".jsonl")).string().c_str());
    }
    return 0;
  }

  if (*train_cmd) {
    const fs::path dir = RunDir(common, "train");
    train::TrainOptions o;
    o.train_manifest = Manifest(cfg, train_manifest, "train");
    o.val_manifest = Manifest(cfg, val_manifest, "val");
    if (val_manifest.empty() && !fs::exists(o.val_manifest)) o.val_manifest.clear();
    o.out_dir = dir.string();
    o.workers = common.workers;
    o.log = log;
    EchoConfig(dir, cfg, {{"name", "train"}, {"train_manifest", o.train_manifest},
                          {"val_manifest", o.val_manifest}});
    train::CheckInputMode(cfg.model, cfg.train, cfg.scene.channels);
    model::DrnModel<float> m(cfg.model);
    m.Initialize(Rng::ForStream(cfg.train.seed, kModelInitStream).NextU64());
    const auto res = train::Train(m, cfg.train, o);
    std::printf("%s\n", res.best_checkpoint.c_str());
    return 0;
  }

  if (*eval) {
    const fs::path dir = RunDir(common, "eval");
    const auto sys = train::SystemFromString(system);
    const auto path = Manifest(cfg, manifest, "test");
    EchoConfig(dir, cfg, {{"name", "eval"}, {"system", system}, {"checkpoint", checkpoint},
                          {"manifest", path}, {"offset", offset}});
    auto report = train::Evaluate(MakeEstimator(sys, cfg, checkpoint, path), path,
                                  {common.workers, offset});
    report.SetTag("system", system);
    if (!checkpoint.empty()) report.SetTag("checkpoint", checkpoint);
    report.WriteCsv((dir / "report.csv").string());
    report.WriteJson((dir / "report.json").string());
    PrintAggregates(report);
    return 0;
  }

  if (*sweep) {
    const fs::path dir = RunDir(common, "sweep");
    const auto sys = train::SystemFromString(system);
    const auto path = Manifest(cfg, manifest, "test");
    const auto offs = train::ParseOffsets(offsets);
    EchoConfig(dir, cfg, {{"name", "sweep"}, {"system", system}, {"checkpoint", checkpoint},
                          {"manifest", path}, {"offsets", offsets}});
    std::vector<metrics::MetricReport> reports;
    const auto points = train::DeltaSnrSweep(MakeEstimator(sys, cfg, checkpoint, path),
                                             path, offs, {common.workers, 0.0}, &reports);
    train::WriteSweepCsv((dir / "sweep.csv").string(), points);
    for (size_t i = 0; i < reports.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof(name), "report_%+.1f.csv", offs[i]);
      reports[i].WriteCsv((dir / name).string());
    }
    for (const auto& p : points) {
      std::printf("%7.2f %8.3f +/- %.3f\n", p.offset_deg, p.delta_snr.mean, p.delta_snr.ci95);
    }
    return 0;
  }

  if (*demo) {
    const fs::path dir = RunDir(common, "demo-switch");
    const auto sys = train::SystemFromString(system);
    EchoConfig(dir, cfg, {{"name", "demo-switch"}, {"system", system},
                          {"checkpoint", checkpoint}, {"count", demo_count}, {"seed", seed}});
    const auto est = MakeEstimator(sys, cfg, checkpoint, "");
    auto provider = sim::MakeProvider(cfg.paths.speech_dir, cfg.paths.noise_dir,
                                      cfg.scene.sample_rate);
    std::ofstream summary(dir / "summary.csv");
    summary << "scene,seed,flipped\n";
    int flipped = 0;
    for (int i = 0; i < demo_count; ++i) {
      const auto s = sim::SceneSeed(seed, sim::Split::kTest, i);
      const auto scene = sim::SampleScene(s, cfg.scene, sim::SceneMode::kSwitchDemo,
                                          sim::Split::kTest);
      const auto bundle = sim::RenderScene(scene, *provider, cfg.scene);
      const auto r = train::SwitchDemo(est, bundle);
      char sub[32];
      std::snprintf(sub, sizeof(sub), "scene_%03d", i);
      train::WriteSwitchDemo((dir / sub).string(), r);
      flipped += r.Flipped();
      summary << i << ',' << s << ',' << int(r.Flipped()) << '\n';
    }
    std::printf("flipped %d/%d\n", flipped, demo_count);
    return 0;
  }

  if (*gradcheck) {
    bool ok = true;
    for (const auto& r : train::RunGradCheckSuite()) {
      const bool pass = r.report.Passed(tolerance);
      ok = ok && pass;
      std::printf("%-22s %s max_rel_err=%.3e (%zu checked, worst %s[%zu])\n",
                  r.name.c_str(), pass ? "ok  " : "FAIL", r.report.max_rel_error,
                  r.report.checked, r.report.worst.name.c_str(), r.report.worst.index);
    }
    if (!ok) {
      std::fprintf(stderr, "error: gradient check above tolerance %.1e\n", tolerance);
      return 1;
    }
    return 0;
  }

  if (*cost) {
    const fs::path dir = RunDir(common, "cost");
    EchoConfig(dir, cfg, {{"name", "cost"}});
    const nlohmann::json j = train::ComputeCost(cfg.model);
    std::ofstream(dir / "cost.json") << j.dump(2) << '\n';
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
