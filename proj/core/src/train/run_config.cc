#include "drn/train/run_config.h"

#include <fstream>
#include <stdexcept>

namespace drn::train {

model::DrnConfig RunConfig::DeskModel() {
  auto c = model::DrnConfig::Latency16ms();
  c.hidden = 32;
  c.channel_embed = 16;
  c.frame_embed = 32;
  return c;
}

void to_json(nlohmann::json& j, const PathsConfig& p) {
  j = {{"data", p.data}, {"speech_dir", p.speech_dir}, {"noise_dir", p.noise_dir}};
}

void from_json(const nlohmann::json& j, PathsConfig& p) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "data" && it.key() != "speech_dir" && it.key() != "noise_dir") {
      throw std::invalid_argument("unknown paths key: " + it.key());
    }
  }
  PathsConfig d;
  p.data = j.value("data", d.data);
  p.speech_dir = j.value("speech_dir", d.speech_dir);
  p.noise_dir = j.value("noise_dir", d.noise_dir);
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"model", c.model}, {"train", c.train}, {"scene", c.scene}, {"paths", c.paths}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("run config must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "model" && k != "train" && k != "scene" && k != "paths") {
      throw std::invalid_argument("unknown config section: " + k);
    }
  }
  // Sections are merged over the defaults so partial files work.
  const nlohmann::json defaults = RunConfig{};
  auto section = [&](const char* name) {
    nlohmann::json s = defaults.at(name);
    if (j.contains(name)) {
      if (!j.at(name).is_object()) {
        throw std::invalid_argument(std::string("config section ") + name +
                                    " must be an object");
      }
      for (auto it = j.at(name).begin(); it != j.at(name).end(); ++it) {
        if (!s.contains(it.key())) {
          throw std::invalid_argument("unknown config key: " + std::string(name) +
                                      "." + it.key());
        }
        s[it.key()] = it.value();
      }
    }
    return s;
  };
  c.model = section("model").get<model::DrnConfig>();
  c.train = section("train").get<TrainConfig>();
  c.scene = section("scene").get<sim::SceneConfig>();
  c.paths = section("paths").get<PathsConfig>();
}

void ApplyOverride(nlohmann::json& j, const std::string& dotted,
                   const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) {
    throw std::invalid_argument("override needs section.key: " + dotted);
  }
  const auto sec = dotted.substr(0, dot);
  const auto key = dotted.substr(dot + 1);
  if (!j.contains(sec) || !j[sec].contains(key)) {
    throw std::invalid_argument("unknown config key: " + dotted);
  }
  nlohmann::json v = nlohmann::json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  // A string field keeps the literal text, e.g. "none" or "123".
  if (j[sec][key].is_string()) v = value;
  j[sec][key] = v;
}

RunConfig ResolveRunConfig(
    const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  nlohmann::json j = RunConfig{};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config " + config_path);
    nlohmann::json file;
    try {
      in >> file;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("bad JSON in " + config_path + ": " + e.what());
    }
    j = nlohmann::json(file.get<RunConfig>());
  }
  for (const auto& [k, v] : overrides) ApplyOverride(j, k, v);
  RunConfig c = j.get<RunConfig>();
  c.model.Validate();
  c.train.Validate();
  c.scene.Validate();
  return c;
}

}  // namespace drn::train
