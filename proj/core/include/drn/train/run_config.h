#ifndef DRN_TRAIN_RUN_CONFIG_H_
#define DRN_TRAIN_RUN_CONFIG_H_

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "drn/model/config.h"
#include "drn/sim/scene.h"
#include "drn/train/config.h"

namespace drn::train {

struct PathsConfig {
  std::string data = "data";  // directory holding <split>.jsonl manifests
  std::string speech_dir;     // empty: synthetic speech
  std::string noise_dir;      // empty: synthetic noise
};

// Everything a command needs besides manifests and checkpoints.
struct RunConfig {
  model::DrnConfig model = DeskModel();
  TrainConfig train;
  sim::SceneConfig scene;
  PathsConfig paths;

  // 16 ms geometry with H = 32, E_C = 16, E_f = 32.
  static model::DrnConfig DeskModel();
};

void to_json(nlohmann::json& j, const PathsConfig& p);
void from_json(const nlohmann::json& j, PathsConfig& p);
void to_json(nlohmann::json& j, const RunConfig& c);
// Missing keys keep their defaults; unknown keys throw.
void from_json(const nlohmann::json& j, RunConfig& c);

// Sets `dotted` (e.g. "train.lr") in `j`. The value is parsed as JSON when
// possible and taken as a string otherwise. Throws for unknown keys.
void ApplyOverride(nlohmann::json& j, const std::string& dotted,
                   const std::string& value);

// Defaults, then the optional JSON file, then overrides in order.
RunConfig ResolveRunConfig(
    const std::string& config_path,
    const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace drn::train

#endif  // DRN_TRAIN_RUN_CONFIG_H_
