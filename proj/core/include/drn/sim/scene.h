#ifndef DRN_SIM_SCENE_H_
#define DRN_SIM_SCENE_H_

#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "drn/sim/geometry.h"
#include "drn/util/rng.h"

namespace drn::sim {

// kEasy: one target, no interferers. kSwitchDemo: two targets, one switch,
// anechoic room, no interferers, one noise source.
enum class SceneMode { kStandard, kEasy, kSwitchDemo };
enum class Split { kTrain, kVal, kTest };

std::string ToString(SceneMode m);
std::string ToString(Split s);
SceneMode SceneModeFromString(const std::string& s);
Split SplitFromString(const std::string& s);

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool Contains(double v, double tol = 1e-9) const {
    return v >= min - tol && v <= max + tol;
  }
  bool operator==(const Range&) const = default;
};

struct SceneConfig {
  double clip_seconds = 4.0;
  double sample_rate = 16000.0;
  int channels = 8;
  double array_radius = 0.10;
  Range room_length{3.0, 10.0};
  Range room_width{3.0, 10.0};
  Range room_height{2.0, 5.0};
  Range absorption{0.1, 0.4};
  double wall_margin = 0.3;
  int targets_min = 1;
  int targets_max = 5;
  Range target_distance{0.5, 2.5};
  double min_target_separation_deg = 20.0;
  double interferer_probability = 0.75;
  int interferers_min = 1;
  int interferers_max = 10;
  double interferer_min_distance = 3.0;
  int noises_min = 1;
  int noises_max = 10;
  double noise_min_distance = 0.5;
  double nominal_level_dbfs = -25.0;
  Range target_level_db{-2.5, 2.5};
  Range noise_level_db{-2.5, 2.5};
  Range interferer_level_db{-10.0, -5.0};
  Range sir_db{5.0, 10.0};
  Range snr_db{-5.0, 10.0};
  int max_switches = 2;
  double switch_jitter = 0.05;  // fraction of the clip, train split only
  int ism_order = 6;
  int max_retries = 10000;
  int placement_tries = 200;  // per source before the room is resampled
  int doa_hop = 16;           // samples per DOA track row

  int clip_samples() const {
    return static_cast<int>(std::lround(clip_seconds * sample_rate));
  }
  void Validate() const;
  bool operator==(const SceneConfig&) const = default;
};

// Scene config with the per-mode restrictions applied.
SceneConfig ApplyMode(SceneConfig config, SceneMode mode);

struct SwitchEvent {
  int sample = 0;  // first sample of the segment
  int talker = 0;
  bool operator==(const SwitchEvent&) const = default;
};

enum class ScheduleMode { kTest, kTrain };

// n_switches + 1 segments with distinct talkers in random order. Test mode
// splits at i * N / (n + 1); train mode adds U(-jitter, jitter) * N to each
// split. Throws if n_switches > K - 1 or n_switches < 0.
std::vector<SwitchEvent> MakeSwitchSchedule(int num_talkers, int n_switches,
                                            int clip_samples,
                                            ScheduleMode mode, Rng& rng,
                                            double jitter = 0.05);
int ActiveTalker(const std::vector<SwitchEvent>& schedule, int sample);

struct SceneSpec {
  uint64_t seed = 0;
  SceneMode mode = SceneMode::kStandard;
  Split split = Split::kTrain;
  int samples = 0;
  double sample_rate = 16000.0;
  RoomSpec room;
  ArrayGeometry array;
  std::vector<Vec3> targets;
  std::vector<Vec3> interferers;
  std::vector<Vec3> noises;
  bool interferers_present = false;
  std::vector<double> target_level_db;      // relative to nominal
  std::vector<double> interferer_level_db;  // relative to nominal
  std::vector<double> noise_level_db;       // relative to nominal
  double nominal_level_dbfs = -25.0;
  double sir_db = 0.0;
  double snr_db = 0.0;
  int n_switches = 0;
  std::vector<SwitchEvent> schedule;
  int retries = 0;  // rooms rejected before this one

  std::vector<Doa> TargetDoas() const;
};

// Draws a scene for (seed, mode, split). Pure in its arguments. Throws
// std::runtime_error when no valid placement is found within
// config.max_retries room draws.
SceneSpec SampleScene(uint64_t seed, const SceneConfig& config,
                      SceneMode mode = SceneMode::kStandard,
                      Split split = Split::kTrain);

// Every violated constraint as a readable line; empty when valid.
std::vector<std::string> CheckSceneConstraints(const SceneSpec& scene,
                                               const SceneConfig& config);

void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
void to_json(nlohmann::json& j, const SceneConfig& c);
void from_json(const nlohmann::json& j, SceneConfig& c);
void to_json(nlohmann::json& j, const SwitchEvent& e);
void from_json(const nlohmann::json& j, SwitchEvent& e);
void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);

}  // namespace drn::sim

#endif  // DRN_SIM_SCENE_H_
