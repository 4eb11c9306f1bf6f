#ifndef DRN_SIM_DATASET_H_
#define DRN_SIM_DATASET_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drn/dsp/waveform.h"
#include "drn/model/doa.h"
#include "drn/sim/render.h"
#include "drn/sim/scene.h"

namespace drn::sim {

// One manifest line. Paths are relative to the manifest directory.
struct ManifestRecord {
  std::string id;
  Split split = Split::kTrain;
  SceneMode mode = SceneMode::kStandard;
  uint64_t seed = 0;
  std::string mixture;
  std::string target;
  std::string doa;
  std::string scene;
  int doa_hop = 16;
  int num_talkers = 1;
  int n_switches = 0;
};

void to_json(nlohmann::json& j, const ManifestRecord& r);
void from_json(const nlohmann::json& j, ManifestRecord& r);

// JSON lines; records keep their order.
void WriteManifest(const std::string& path,
                   const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> ReadManifest(const std::string& path);

struct Utterance {
  std::string id;
  dsp::Waveform mixture;  // [C x N]
  dsp::Waveform target;   // [1 x N]
  model::DoaTrack doa;
  int doa_hop = 16;
  SceneSpec scene;
};

// Writes <dir>/<id>_mix.wav, _target.wav, _doa.csv and _scene.json.
ManifestRecord WriteBundle(const UtteranceBundle& bundle,
                           const std::string& dir, const std::string& id);
// Throws std::runtime_error naming the missing or malformed file.
Utterance LoadUtterance(const ManifestRecord& record,
                        const std::string& manifest_dir);

// Scene seed for utterance `index` of `split`; splits never share seeds.
uint64_t SceneSeed(uint64_t base_seed, Split split, int index);

struct GenerateOptions {
  std::string out_dir;
  Split split = Split::kTrain;
  SceneMode mode = SceneMode::kStandard;
  int count = 0;
  uint64_t seed = 1;
  int workers = 1;
  std::string speech_dir;
  std::string noise_dir;
  // Called after each finished utterance with (done, total).
  std::function<void(int, int)> progress;
};

// Renders `count` utterances into out_dir/<split>/ and writes
// out_dir/<split>.jsonl. A scene that fails its constraint check or
// rendering is resampled with the next seed and the event logged to stderr.
std::vector<ManifestRecord> GenerateSplit(const SceneConfig& config,
                                          const GenerateOptions& options);

}  // namespace drn::sim

#endif  // DRN_SIM_DATASET_H_
