#ifndef DRN_TRAIN_CONFIG_H_
#define DRN_TRAIN_CONFIG_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>

namespace drn::train {

enum class InputMode { kMics, kMaxDiInformed };

std::string ToString(InputMode m);
InputMode InputModeFromString(const std::string& s);

struct TrainConfig {
  int batch_size = 16;
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool amsgrad = true;
  double grad_clip_norm = 0.03;
  int epochs = 1;
  double tbptt_seconds = 2.0;
  uint64_t seed = 0;
  bool jitter = true;
  double jitter_mean_deg = 2.5;
  double jitter_frame_deg = 2.5;
  InputMode input = InputMode::kMics;
  int maxdi_window = 256;  // STFT size of the maxDI front end, hop = half
  int max_steps = 0;       // 0: no limit
  int log_every = 10;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace drn::train

#endif  // DRN_TRAIN_CONFIG_H_
