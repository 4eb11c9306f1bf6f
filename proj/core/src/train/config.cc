#include "drn/train/config.h"

#include <stdexcept>

namespace drn::train {

std::string ToString(InputMode m) {
  return m == InputMode::kMics ? "mics" : "maxdi_informed";
}

InputMode InputModeFromString(const std::string& s) {
  if (s == "mics") return InputMode::kMics;
  if (s == "maxdi_informed") return InputMode::kMaxDiInformed;
  throw std::invalid_argument("unknown input mode: " + s);
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("TrainConfig: ") + what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr >= 0, "lr must be >= 0");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "betas in [0, 1)");
  require(eps > 0, "eps must be positive");
  require(grad_clip_norm > 0, "grad_clip_norm must be positive");
  require(epochs >= 0, "epochs must be >= 0");
  require(tbptt_seconds > 0, "tbptt_seconds must be positive");
  require(jitter_mean_deg >= 0 && jitter_frame_deg >= 0, "jitter ranges >= 0");
  require(maxdi_window >= 2 && maxdi_window % 2 == 0, "maxdi_window must be even");
  require(max_steps >= 0 && log_every >= 1, "bad step limits");
}

#define DRN_TRAIN_FIELDS(X)                                                 \
  X(batch_size) X(lr) X(beta1) X(beta2) X(eps) X(amsgrad) X(grad_clip_norm) \
  X(epochs) X(tbptt_seconds) X(seed) X(jitter) X(jitter_mean_deg)           \
  X(jitter_frame_deg) X(maxdi_window) X(max_steps) X(log_every)

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json::object();
#define X(f) j[#f] = c.f;
  DRN_TRAIN_FIELDS(X)
#undef X
  j["input"] = ToString(c.input);
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const nlohmann::json known = TrainConfig{};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) {
      throw std::invalid_argument("unknown train config key: " + it.key());
    }
  }
  c = TrainConfig{};
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(c.f);
  DRN_TRAIN_FIELDS(X)
#undef X
  if (j.contains("input")) c.input = InputModeFromString(j.at("input").get<std::string>());
}

#undef DRN_TRAIN_FIELDS

}  // namespace drn::train
