#ifndef DRN_MODEL_CONFIG_H_
#define DRN_MODEL_CONFIG_H_

#include <nlohmann/json.hpp>
#include <string>

#include "drn/dsp/window.h"
#include "drn/model/doa.h"

namespace drn::model {

enum class Domain { kTime, kFrequency };
enum class EmbeddingMode { kAzimuth, kAzimuthElevation };
// kNone disables both DOA paths (the plain enhancement model used by the
// maxDI-informed baseline).
enum class FusionMode { kNone, kChannelwise, kFramewise, kBoth };

std::string ToString(Domain d);
std::string ToString(EmbeddingMode m);
std::string ToString(FusionMode m);
Domain DomainFromString(const std::string& s);
EmbeddingMode EmbeddingModeFromString(const std::string& s);
FusionMode FusionModeFromString(const std::string& s);

struct DrnConfig {
  int channels = 8;
  int shift = 16;          // R
  int input_window = 64;   // iW
  int output_window = 32;  // oW, the algorithmic latency in samples
  int hidden = 128;        // H
  int channel_embed = 64;  // E_C
  int frame_embed = 128;   // E_f
  int lstm_layers = 4;
  int framewise_hidden_layers = 3;
  double sample_rate = 16000.0;
  DoaGrid grid;
  Domain domain = Domain::kTime;
  EmbeddingMode embedding = EmbeddingMode::kAzimuthElevation;
  FusionMode fusion = FusionMode::kBoth;

  // 2 ms latency: R = 16, iW = 64, oW = 32 at 16 kHz.
  static DrnConfig LowLatency2ms();
  // 16 ms latency: R = 128, iW = 256, oW = 256.
  static DrnConfig Latency16ms();

  bool uses_channelwise() const {
    return fusion == FusionMode::kChannelwise || fusion == FusionMode::kBoth;
  }
  bool uses_framewise() const {
    return fusion == FusionMode::kFramewise || fusion == FusionMode::kBoth;
  }
  bool uses_elevation() const {
    return embedding == EmbeddingMode::kAzimuthElevation;
  }
  bool uses_doa() const { return fusion != FusionMode::kNone; }

  // Per-frame feature width entering the input projection.
  int input_features() const;
  // Width of the output projection.
  int output_features() const;
  // Number of LSTM outputs fused with a frame-wise embedding layer.
  int framewise_fusions() const;
  // Frames for an utterance of `samples` samples: ceil(N / R).
  int NumFrames(int samples) const { return (samples + shift - 1) / shift; }

  // Synthesis/analysis pair used for the output overlap-add: rectangular
  // when oW == R, square-root Hann otherwise.
  dsp::WindowPair OutputWindows() const;

  void Validate() const;
  bool operator==(const DrnConfig&) const = default;
};

void to_json(nlohmann::json& j, const DrnConfig& c);
void from_json(const nlohmann::json& j, DrnConfig& c);

}  // namespace drn::model

#endif  // DRN_MODEL_CONFIG_H_
