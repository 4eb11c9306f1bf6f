#ifndef DRN_SIM_RENDER_H_
#define DRN_SIM_RENDER_H_

#include <cstdint>
#include <vector>

#include "drn/dsp/waveform.h"
#include "drn/model/doa.h"
#include "drn/sim/scene.h"
#include "drn/sim/signals.h"

namespace drn::sim {

// Unscaled source images at the array, each [C x N].
struct SourceImages {
  std::vector<dsp::Waveform> target_direct;
  std::vector<dsp::Waveform> target_reverb;
  std::vector<dsp::Waveform> interferer;  // direct + reverb
  std::vector<dsp::Waveform> noise;       // direct + reverb
};

struct MixGains {
  std::vector<double> target;      // per talker
  std::vector<double> interferer;  // per source, before the group scale
  std::vector<double> noise;       // per source, before the group scale
  double interferer_scale = 1.0;
  double noise_scale = 1.0;
  bool interferer_clamped = false;
  double reference_power = 0.0;  // quietest scaled target direct path, mic 0
};

struct UtteranceBundle {
  SceneSpec scene;
  dsp::Waveform mixture;                   // Y
  dsp::Waveform target;                    // [1 x N] switched direct path, mic 0
  std::vector<dsp::Waveform> talker_direct;  // scaled S_dk
  dsp::Waveform direct;                    // S_d, summed in talker order
  dsp::Waveform reverb;                    // S_R, summed in talker order
  dsp::Waveform interference;
  dsp::Waveform noise;
  model::DoaTrack doa;  // one row per `doa_hop` samples
  int doa_hop = 16;
  MixGains gains;
};

// Renders every source through its room impulse responses. Dry signals are
// drawn from `provider` with a generator derived from the scene seed.
SourceImages RenderSourceImages(const SceneSpec& scene,
                                DrySignalProvider& provider,
                                const SceneConfig& config);

// Applies the level plan of `scene` and accumulates
// Y = ((S_d + S_R) + I) + N in 64-bit. Throws std::invalid_argument for a
// silent target or mismatched shapes.
UtteranceBundle ScaleAndMix(const SceneSpec& scene, const SourceImages& images,
                            int doa_hop = 16);

UtteranceBundle RenderScene(const SceneSpec& scene, DrySignalProvider& provider,
                            const SceneConfig& config);

// Ground-truth DOA of the scheduled talker; row i follows sample i * hop.
model::DoaTrack BuildDoaTrack(const SceneSpec& scene, int hop);

// Largest |Y - (((S_d + S_R) + I) + N)| and |S_d - sum_k S_dk|; both are
// exactly zero for a bundle produced by ScaleAndMix.
double MixingResidual(const UtteranceBundle& bundle);

struct JitterConfig {
  double mean_range_deg = 2.5;   // per-utterance offset ~ U(-r, r)
  double frame_range_deg = 2.5;  // per-row offset ~ U(-r, r)
};

// Adds a per-utterance offset plus per-row noise, independently to azimuth
// (wrapped to [0, 360)) and elevation (clamped to [-90, 90]). The drawn
// offsets are reported through `mean_offset` when non-null.
model::DoaTrack JitterDoa(const model::DoaTrack& truth, Rng& rng,
                          const JitterConfig& config = {},
                          Doa* mean_offset = nullptr);

}  // namespace drn::sim

#endif  // DRN_SIM_RENDER_H_
