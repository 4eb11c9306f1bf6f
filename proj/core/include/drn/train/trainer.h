#ifndef DRN_TRAIN_TRAINER_H_
#define DRN_TRAIN_TRAINER_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "drn/baselines/beamformer.h"
#include "drn/dsp/waveform.h"
#include "drn/model/drn.h"
#include "drn/sim/dataset.h"
#include "drn/train/config.h"
#include "drn/train/optimizer.h"

namespace drn::train {

// Model-ready utterance.
struct Prepared {
  std::string id;
  dsp::Waveform input;             // [C_model x N]
  std::vector<double> target;      // [N]
  std::vector<double> reference;   // mic 0 of the mixture, [N]
  model::DoaStream doa;            // one row per model frame
};

// Builds the model input: optional maxDI channel, DOA track resampled to the
// model frame shift and quantized. `jitter_rng` enables training jitter.
Prepared Prepare(const sim::Utterance& u, const model::DrnConfig& model_cfg,
                 const TrainConfig& train_cfg, Rng* jitter_rng,
                 baselines::MaxDiCache* maxdi,
                 double azimuth_offset_deg = 0.0);

// Model config consistency with the input mode.
void CheckInputMode(const model::DrnConfig& model_cfg, const TrainConfig& cfg,
                    int mic_channels);

struct StepStats {
  int step = 0;
  double loss = 0.0;        // mean segment loss before the update
  double grad_norm = 0.0;   // before clipping
  double clipped_norm = 0.0;
};

// Truncated BPTT: each utterance is cut into tbptt_seconds segments; the
// recurrent, framing and overlap-add state is carried across segments with
// gradients stopped, and every segment index triggers one optimizer update
// over the batch.
class Trainer {
 public:
  Trainer(model::DrnModel<float>& model, TrainConfig config);

  // Processes all segments of `batch`; returns one entry per update.
  std::vector<StepStats> TrainBatch(const std::vector<Prepared>& batch);

  // Loss of the segment-wise forward with state carried and no updates.
  double SegmentedLoss(const Prepared& u) const;
  // Whole-utterance loss with no updates.
  double FullLoss(const Prepared& u) const;

  int steps() const { return optimizer_.steps(); }
  int segment_frames() const { return segment_frames_; }

 private:
  model::DrnModel<float>& model_;
  TrainConfig config_;
  Adam<float> optimizer_;
  int segment_frames_;
};

// PCM loss of model outputs for times [begin, begin + est.size()); samples
// outside the utterance count as zeros.
ad::Tensor<float> AlignedLoss(const ad::Tensor<float>& est, const Prepared& u,
                              int begin);

struct TrainOptions {
  std::string train_manifest;
  std::string val_manifest;  // optional
  std::string out_dir;
  int workers = 1;
  std::function<void(const std::string&)> log;
};

struct EpochRecord {
  int epoch = 0;
  int step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::string checkpoint;
  bool best = false;
};

struct TrainResult {
  std::vector<StepStats> steps;
  std::vector<EpochRecord> epochs;
  std::string best_checkpoint;
};

// Full training run. Writes loss.csv (step, train_loss, val_loss),
// epoch_NNN.ckpt per epoch, best.ckpt and checkpoints.json. Throws
// std::runtime_error on a non-finite loss or gradient, naming the batch.
TrainResult Train(model::DrnModel<float>& model, const TrainConfig& config,
                  const TrainOptions& options);

// Checkpoints carry the model and train configs in their metadata.
void SaveModel(const std::string& path, const model::DrnModel<float>& model,
               const TrainConfig& config,
               const nlohmann::json& extra = nlohmann::json::object());
struct LoadedModel {
  std::unique_ptr<model::DrnModel<float>> model;
  TrainConfig train;
  nlohmann::json meta;
};
LoadedModel LoadModel(const std::string& path);

}  // namespace drn::train

#endif  // DRN_TRAIN_TRAINER_H_
