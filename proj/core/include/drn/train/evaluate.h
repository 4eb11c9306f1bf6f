#ifndef DRN_TRAIN_EVALUATE_H_
#define DRN_TRAIN_EVALUATE_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "drn/baselines/mcwf.h"
#include "drn/dsp/stft.h"
#include "drn/metrics/report.h"
#include "drn/model/drn.h"
#include "drn/sim/dataset.h"
#include "drn/sim/render.h"
#include "drn/train/config.h"

namespace drn::train {

enum class System { kDrn, kMcwf, kMaxDiInformed, kPassthrough };

std::string ToString(System s);
// Accepts drn, mcwf, maxdi-informed, passthrough.
System SystemFromString(const std::string& s);

// Maps an utterance to a [1 x N] estimate of the mic-0 target. The DOA
// offset is added to every azimuth of the conditioning track. Must be safe
// to call from several threads.
using Estimator =
    std::function<dsp::Waveform(const sim::Utterance&, double offset_deg)>;

Estimator PassthroughEstimator();

// DRN inference; a maxDI-informed model is recognized from `config.input`.
Estimator ModelEstimator(std::shared_ptr<const model::DrnModel<float>> model,
                         const TrainConfig& config);

struct McwfOptions {
  sim::SceneConfig scene;  // render settings the corpus was made with
  baselines::McwfConfig mcwf;
  std::string speech_dir;
  std::string noise_dir;
};

// Oracle MCWF. The scene is re-rendered to obtain the scheduled talker's
// multichannel direct path; statistics reset at each switch.
Estimator McwfEstimator(McwfOptions options);

struct EvalOptions {
  int workers = 1;
  double offset_deg = 0.0;
};

// One row per record in manifest order. Failures become error rows.
metrics::MetricReport Evaluate(const Estimator& estimator,
                               const std::vector<sim::ManifestRecord>& records,
                               const std::string& manifest_dir,
                               const EvalOptions& options = {});
metrics::MetricReport Evaluate(const Estimator& estimator,
                               const std::string& manifest,
                               const EvalOptions& options = {});

// "a:step:b" (inclusive) or a comma list.
std::vector<double> ParseOffsets(const std::string& spec);

struct SweepPoint {
  double offset_deg = 0.0;
  metrics::Aggregate delta_snr;
};

std::vector<SweepPoint> DeltaSnrSweep(
    const Estimator& estimator, const std::string& manifest,
    const std::vector<double>& offsets, const EvalOptions& options = {},
    std::vector<metrics::MetricReport>* reports = nullptr);

// Columns offset_deg,mean_delta_snr,ci95,count.
void WriteSweepCsv(const std::string& path,
                   const std::vector<SweepPoint>& points);

// Magnitudes, row-major [F x T].
struct MagnitudeGrid {
  int bins = 0;
  int frames = 0;
  std::vector<double> data;

  double at(int f, int t) const { return data[f * frames + t]; }
};

MagnitudeGrid Magnitudes(std::span<const double> x,
                         const dsp::StftConfig& stft);

struct SegmentScore {
  int begin = 0;
  int end = 0;
  int active = 0;
  std::vector<double> si_sdr_db;  // per talker
};

struct SwitchDemoResult {
  MagnitudeGrid noisy;
  MagnitudeGrid enhanced;
  MagnitudeGrid target;
  std::vector<SegmentScore> segments;
  dsp::Waveform estimate;

  // Each segment scores highest against its scheduled talker.
  bool Flipped() const;
};

struct SwitchDemoOptions {
  dsp::StftConfig stft{512, 256, dsp::WindowKind::kHann};
  // Samples skipped at the start of each segment before scoring.
  double settle_seconds = 0.25;
};

sim::Utterance ToUtterance(const sim::UtteranceBundle& bundle,
                           const std::string& id);

SwitchDemoResult SwitchDemo(const Estimator& estimator,
                            const sim::UtteranceBundle& bundle,
                            const SwitchDemoOptions& options = {});

// noisy/enhanced/target as CSV and PGM, plus segments.csv.
void WriteSwitchDemo(const std::string& dir, const SwitchDemoResult& result);

}  // namespace drn::train

#endif  // DRN_TRAIN_EVALUATE_H_
