#ifndef DRN_TRAIN_COST_H_
#define DRN_TRAIN_COST_H_

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "drn/model/config.h"

namespace drn::train {

struct LayerCost {
  std::string name;
  int64_t params = 0;
  int64_t macs_per_frame = 0;
};

// Closed-form size and compute. MACs count dense matrix products per frame
// (linear layers, LSTM gates and the constant DFT matrices of the frequency
// domain); one-hot embedding layers are lookups and cost no MACs. Norms,
// activations and overlap-add are not counted.
struct CostProfile {
  std::vector<LayerCost> layers;
  int64_t params = 0;
  int64_t macs_per_frame = 0;
  double frames_per_second = 0.0;
  double macs_per_second = 0.0;
};

CostProfile ComputeCost(const model::DrnConfig& config);
void to_json(nlohmann::json& j, const CostProfile& c);

}  // namespace drn::train

#endif  // DRN_TRAIN_COST_H_
