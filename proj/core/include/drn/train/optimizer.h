#ifndef DRN_TRAIN_OPTIMIZER_H_
#define DRN_TRAIN_OPTIMIZER_H_

#include <vector>

#include "drn/ad/tensor.h"

namespace drn::train {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool amsgrad = true;
};

// Adam; with amsgrad the denominator uses the running maximum of the
// second-moment estimate.
template <typename T>
class Adam {
 public:
  Adam(ad::ParameterSet<T>& params, AdamConfig config);

  void Step();
  int steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  ad::ParameterSet<T>& params_;
  AdamConfig config_;
  int steps_ = 0;
  std::vector<std::vector<double>> m_, v_, vmax_;
};

// Rescales all gradients so their global L2 norm is at most `max_norm`,
// with factor max_norm / (norm + 1e-6). Returns the norm before clipping.
template <typename T>
double ClipGradNorm(ad::ParameterSet<T>& params, double max_norm);

}  // namespace drn::train

#endif  // DRN_TRAIN_OPTIMIZER_H_
