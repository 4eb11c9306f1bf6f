#ifndef DRN_TRAIN_GRADCHECK_SUITE_H_
#define DRN_TRAIN_GRADCHECK_SUITE_H_

#include <string>
#include <vector>

#include "drn/ad/gradcheck.h"

namespace drn::train {

struct NamedGradCheck {
  std::string name;
  ad::GradCheckReport report;
};

// Finite-difference checks of every differentiable op, the PCM loss and a
// micro DRN (H = 8, C = 2, T = 4, both embedding paths) in the time and
// frequency domain, all at 64-bit.
std::vector<NamedGradCheck> RunGradCheckSuite(double step = 1e-5);

}  // namespace drn::train

#endif  // DRN_TRAIN_GRADCHECK_SUITE_H_
