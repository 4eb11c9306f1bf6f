#ifndef DRN_AD_GRADCHECK_H_
#define DRN_AD_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "drn/ad/tensor.h"

namespace drn::ad {

// |a - n| / max(|a|, |n|, floor).
double RelativeError(double analytic, double numeric, double floor = 1e-8);

struct GradCheckEntry {
  std::string name;  // parameter name or "input"
  size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  size_t checked = 0;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  // Worst entry per parameter, in parameter order.
  std::vector<GradCheckEntry> per_parameter;

  bool Passed(double tolerance) const { return max_rel_error < tolerance; }
};

// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Tensor<double>(Graph<double>&)>;

// Compares reverse-mode gradients of every parameter element against
// central differences with step `step`.
GradCheckReport CheckParameterGradients(ParameterSet<double>& params,
                                        const LossBuilder& build_loss,
                                        double step = 1e-5);

// Same for a free input vector: `build_loss(graph, input)` must create the
// input with Graph::Variable from the supplied values.
using InputLossBuilder =
    std::function<Tensor<double>(Graph<double>&, const std::vector<double>&,
                                 Tensor<double>* input_out)>;
GradCheckReport CheckInputGradients(const std::vector<double>& input,
                                    const InputLossBuilder& build_loss,
                                    double step = 1e-5);

}  // namespace drn::ad

#endif  // DRN_AD_GRADCHECK_H_
