#include "drn/train/optimizer.h"

#include <algorithm>
#include <cmath>

namespace drn::train {

template <typename T>
Adam<T>::Adam(ad::ParameterSet<T>& params, AdamConfig config)
    : params_(params), config_(config) {
  for (int i = 0; i < params_.count(); ++i) {
    const size_t n = params_[i].size();
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
    if (config_.amsgrad) vmax_.emplace_back(n, 0.0);
  }
}

template <typename T>
void Adam<T>::Step() {
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, steps_);
  const double c2 = 1.0 - std::pow(b2, steps_);
  for (int i = 0; i < params_.count(); ++i) {
    auto& p = params_[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t k = 0; k < p.size(); ++k) {
      const double g = p.grad()[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      double vh = v[k];
      if (config_.amsgrad) {
        vmax_[i][k] = std::max(vmax_[i][k], v[k]);
        vh = vmax_[i][k];
      }
      const double update =
          config_.lr * (m[k] / c1) / (std::sqrt(vh / c2) + config_.eps);
      p.value()[k] = static_cast<T>(p.value()[k] - update);
    }
  }
}

template <typename T>
double ClipGradNorm(ad::ParameterSet<T>& params, double max_norm) {
  const double norm = params.GradNorm();
  if (norm > max_norm) params.ScaleGrad(max_norm / (norm + 1e-6));
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double ClipGradNorm(ad::ParameterSet<float>&, double);
template double ClipGradNorm(ad::ParameterSet<double>&, double);

}  // namespace drn::train
