#include "drn/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace drn::metrics {

namespace {

void Check(std::span<const double> est, std::span<const double> ref,
           const char* what) {
  if (est.size() != ref.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch");
  }
}

double RatioDb(double num, double den) {
  if (den <= 0.0) return kMetricCapDb;
  if (num <= 0.0) return -kMetricCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

}  // namespace

double SiSdr(std::span<const double> est, std::span<const double> ref) {
  Check(est, ref, "SiSdr");
  double ss = 0.0, es = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    ss += ref[i] * ref[i];
    es += est[i] * ref[i];
  }
  if (ss <= 0.0) throw std::invalid_argument("SiSdr: zero reference");
  const double alpha = es / ss;
  double target = 0.0, err = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * ref[i];
    target += t * t;
    err += (t - est[i]) * (t - est[i]);
  }
  return RatioDb(target, err);
}

double Snr(std::span<const double> est, std::span<const double> ref) {
  Check(est, ref, "Snr");
  double ss = 0.0, err = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    ss += ref[i] * ref[i];
    err += (ref[i] - est[i]) * (ref[i] - est[i]);
  }
  if (ss <= 0.0) throw std::invalid_argument("Snr: zero reference");
  return RatioDb(ss, err);
}

}  // namespace drn::metrics
