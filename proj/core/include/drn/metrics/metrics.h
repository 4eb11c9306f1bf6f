#ifndef DRN_METRICS_METRICS_H_
#define DRN_METRICS_METRICS_H_

#include <span>

namespace drn::metrics {

inline constexpr double kMetricCapDb = 100.0;

// Scale-invariant SDR in dB, clamped to [-100, 100]. Throws on a zero
// reference or a length mismatch.
double SiSdr(std::span<const double> est, std::span<const double> ref);

// 10 log10(|s|^2 / |s - est|^2), clamped to [-100, 100].
double Snr(std::span<const double> est, std::span<const double> ref);

}  // namespace drn::metrics

#endif  // DRN_METRICS_METRICS_H_
