#include "drn/dsp/window.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drn::dsp {

std::string ToString(WindowKind kind) {
  switch (kind) {
    case WindowKind::kRectangular:
      return "rectangular";
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kSqrtHann:
      return "sqrt_hann";
  }
  return "unknown";
}

WindowKind WindowKindFromString(const std::string& name) {
  if (name == "rectangular" || name == "rect") return WindowKind::kRectangular;
  if (name == "hann") return WindowKind::kHann;
  if (name == "sqrt_hann") return WindowKind::kSqrtHann;
  throw std::invalid_argument("unknown window kind: " + name);
}

std::vector<double> HannWindow(int size) {
  std::vector<double> w(static_cast<size_t>(size));
  for (int n = 0; n < size; ++n) {
    const double s = std::sin(std::numbers::pi * (n + 0.5) / size);
    w[n] = s * s;
  }
  return w;
}

std::vector<double> SqrtHannWindow(int size) {
  std::vector<double> w(static_cast<size_t>(size));
  for (int n = 0; n < size; ++n) {
    w[n] = std::sin(std::numbers::pi * (n + 0.5) / size);
  }
  return w;
}

namespace {

// sum_k a[n + kH] s[n + kH] for each n in [0, hop).
std::vector<double> OverlapSums(std::span<const double> a,
                                std::span<const double> s, int hop) {
  std::vector<double> sums(static_cast<size_t>(hop), 0.0);
  for (size_t n = 0; n < a.size(); ++n) sums[n % hop] += a[n] * s[n];
  return sums;
}

}  // namespace

double ColaDeviation(std::span<const double> analysis,
                     std::span<const double> synthesis, int hop) {
  if (analysis.size() != synthesis.size()) {
    throw std::invalid_argument("ColaDeviation: window length mismatch");
  }
  if (hop < 1 || static_cast<size_t>(hop) > analysis.size()) {
    throw std::invalid_argument("ColaDeviation: hop out of range");
  }
  double worst = 0.0;
  for (double v : OverlapSums(analysis, synthesis, hop)) {
    worst = std::max(worst, std::abs(v - 1.0));
  }
  return worst;
}

void CheckCola(std::span<const double> analysis,
               std::span<const double> synthesis, int hop, double tolerance) {
  const double dev = ColaDeviation(analysis, synthesis, hop);
  if (dev > tolerance) {
    throw std::invalid_argument(
        "window pair violates constant-overlap-add for hop " +
        std::to_string(hop) + " (deviation " + std::to_string(dev) + ")");
  }
}

WindowPair MakeWindowPair(WindowKind kind, int size, int hop) {
  if (size < 1 || hop < 1 || hop > size) {
    throw std::invalid_argument("MakeWindowPair: need 1 <= hop <= size");
  }
  WindowPair pair;
  switch (kind) {
    case WindowKind::kRectangular:
      pair.analysis.assign(size, 1.0);
      pair.synthesis.assign(size, 1.0);
      break;
    case WindowKind::kHann:
      pair.analysis = HannWindow(size);
      pair.synthesis.assign(size, 1.0);
      break;
    case WindowKind::kSqrtHann:
      pair.analysis = SqrtHannWindow(size);
      pair.synthesis = SqrtHannWindow(size);
      break;
  }
  // Scale the synthesis side by the (constant) overlap sum; a non-constant
  // sum means the pair cannot satisfy COLA at this hop.
  const auto sums = OverlapSums(pair.analysis, pair.synthesis, hop);
  const double gain = sums[0];
  for (double v : sums) {
    if (std::abs(v - gain) > 1e-9 * std::max(1.0, std::abs(gain))) {
      throw std::invalid_argument("window " + ToString(kind) + " of size " +
                                  std::to_string(size) +
                                  " is not COLA at hop " + std::to_string(hop));
    }
  }
  for (double& v : pair.synthesis) v /= gain;
  return pair;
}

}  // namespace drn::dsp
