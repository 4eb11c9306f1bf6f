#ifndef DRN_DSP_WINDOW_H_
#define DRN_DSP_WINDOW_H_

#include <span>
#include <string>
#include <vector>

namespace drn::dsp {

enum class WindowKind {
  kRectangular,
  // Hann analysis, flat synthesis.
  kHann,
  // Square-root Hann on both sides.
  kSqrtHann,
};

std::string ToString(WindowKind kind);
WindowKind WindowKindFromString(const std::string& name);

// Hann window sampled at half-sample offsets, w[n] = sin^2(pi (n + 1/2) / N).
// Unlike the periodic Hann it has no zero taps, which keeps the first sample
// of every overlap-added frame observable.
std::vector<double> HannWindow(int size);
std::vector<double> SqrtHannWindow(int size);

struct WindowPair {
  std::vector<double> analysis;
  std::vector<double> synthesis;
};

// Analysis/synthesis pair for `kind` at frame `size` and shift `hop`, with
// the synthesis side scaled so that sum_k a[n + kH] s[n + kH] == 1.
// Throws std::invalid_argument when no constant-overlap-add scaling exists
// for this (kind, size, hop).
WindowPair MakeWindowPair(WindowKind kind, int size, int hop);

// max_n |sum_k a[n + kH] s[n + kH] - 1|.
double ColaDeviation(std::span<const double> analysis,
                     std::span<const double> synthesis, int hop);

// Throws if ColaDeviation exceeds `tolerance`.
void CheckCola(std::span<const double> analysis,
               std::span<const double> synthesis, int hop,
               double tolerance = 1e-6);

}  // namespace drn::dsp

#endif  // DRN_DSP_WINDOW_H_
