#ifndef DRN_UTIL_RNG_H_
#define DRN_UTIL_RNG_H_

#include <cstdint>
#include <random>

namespace drn {

// Deterministic generator with platform-independent distributions. The
// standard <random> distributions are implementation-defined, so every draw
// here is derived directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(Mix(seed)) {}

  // Independent stream for (seed, stream_id), e.g. one per utterance.
  static Rng ForStream(uint64_t seed, uint64_t stream_id) {
    return Rng(Mix(seed) ^ Mix(stream_id + 0x9e3779b97f4a7c15ULL));
  }

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer on [lo, hi] inclusive.
  int UniformInt(int lo, int hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  double Normal();

 private:
  static uint64_t Mix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace drn

#endif  // DRN_UTIL_RNG_H_
