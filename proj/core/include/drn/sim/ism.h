#ifndef DRN_SIM_ISM_H_
#define DRN_SIM_ISM_H_

#include <span>
#include <vector>

#include "drn/sim/geometry.h"

namespace drn::sim {

struct IsmConfig {
  int order = 6;
  double sample_rate = 16000.0;
  double speed_of_sound = kSpeedOfSound;
};

inline constexpr int kSincTaps = 81;

struct ImageSource {
  Vec3 position;
  int reflections = 0;
};

// Full image lattice with |n| <= order per axis: (4 * order + 2)^3 images,
// the direct source first.
std::vector<ImageSource> ImageSources(const RoomSpec& room, const Vec3& source,
                                      int order);
size_t ImageCount(int order);

// Impulse response split into the direct path and all reflections. Both
// start at t = 0; taps that would fall before t = 0 are dropped.
struct RoomImpulseResponse {
  std::vector<double> direct;
  std::vector<double> reverb;

  std::vector<double> Full() const;
};

// Each image adds (1 - a)^(reflections / 2) / (4 pi d) at delay d / c,
// rendered with an 81-tap Hann-windowed sinc. Throws if the source or a mic
// lies outside the room.
std::vector<RoomImpulseResponse> ComputeRirs(const RoomSpec& room,
                                             const Vec3& source,
                                             std::span<const Vec3> mics,
                                             const IsmConfig& config = {});
RoomImpulseResponse ComputeRir(const RoomSpec& room, const Vec3& source,
                               const Vec3& mic, const IsmConfig& config = {});

// Adds amp * windowed-sinc(n - delay) to h for the 81 taps around `delay`.
// h grows as needed; taps before index 0 are dropped.
void AddFractionalImpulse(std::vector<double>& h, double delay, double amp);

}  // namespace drn::sim

#endif  // DRN_SIM_ISM_H_
