#include "drn/sim/ism.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drn::sim {

namespace {

constexpr int kHalfTaps = kSincTaps / 2;
constexpr int kFracSteps = 2048;

// Windowed-sinc kernel tabulated over fractional delays in [-0.5, 0.5].
class SincTable {
 public:
  SincTable() : table_(static_cast<size_t>(kFracSteps + 1) * kSincTaps) {
    for (int r = 0; r <= kFracSteps; ++r) {
      const double frac = static_cast<double>(r) / kFracSteps - 0.5;
      for (int j = -kHalfTaps; j <= kHalfTaps; ++j) {
        const double x = j - frac;
        const double sinc =
            std::abs(x) < 1e-12
                ? 1.0
                : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double w =
            0.5 * (1.0 + std::cos(std::numbers::pi * x / (kHalfTaps + 1)));
        table_[static_cast<size_t>(r) * kSincTaps + j + kHalfTaps] = sinc * w;
      }
    }
  }

  const double* Row(double frac) const {
    const int r = static_cast<int>(std::lround((frac + 0.5) * kFracSteps));
    return table_.data() + static_cast<size_t>(r) * kSincTaps;
  }

 private:
  std::vector<double> table_;
};

const SincTable& Table() {
  static const SincTable table;
  return table;
}

void CheckInside(const RoomSpec& room, const Vec3& p, const char* what) {
  if (!room.Contains(p)) {
    throw std::invalid_argument(std::string("ISM: ") + what +
                                " lies outside the room");
  }
}

}  // namespace

size_t ImageCount(int order) {
  const size_t n = 4 * static_cast<size_t>(order) + 2;
  return n * n * n;
}

std::vector<ImageSource> ImageSources(const RoomSpec& room, const Vec3& s,
                                      int order) {
  if (order < 0) throw std::invalid_argument("ISM: order must be >= 0");
  struct Axis {
    double coord;
    int refl;
  };
  auto axis = [order](double src, double len) {
    std::vector<Axis> out;
    // Direct (n = 0, q = 0) first.
    out.push_back({src, 0});
    for (int n = -order; n <= order; ++n) {
      for (int q = 0; q <= 1; ++q) {
        if (n == 0 && q == 0) continue;
        out.push_back({(1 - 2 * q) * src + 2.0 * n * len,
                       std::abs(n - q) + std::abs(n)});
      }
    }
    return out;
  };
  const auto ax = axis(s.x, room.length);
  const auto ay = axis(s.y, room.width);
  const auto az = axis(s.z, room.height);
  std::vector<ImageSource> images;
  images.reserve(ax.size() * ay.size() * az.size());
  for (const auto& i : ax) {
    for (const auto& j : ay) {
      for (const auto& k : az) {
        images.push_back({{i.coord, j.coord, k.coord}, i.refl + j.refl + k.refl});
      }
    }
  }
  return images;
}

void AddFractionalImpulse(std::vector<double>& h, double delay, double amp) {
  const long k0 = std::lround(delay);
  const double* row = Table().Row(delay - static_cast<double>(k0));
  const long last = k0 + kHalfTaps;
  if (last < 0) return;
  if (static_cast<long>(h.size()) <= last) h.resize(last + 1, 0.0);
  for (int j = -kHalfTaps; j <= kHalfTaps; ++j) {
    const long n = k0 + j;
    if (n >= 0) h[n] += amp * row[j + kHalfTaps];
  }
}

std::vector<double> RoomImpulseResponse::Full() const {
  std::vector<double> h(std::max(direct.size(), reverb.size()), 0.0);
  for (size_t i = 0; i < direct.size(); ++i) h[i] += direct[i];
  for (size_t i = 0; i < reverb.size(); ++i) h[i] += reverb[i];
  return h;
}

std::vector<RoomImpulseResponse> ComputeRirs(const RoomSpec& room,
                                             const Vec3& source,
                                             std::span<const Vec3> mics,
                                             const IsmConfig& config) {
  room.Validate();
  CheckInside(room, source, "source");
  for (const auto& m : mics) CheckInside(room, m, "microphone");
  const auto images = ImageSources(room, source, config.order);
  const double beta = std::sqrt(std::max(0.0, 1.0 - room.absorption));
  // Each axis contributes at most 2 * order + 1 reflections.
  std::vector<double> gain(3 * (2 * config.order + 1) + 1, 1.0);
  for (size_t k = 1; k < gain.size(); ++k) gain[k] = gain[k - 1] * beta;
  const double samples_per_meter = config.sample_rate / config.speed_of_sound;

  std::vector<RoomImpulseResponse> out(mics.size());
  for (size_t m = 0; m < mics.size(); ++m) {
    auto& rir = out[m];
    for (size_t i = 0; i < images.size(); ++i) {
      const double amp_refl = gain[images[i].reflections];
      if (amp_refl == 0.0) continue;
      const double d = (images[i].position - mics[m]).Norm();
      if (d < 1e-6) throw std::invalid_argument("ISM: source on microphone");
      const double amp = amp_refl / (4.0 * std::numbers::pi * d);
      AddFractionalImpulse(i == 0 ? rir.direct : rir.reverb,
                           d * samples_per_meter, amp);
    }
  }
  return out;
}

RoomImpulseResponse ComputeRir(const RoomSpec& room, const Vec3& source,
                               const Vec3& mic, const IsmConfig& config) {
  return ComputeRirs(room, source, std::span<const Vec3>(&mic, 1), config)[0];
}

}  // namespace drn::sim
