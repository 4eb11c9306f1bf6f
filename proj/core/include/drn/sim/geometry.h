#ifndef DRN_SIM_GEOMETRY_H_
#define DRN_SIM_GEOMETRY_H_

#include <array>
#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

namespace drn::sim {

inline constexpr double kSpeedOfSound = 343.0;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double Dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double Norm() const { return std::sqrt(Dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

// Unit vector for azimuth (from +x towards +y) and elevation (from the
// x-y plane towards +z), in degrees.
Vec3 DirectionFromDoa(double azimuth_deg, double elevation_deg);

// Shoebox room [0, L] x [0, W] x [0, H] with a single wideband absorption
// coefficient shared by all walls.
struct RoomSpec {
  double length = 5.0;
  double width = 4.0;
  double height = 3.0;
  double absorption = 0.25;

  bool Contains(const Vec3& p) const;
  // Distance from p to the nearest wall, floor or ceiling.
  double WallDistance(const Vec3& p) const;
  // Throws on non-positive dimensions or absorption outside [0, 1].
  void Validate() const;
  bool operator==(const RoomSpec&) const = default;
};

// Microphone array: local offsets rotated by yaw (about z), then pitch
// (about y), then roll (about x), and translated to `center`.
struct ArrayGeometry {
  Vec3 center;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  std::vector<Vec3> local;  // offsets in the array frame

  // C mics on a circle of `radius` in the array x-y plane, mic 0 on +x.
  static ArrayGeometry Circular(int channels = 8, double radius = 0.10);

  int channels() const { return static_cast<int>(local.size()); }
  // Mic positions in room coordinates.
  std::vector<Vec3> Positions() const;
  // Rotation from array frame to room frame.
  std::array<double, 9> Rotation() const;
  Vec3 ToArrayFrame(const Vec3& room_vector) const;
  Vec3 ToRoomFrame(const Vec3& array_vector) const;
  double MaxRadius() const;
  bool operator==(const ArrayGeometry&) const = default;
};

struct Doa {
  double azimuth_deg = 0.0;    // [0, 360)
  double elevation_deg = 0.0;  // [-90, 90]
};

// Direction of `source` seen from the array center, in the array frame.
// Throws std::invalid_argument when the source coincides with the center.
Doa DoaOf(const Vec3& source, const ArrayGeometry& array);

// Smallest absolute azimuth difference in degrees, in [0, 180].
double AzimuthSeparation(double a_deg, double b_deg);

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const RoomSpec& r);
void from_json(const nlohmann::json& j, RoomSpec& r);
void to_json(nlohmann::json& j, const ArrayGeometry& a);
void from_json(const nlohmann::json& j, ArrayGeometry& a);

}  // namespace drn::sim

#endif  // DRN_SIM_GEOMETRY_H_
