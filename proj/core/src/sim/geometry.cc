#include "drn/sim/geometry.h"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace drn::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

Vec3 DirectionFromDoa(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDeg, el = elevation_deg * kDeg;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

bool RoomSpec::Contains(const Vec3& p) const {
  return p.x >= 0 && p.x <= length && p.y >= 0 && p.y <= width && p.z >= 0 &&
         p.z <= height;
}

double RoomSpec::WallDistance(const Vec3& p) const {
  return std::min({p.x, length - p.x, p.y, width - p.y, p.z, height - p.z});
}

void RoomSpec::Validate() const {
  if (!(length > 0 && width > 0 && height > 0)) {
    throw std::invalid_argument("RoomSpec: dimensions must be positive");
  }
  if (!(absorption >= 0.0 && absorption <= 1.0)) {
    throw std::invalid_argument("RoomSpec: absorption must be in [0, 1]");
  }
}

ArrayGeometry ArrayGeometry::Circular(int channels, double radius) {
  if (channels < 1) throw std::invalid_argument("array needs >= 1 mic");
  ArrayGeometry a;
  for (int c = 0; c < channels; ++c) {
    const double phi = 2.0 * std::numbers::pi * c / channels;
    a.local.push_back(channels == 1 ? Vec3{}
                                    : Vec3{radius * std::cos(phi),
                                           radius * std::sin(phi), 0.0});
  }
  return a;
}

std::array<double, 9> ArrayGeometry::Rotation() const {
  const double cy = std::cos(yaw_deg * kDeg), sy = std::sin(yaw_deg * kDeg);
  const double cp = std::cos(pitch_deg * kDeg), sp = std::sin(pitch_deg * kDeg);
  const double cr = std::cos(roll_deg * kDeg), sr = std::sin(roll_deg * kDeg);
  // Rz(yaw) * Ry(pitch) * Rx(roll), row-major.
  return {cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
          sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
          -sp,     cp * sr,                cp * cr};
}

Vec3 ArrayGeometry::ToRoomFrame(const Vec3& v) const {
  const auto r = Rotation();
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z,
          r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

Vec3 ArrayGeometry::ToArrayFrame(const Vec3& v) const {
  const auto r = Rotation();
  return {r[0] * v.x + r[3] * v.y + r[6] * v.z,
          r[1] * v.x + r[4] * v.y + r[7] * v.z,
          r[2] * v.x + r[5] * v.y + r[8] * v.z};
}

std::vector<Vec3> ArrayGeometry::Positions() const {
  std::vector<Vec3> out;
  out.reserve(local.size());
  for (const auto& l : local) out.push_back(center + ToRoomFrame(l));
  return out;
}

double ArrayGeometry::MaxRadius() const {
  double r = 0.0;
  for (const auto& l : local) r = std::max(r, l.Norm());
  return r;
}

Doa DoaOf(const Vec3& source, const ArrayGeometry& array) {
  const Vec3 v = array.ToArrayFrame(source - array.center);
  const double n = v.Norm();
  if (n < 1e-12) throw std::invalid_argument("DoaOf: source at array center");
  double az = std::atan2(v.y, v.x) / kDeg;
  if (az < 0) az += 360.0;
  if (az >= 360.0) az -= 360.0;
  const double el = std::atan2(v.z, std::hypot(v.x, v.y)) / kDeg;
  return {az, el};
}

double AzimuthSeparation(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

void to_json(nlohmann::json& j, const Vec3& v) { j = {v.x, v.y, v.z}; }
void from_json(const nlohmann::json& j, Vec3& v) {
  v = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void to_json(nlohmann::json& j, const RoomSpec& r) {
  j = {{"length", r.length},
       {"width", r.width},
       {"height", r.height},
       {"absorption", r.absorption}};
}
void from_json(const nlohmann::json& j, RoomSpec& r) {
  j.at("length").get_to(r.length);
  j.at("width").get_to(r.width);
  j.at("height").get_to(r.height);
  j.at("absorption").get_to(r.absorption);
}

void to_json(nlohmann::json& j, const ArrayGeometry& a) {
  j = {{"center", a.center},
       {"yaw_deg", a.yaw_deg},
       {"pitch_deg", a.pitch_deg},
       {"roll_deg", a.roll_deg},
       {"local", a.local}};
}
void from_json(const nlohmann::json& j, ArrayGeometry& a) {
  j.at("center").get_to(a.center);
  j.at("yaw_deg").get_to(a.yaw_deg);
  j.at("pitch_deg").get_to(a.pitch_deg);
  j.at("roll_deg").get_to(a.roll_deg);
  j.at("local").get_to(a.local);
}

}  // namespace drn::sim
