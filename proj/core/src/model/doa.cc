#include "drn/model/doa.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drn::model {

DoaGrid DoaGrid::FromResolution(double azimuth_deg, double elevation_deg) {
  DoaGrid grid;
  grid.azimuth_bins = static_cast<int>(std::lround(360.0 / azimuth_deg));
  grid.elevation_bins = static_cast<int>(std::lround(180.0 / elevation_deg));
  if (std::abs(grid.azimuth_bins * azimuth_deg - 360.0) > 1e-9 ||
      std::abs(grid.elevation_bins * elevation_deg - 180.0) > 1e-9) {
    throw std::invalid_argument(
        "DOA resolution must divide 360 (azimuth) and 180 (elevation)");
  }
  grid.Validate();
  return grid;
}

void DoaGrid::Validate() const {
  if (azimuth_bins < 1 || elevation_bins < 1) {
    throw std::invalid_argument("DoaGrid: bin counts must be >= 1");
  }
}

int DoaGrid::AzimuthIndex(double azimuth_deg) const {
  if (!std::isfinite(azimuth_deg)) {
    throw std::invalid_argument("AzimuthIndex: non-finite azimuth");
  }
  const double wrapped = azimuth_deg - 360.0 * std::floor(azimuth_deg / 360.0);
  const int idx = static_cast<int>(std::floor(wrapped / azimuth_resolution()));
  return ((idx % azimuth_bins) + azimuth_bins) % azimuth_bins;
}

int DoaGrid::ElevationIndex(double elevation_deg) const {
  if (!std::isfinite(elevation_deg)) {
    throw std::invalid_argument("ElevationIndex: non-finite elevation");
  }
  const int idx = static_cast<int>(
      std::floor((elevation_deg + 90.0) / elevation_resolution()));
  return std::clamp(idx, 0, elevation_bins - 1);
}

double DoaGrid::AzimuthCenter(int index) const {
  return (index + 0.5) * azimuth_resolution();
}

double DoaGrid::ElevationCenter(int index) const {
  return (index + 0.5) * elevation_resolution() - 90.0;
}

DoaStream DoaStream::FromDegrees(const std::vector<double>& azimuth_deg,
                                 const std::vector<double>& elevation_deg,
                                 const DoaGrid& grid) {
  if (azimuth_deg.size() != elevation_deg.size()) {
    throw std::invalid_argument("DoaStream: azimuth/elevation length mismatch");
  }
  DoaStream s;
  s.azimuth.reserve(azimuth_deg.size());
  s.elevation.reserve(elevation_deg.size());
  for (size_t t = 0; t < azimuth_deg.size(); ++t) {
    s.azimuth.push_back(grid.AzimuthIndex(azimuth_deg[t]));
    s.elevation.push_back(grid.ElevationIndex(elevation_deg[t]));
  }
  return s;
}

DoaStream DoaStream::Constant(int frames, int azimuth_index,
                              int elevation_index) {
  DoaStream s;
  s.azimuth.assign(frames, azimuth_index);
  s.elevation.assign(frames, elevation_index);
  return s;
}

DoaStream DoaStream::Slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > frames()) {
    throw std::out_of_range("DoaStream::Slice out of range");
  }
  DoaStream s;
  s.azimuth.assign(azimuth.begin() + begin, azimuth.begin() + begin + count);
  s.elevation.assign(elevation.begin() + begin,
                     elevation.begin() + begin + count);
  return s;
}

void DoaStream::Validate(const DoaGrid& grid) const {
  if (azimuth.size() != elevation.size()) {
    throw std::invalid_argument("DoaStream: azimuth/elevation length mismatch");
  }
  for (size_t t = 0; t < azimuth.size(); ++t) {
    if (azimuth[t] < 0 || azimuth[t] >= grid.azimuth_bins) {
      throw std::invalid_argument("DoaStream: azimuth index " +
                                  std::to_string(azimuth[t]) +
                                  " out of range at frame " + std::to_string(t));
    }
    if (elevation[t] < 0 || elevation[t] >= grid.elevation_bins) {
      throw std::invalid_argument("DoaStream: elevation index " +
                                  std::to_string(elevation[t]) +
                                  " out of range at frame " + std::to_string(t));
    }
  }
}

OneHotDoa EncodeDoa(const DoaStream& stream, const DoaGrid& grid) {
  stream.Validate(grid);
  OneHotDoa out;
  out.frames = stream.frames();
  out.azimuth.assign(static_cast<size_t>(out.frames) * grid.azimuth_bins, 0.0);
  out.elevation.assign(static_cast<size_t>(out.frames) * grid.elevation_bins,
                       0.0);
  for (int t = 0; t < out.frames; ++t) {
    out.azimuth[static_cast<size_t>(t) * grid.azimuth_bins +
                stream.azimuth[t]] = 1.0;
    out.elevation[static_cast<size_t>(t) * grid.elevation_bins +
                  stream.elevation[t]] = 1.0;
  }
  return out;
}

DoaTrack DoaTrack::Resample(int track_hop, int shift, int num_frames) const {
  if (frames() == 0) throw std::invalid_argument("DoaTrack: empty track");
  DoaTrack out;
  out.azimuth_deg.resize(num_frames);
  out.elevation_deg.resize(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    const long row = std::min<long>(
        static_cast<long>(t) * shift / track_hop, frames() - 1);
    out.azimuth_deg[t] = azimuth_deg[row];
    out.elevation_deg[t] = elevation_deg[row];
  }
  return out;
}

DoaStream DoaTrack::Quantize(const DoaGrid& grid) const {
  return DoaStream::FromDegrees(azimuth_deg, elevation_deg, grid);
}

void WriteDoaCsv(const std::string& path, const DoaTrack& track) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write DOA CSV: " + path);
  out << "frame_index,azimuth_deg,elevation_deg\n";
  char line[96];
  for (int t = 0; t < track.frames(); ++t) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f\n", t,
                  track.azimuth_deg[t], track.elevation_deg[t]);
    out << line;
  }
}

DoaTrack ReadDoaCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DOA CSV: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("frame_index,azimuth_deg,elevation_deg", 0) != 0) {
    throw std::runtime_error("DOA CSV missing header: " + path);
  }
  DoaTrack track;
  int expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f, a, e;
    if (!std::getline(row, f, ',') || !std::getline(row, a, ',') ||
        !std::getline(row, e, ',')) {
      throw std::runtime_error("malformed DOA CSV row in " + path + ": " + line);
    }
    if (std::stoi(f) != expected++) {
      throw std::runtime_error("DOA CSV frame indices not consecutive: " + path);
    }
    track.azimuth_deg.push_back(std::stod(a));
    track.elevation_deg.push_back(std::stod(e));
  }
  return track;
}

}  // namespace drn::model
