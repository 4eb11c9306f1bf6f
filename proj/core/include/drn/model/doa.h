#ifndef DRN_MODEL_DOA_H_
#define DRN_MODEL_DOA_H_

#include <string>
#include <vector>

namespace drn::model {

// Quantized direction grid. Azimuth bins cover [0, 360) starting at 0 deg;
// elevation bins cover [-90, 90) starting at the downward pole.
struct DoaGrid {
  int azimuth_bins = 144;
  int elevation_bins = 72;

  static DoaGrid FromResolution(double azimuth_deg, double elevation_deg);

  double azimuth_resolution() const { return 360.0 / azimuth_bins; }
  double elevation_resolution() const { return 180.0 / elevation_bins; }

  // floor(az / res) mod D_phi, for any finite azimuth.
  int AzimuthIndex(double azimuth_deg) const;
  // floor((el + 90) / res), clamped to [0, D_theta - 1] so +90 lands in the
  // top bin.
  int ElevationIndex(double elevation_deg) const;

  double AzimuthCenter(int index) const;
  double ElevationCenter(int index) const;

  void Validate() const;
  bool operator==(const DoaGrid&) const = default;
};

// Per-frame grid indices.
struct DoaStream {
  std::vector<int> azimuth;
  std::vector<int> elevation;

  int frames() const { return static_cast<int>(azimuth.size()); }

  static DoaStream FromDegrees(const std::vector<double>& azimuth_deg,
                               const std::vector<double>& elevation_deg,
                               const DoaGrid& grid);
  // Constant direction for `frames` frames.
  static DoaStream Constant(int frames, int azimuth_index, int elevation_index);

  DoaStream Slice(int begin, int count) const;
  // Throws std::invalid_argument on out-of-range indices or length mismatch.
  void Validate(const DoaGrid& grid) const;
};

struct OneHotDoa {
  int frames = 0;
  std::vector<double> azimuth;    // [T x D_phi]
  std::vector<double> elevation;  // [T x D_theta]
};

OneHotDoa EncodeDoa(const DoaStream& stream, const DoaGrid& grid);

// DOA stream CSV: header "frame_index,azimuth_deg,elevation_deg".
struct DoaTrack {
  std::vector<double> azimuth_deg;
  std::vector<double> elevation_deg;

  int frames() const { return static_cast<int>(azimuth_deg.size()); }
  // Resamples a track written with frame shift `track_hop` to a model frame
  // shift `shift`: frame t takes row floor(t * shift / track_hop).
  DoaTrack Resample(int track_hop, int shift, int num_frames) const;
  DoaStream Quantize(const DoaGrid& grid) const;
};

void WriteDoaCsv(const std::string& path, const DoaTrack& track);
DoaTrack ReadDoaCsv(const std::string& path);

}  // namespace drn::model

#endif  // DRN_MODEL_DOA_H_
