#ifndef DRN_DSP_WAVEFORM_H_
#define DRN_DSP_WAVEFORM_H_

#include <cstddef>
#include <span>
#include <vector>

namespace drn::dsp {

inline constexpr double kDefaultSampleRate = 16000.0;

// Multichannel signal stored channel-major: data[c * samples + n].
class Waveform {
 public:
  Waveform() = default;
  Waveform(int channels, int samples, double sample_rate = kDefaultSampleRate);
  Waveform(int channels, int samples, std::vector<double> data,
           double sample_rate = kDefaultSampleRate);

  int channels() const { return channels_; }
  int samples() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  bool empty() const { return samples_ == 0 || channels_ == 0; }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;

  double& at(int c, int n) { return data_[Index(c, n)]; }
  double at(int c, int n) const { return data_[Index(c, n)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Throws std::invalid_argument if any invariant is broken
  // (N >= 1, finite samples, positive rate).
  void Validate() const;

  // Copy of channel c as a mono waveform.
  Waveform Channel(int c) const;
  // Samples [begin, begin + length) of every channel; out-of-range samples
  // read as zero.
  Waveform Slice(int begin, int length) const;

 private:
  size_t Index(int c, int n) const {
    return static_cast<size_t>(c) * static_cast<size_t>(samples_) +
           static_cast<size_t>(n);
  }

  int channels_ = 0;
  int samples_ = 0;
  double sample_rate_ = kDefaultSampleRate;
  std::vector<double> data_;
};

}  // namespace drn::dsp

#endif  // DRN_DSP_WAVEFORM_H_
