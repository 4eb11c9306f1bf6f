#include "drn/dsp/waveform.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drn::dsp {

Waveform::Waveform(int channels, int samples, double sample_rate)
    : channels_(channels),
      samples_(samples),
      sample_rate_(sample_rate),
      data_(static_cast<size_t>(channels) * static_cast<size_t>(samples), 0.0) {
  if (channels < 0 || samples < 0) {
    throw std::invalid_argument("Waveform: negative dimensions");
  }
}

Waveform::Waveform(int channels, int samples, std::vector<double> data,
                   double sample_rate)
    : channels_(channels),
      samples_(samples),
      sample_rate_(sample_rate),
      data_(std::move(data)) {
  if (data_.size() !=
      static_cast<size_t>(channels) * static_cast<size_t>(samples)) {
    throw std::invalid_argument("Waveform: data size does not match C x N");
  }
}

std::span<double> Waveform::channel(int c) {
  return {data_.data() + Index(c, 0), static_cast<size_t>(samples_)};
}

std::span<const double> Waveform::channel(int c) const {
  return {data_.data() + Index(c, 0), static_cast<size_t>(samples_)};
}

void Waveform::Validate() const {
  if (channels_ < 1) throw std::invalid_argument("Waveform: no channels");
  if (samples_ < 1) throw std::invalid_argument("Waveform: empty signal");
  if (!(sample_rate_ > 0.0)) {
    throw std::invalid_argument("Waveform: sample rate must be positive");
  }
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw std::invalid_argument("Waveform: non-finite sample at index " +
                                  std::to_string(i));
    }
  }
}

Waveform Waveform::Channel(int c) const {
  Waveform out(1, samples_, sample_rate_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), out.data_.begin());
  return out;
}

Waveform Waveform::Slice(int begin, int length) const {
  Waveform out(channels_, length, sample_rate_);
  for (int c = 0; c < channels_; ++c) {
    for (int n = 0; n < length; ++n) {
      const int src = begin + n;
      if (src >= 0 && src < samples_) out.at(c, n) = at(c, src);
    }
  }
  return out;
}

}  // namespace drn::dsp
