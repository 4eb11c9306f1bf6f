#include "drn/dsp/framing.h"

#include <algorithm>
#include <stdexcept>

namespace drn::dsp {

FrameTensor FrameSignal(const Waveform& x, int shift, int window) {
  if (x.empty()) throw std::invalid_argument("FrameSignal: empty signal");
  if (shift < 1) throw std::invalid_argument("FrameSignal: shift must be >= 1");
  if (window < shift) {
    throw std::invalid_argument("FrameSignal: window must be >= shift");
  }
  FrameTensor out;
  out.channels = x.channels();
  out.frames = (x.samples() + shift - 1) / shift;
  out.window = window;
  out.shift = shift;
  out.data.assign(
      static_cast<size_t>(out.channels) * out.frames * out.window, 0.0);
  const int lead = window - shift;
  for (int c = 0; c < x.channels(); ++c) {
    auto src = x.channel(c);
    for (int t = 0; t < out.frames; ++t) {
      auto dst = out.frame(c, t);
      const int start = t * shift - lead;
      for (int i = 0; i < window; ++i) {
        const int n = start + i;
        if (n >= 0 && n < x.samples()) dst[i] = src[n];
      }
    }
  }
  return out;
}

void ApplyWindow(FrameTensor& frames, std::span<const double> window) {
  if (static_cast<int>(window.size()) != frames.window) {
    throw std::invalid_argument("ApplyWindow: window length mismatch");
  }
  for (int c = 0; c < frames.channels; ++c) {
    for (int t = 0; t < frames.frames; ++t) {
      auto f = frames.frame(c, t);
      for (int i = 0; i < frames.window; ++i) f[i] *= window[i];
    }
  }
}

Waveform OverlapAdd(const FrameTensor& frames, int shift,
                    const WindowPair& windows, double sample_rate) {
  const int out_window = frames.window;
  if (shift < 1 || out_window < shift) {
    throw std::invalid_argument("OverlapAdd: need 1 <= R <= oW");
  }
  if (static_cast<int>(windows.synthesis.size()) != out_window) {
    throw std::invalid_argument("OverlapAdd: synthesis window length != oW");
  }
  CheckCola(windows.analysis, windows.synthesis, shift);

  const int lead = out_window - shift;
  const int total = frames.frames * shift;
  Waveform out(frames.channels, total, sample_rate);
  // Work buffer holds the lead-in samples that fall before time zero.
  std::vector<double> buffer(static_cast<size_t>(lead + total), 0.0);
  for (int c = 0; c < frames.channels; ++c) {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    std::span<const double> src(
        frames.data.data() + static_cast<size_t>(c) * frames.frames * out_window,
        static_cast<size_t>(frames.frames) * out_window);
    // Frame t starts at t*R - lead, i.e. buffer index t*R. The final frame
    // ends at T*R, which is the end of the buffer.
    OverlapAddInto<double>(src, frames.frames, out_window, shift,
                           windows.synthesis, buffer);
    std::copy(buffer.begin() + lead, buffer.end(), out.channel(c).begin());
  }
  return out;
}

OverlapAdder::OverlapAdder(int shift, WindowPair windows)
    : shift_(shift), synthesis_(std::move(windows.synthesis)) {
  const int out_window = static_cast<int>(synthesis_.size());
  if (shift < 1 || out_window < shift) {
    throw std::invalid_argument("OverlapAdder: need 1 <= R <= oW");
  }
  CheckCola(windows.analysis, synthesis_, shift);
  accumulator_.assign(synthesis_.size(), 0.0);
}

std::vector<double> OverlapAdder::Push(std::span<const double> frame) {
  if (frame.size() != synthesis_.size()) {
    throw std::invalid_argument("OverlapAdder: frame length != oW");
  }
  for (size_t i = 0; i < frame.size(); ++i) {
    accumulator_[i] += synthesis_[i] * frame[i];
  }
  std::vector<double> ready(accumulator_.begin(),
                            accumulator_.begin() + shift_);
  std::rotate(accumulator_.begin(), accumulator_.begin() + shift_,
              accumulator_.end());
  std::fill(accumulator_.end() - shift_, accumulator_.end(), 0.0);
  ++frames_pushed_;
  return ready;
}

std::vector<double> OverlapAdder::Flush() const {
  return {accumulator_.begin(), accumulator_.end() - shift_};
}

void OverlapAdder::Reset() {
  std::fill(accumulator_.begin(), accumulator_.end(), 0.0);
  frames_pushed_ = 0;
}

}  // namespace drn::dsp
