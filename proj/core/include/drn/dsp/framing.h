#ifndef DRN_DSP_FRAMING_H_
#define DRN_DSP_FRAMING_H_

#include <span>
#include <vector>

#include "drn/dsp/waveform.h"
#include "drn/dsp/window.h"

namespace drn::dsp {

// C x T x W frames cut with shift R. Frame t covers input samples
// [t*R - (W - R), t*R + R); positions outside the signal are zero.
struct FrameTensor {
  int channels = 0;
  int frames = 0;
  int window = 0;
  int shift = 0;
  std::vector<double> data;  // [c][t][w]

  std::span<double> frame(int c, int t) {
    return {data.data() + Offset(c, t), static_cast<size_t>(window)};
  }
  std::span<const double> frame(int c, int t) const {
    return {data.data() + Offset(c, t), static_cast<size_t>(window)};
  }

 private:
  size_t Offset(int c, int t) const {
    return (static_cast<size_t>(c) * frames + t) * window;
  }
};

// T = ceil(N / R). Throws on an empty signal, R < 1 or W < R.
FrameTensor FrameSignal(const Waveform& x, int shift, int window);

// Multiplies every frame by `window` in place.
void ApplyWindow(FrameTensor& frames, std::span<const double> window);

// Overlap-adds `frames` (length oW) with shift R into a T*R waveform,
// placing frame t on output samples [t*R + R - oW, t*R + R). The pair's
// product must satisfy constant-overlap-add within 1e-6; only the synthesis
// side is applied here. Samples in the last oW - R positions only receive
// the frames that exist.
Waveform OverlapAdd(const FrameTensor& frames, int shift,
                    const WindowPair& windows,
                    double sample_rate = kDefaultSampleRate);

// Accumulates num_frames frames of length frame_len (row-major in `frames`)
// into `out`, frame t starting at out[t * shift]. `out` must hold
// (num_frames - 1) * shift + frame_len values.
template <typename T>
void OverlapAddInto(std::span<const T> frames, int num_frames, int frame_len,
                    int shift, std::span<const double> window,
                    std::span<T> out) {
  for (int t = 0; t < num_frames; ++t) {
    const T* src = frames.data() + static_cast<size_t>(t) * frame_len;
    T* dst = out.data() + static_cast<size_t>(t) * shift;
    for (int i = 0; i < frame_len; ++i) {
      dst[i] += static_cast<T>(window[i]) * src[i];
    }
  }
}

// Adjoint of OverlapAddInto: frames[t][i] += window[i] * buffer[t*shift + i].
template <typename T>
void FrameFromBuffer(std::span<const T> buffer, int num_frames, int frame_len,
                     int shift, std::span<const double> window,
                     std::span<T> frames) {
  for (int t = 0; t < num_frames; ++t) {
    const T* src = buffer.data() + static_cast<size_t>(t) * shift;
    T* dst = frames.data() + static_cast<size_t>(t) * frame_len;
    for (int i = 0; i < frame_len; ++i) {
      dst[i] += static_cast<T>(window[i]) * src[i];
    }
  }
}

// Streaming overlap-add for one channel. Each Push consumes one frame and
// returns the R samples that no later frame can touch. After pushing frame t
// the emitted samples are [t*R - (oW - R), t*R + R - (oW - R)) in the batch
// OverlapAdd timeline, i.e. the stream lags the batch output by oW - R.
class OverlapAdder {
 public:
  OverlapAdder(int shift, WindowPair windows);

  std::vector<double> Push(std::span<const double> frame);
  // Pending partial sums (length oW - R).
  std::vector<double> Flush() const;
  void Reset();

  int frames_pushed() const { return frames_pushed_; }

 private:
  int shift_;
  std::vector<double> synthesis_;
  std::vector<double> accumulator_;  // length oW
  int frames_pushed_ = 0;
};

}  // namespace drn::dsp

#endif  // DRN_DSP_FRAMING_H_
