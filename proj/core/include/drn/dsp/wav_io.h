#ifndef DRN_DSP_WAV_IO_H_
#define DRN_DSP_WAV_IO_H_

#include <string>

#include "drn/dsp/waveform.h"

namespace drn::dsp {

enum class WavFormat { kFloat32, kPcm16 };

// RIFF/WAVE reader for 16-bit PCM and 32-bit IEEE float; channel order is
// the interleaving order (microphone 0..C-1). Throws std::runtime_error.
Waveform ReadWav(const std::string& path);

void WriteWav(const std::string& path, const Waveform& wave,
              WavFormat format = WavFormat::kFloat32);

}  // namespace drn::dsp

#endif  // DRN_DSP_WAV_IO_H_
