#include "drn/dsp/wav_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace drn::dsp {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t ReadU16(const uint8_t* p) { return uint16_t(p[0] | p[1] << 8); }

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}
void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}
void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error("not a RIFF/WAVE file: " + path);
  }
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) break;
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = ReadU16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || data == nullptr) {
    throw std::runtime_error("WAV file missing fmt or data chunk: " + path);
  }
  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm16 = format == kFormatPcm && bits == 16;
  if (!is_float && !is_pcm16) {
    throw std::runtime_error("unsupported WAV encoding (need float32 or pcm16): " +
                             path);
  }
  const size_t frame_bytes = size_t(channels) * (bits / 8);
  const int samples = static_cast<int>(data_size / frame_bytes);
  Waveform wave(channels, samples, static_cast<double>(rate));
  for (int n = 0; n < samples; ++n) {
    for (int c = 0; c < channels; ++c) {
      const uint8_t* p = data + n * frame_bytes + c * (bits / 8);
      if (is_float) {
        uint32_t raw = ReadU32(p);
        float v;
        std::memcpy(&v, &raw, 4);
        wave.at(c, n) = v;
      } else {
        wave.at(c, n) = static_cast<int16_t>(ReadU16(p)) / 32768.0;
      }
    }
  }
  return wave;
}

void WriteWav(const std::string& path, const Waveform& wave,
              WavFormat format) {
  const uint16_t channels = static_cast<uint16_t>(wave.channels());
  const uint16_t bits = format == WavFormat::kFloat32 ? 32 : 16;
  const uint32_t rate = static_cast<uint32_t>(std::lround(wave.sample_rate()));
  const uint32_t data_size =
      uint32_t(wave.samples()) * channels * (bits / 8);

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_size);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, format == WavFormat::kFloat32 ? kFormatFloat : kFormatPcm);
  PutU16(out, channels);
  PutU32(out, rate);
  PutU32(out, rate * channels * (bits / 8));
  PutU16(out, uint16_t(channels * (bits / 8)));
  PutU16(out, bits);
  PutTag(out, "data");
  PutU32(out, data_size);
  for (int n = 0; n < wave.samples(); ++n) {
    for (int c = 0; c < channels; ++c) {
      const double v = wave.at(c, n);
      if (format == WavFormat::kFloat32) {
        const float f = static_cast<float>(v);
        uint32_t raw;
        std::memcpy(&raw, &f, 4);
        PutU32(out, raw);
      } else {
        const double clipped = std::clamp(v, -1.0, 32767.0 / 32768.0);
        PutU16(out, static_cast<uint16_t>(
                        static_cast<int16_t>(std::lround(clipped * 32768.0))));
      }
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write WAV file: " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
}

}  // namespace drn::dsp
