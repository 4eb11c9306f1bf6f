#include "drn/ad/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace drn::ad {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr const char* kFormat = "drn-checkpoint";
constexpr int kVersion = 1;

struct RawCheckpoint {
  nlohmann::json header;
  std::vector<float> data;
};

RawCheckpoint ReadRaw(const std::string& path, bool with_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len == 0 || header_len > (1ULL << 30)) {
    throw std::runtime_error("corrupt checkpoint header: " + path);
  }
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  RawCheckpoint raw;
  raw.header = nlohmann::json::parse(text);
  if (raw.header.value("format", "") != kFormat) {
    throw std::runtime_error("not a drn checkpoint: " + path);
  }
  if (with_data) {
    std::vector<char> rest((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    if (rest.size() % sizeof(float) != 0) {
      throw std::runtime_error("checkpoint data not float-aligned: " + path);
    }
    raw.data.resize(rest.size() / sizeof(float));
    std::memcpy(raw.data.data(), rest.data(), rest.size());
  }
  return raw;
}

}  // namespace

template <typename T>
void SaveCheckpoint(const std::string& path, const ParameterSet<T>& params,
                    const nlohmann::json& meta) {
  nlohmann::json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["meta"] = meta;
  header["params"] = nlohmann::json::array();
  std::vector<float> data;
  data.reserve(params.TotalElements());
  for (int i = 0; i < params.count(); ++i) {
    const auto& p = params[i];
    header["params"].push_back(
        {{"name", p.name()}, {"offset", data.size()}, {"shape", p.shape()}});
    for (T v : p.value()) data.push_back(static_cast<float>(v));
  }
  const std::string text = header.dump();
  const uint64_t header_len = text.size();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

CheckpointHeader ReadCheckpointHeader(const std::string& path) {
  RawCheckpoint raw = ReadRaw(path, false);
  return {raw.header.value("meta", nlohmann::json::object()),
          raw.header["params"]};
}

template <typename T>
nlohmann::json LoadCheckpoint(const std::string& path,
                              ParameterSet<T>& params) {
  RawCheckpoint raw = ReadRaw(path, true);
  std::unordered_map<std::string, nlohmann::json> entries;
  for (const auto& e : raw.header["params"]) {
    entries[e["name"].template get<std::string>()] = e;
  }
  for (int i = 0; i < params.count(); ++i) {
    auto& p = params[i];
    auto it = entries.find(p.name());
    if (it == entries.end()) {
      throw std::runtime_error("checkpoint " + path + " lacks parameter " +
                               p.name());
    }
    const Shape shape = it->second["shape"].template get<Shape>();
    if (shape != p.shape()) {
      throw std::runtime_error("checkpoint shape mismatch for " + p.name() +
                               ": " + ShapeToString(shape) + " vs " +
                               ShapeToString(p.shape()));
    }
    const size_t offset = it->second["offset"].template get<size_t>();
    if (offset + p.size() > raw.data.size()) {
      throw std::runtime_error("checkpoint data truncated for " + p.name());
    }
    for (size_t k = 0; k < p.size(); ++k) {
      p.value()[k] = static_cast<T>(raw.data[offset + k]);
    }
  }
  return raw.header.value("meta", nlohmann::json::object());
}

template void SaveCheckpoint(const std::string&, const ParameterSet<float>&,
                             const nlohmann::json&);
template void SaveCheckpoint(const std::string&, const ParameterSet<double>&,
                             const nlohmann::json&);
template nlohmann::json LoadCheckpoint(const std::string&,
                                       ParameterSet<float>&);
template nlohmann::json LoadCheckpoint(const std::string&,
                                       ParameterSet<double>&);

}  // namespace drn::ad
