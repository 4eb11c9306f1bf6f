#ifndef DRN_AD_CHECKPOINT_H_
#define DRN_AD_CHECKPOINT_H_

#include <nlohmann/json.hpp>
#include <string>

#include "drn/ad/tensor.h"

namespace drn::ad {

// File layout:
//   uint64 little-endian header byte count
//   UTF-8 JSON header {"format", "version", "meta", "params": [{name, offset,
//   shape}]} where offsets count float32 elements from the start of the data
//   block
//   float32 little-endian parameter data, concatenated in header order
template <typename T>
void SaveCheckpoint(const std::string& path, const ParameterSet<T>& params,
                    const nlohmann::json& meta = nlohmann::json::object());

struct CheckpointHeader {
  nlohmann::json meta;
  nlohmann::json params;
};

CheckpointHeader ReadCheckpointHeader(const std::string& path);

// Loads every parameter of `params` by name; shapes must match and every
// parameter must be present. Returns the header metadata.
template <typename T>
nlohmann::json LoadCheckpoint(const std::string& path, ParameterSet<T>& params);

}  // namespace drn::ad

#endif  // DRN_AD_CHECKPOINT_H_
