#pragma once

#include <optional>
#include <string>

#include "hsmae/model.hpp"
#include "hsmae/optimizer.hpp"

namespace hsmae {

// Checkpoint container: magic "HSCK", little-endian u64 header byte length,
// JSON header (model config, tensor names/shapes/dtypes/offsets, optional
// optimizer block), then little-endian float32 payloads in header order.
// Round-trips float32 parameters and optimizer moments bit-exactly.
void save_checkpoint(const std::string& path, const MaeParams<float>& params,
                     const AdamWState<float>* opt = nullptr);

struct LoadedCheckpoint {
    MaeParams<float> params;
    std::optional<AdamWState<float>> opt;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace hsmae
