#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hsmae/cube.hpp"

namespace hsmae {

inline constexpr int kPatchSize = 16;
inline constexpr int kPatchValues = kPatchSize * kPatchSize;

struct PatchGrid {
    int grid_h = 0;
    int grid_w = 0;
    int channels = 0;
    int patch = kPatchSize;

    int positions() const { return grid_h * grid_w; }
    int token_count() const { return grid_h * grid_w * channels; }
    bool operator==(const PatchGrid&) const = default;
};

// Token order is channel-major, then row-major: id = (c*grid_h + row)*grid_w + col.
struct TokenBatch {
    std::vector<float> values;                      // token_count x 256, row-major patches
    std::vector<std::pair<int, int>> spatial_index;  // (row, col) per token
    std::vector<int> channel_index;                 // per token
    std::vector<ChannelMeta> channel_meta;          // per token

    std::size_t size() const { return channel_index.size(); }
    const float* patch(std::size_t t) const { return values.data() + t * kPatchValues; }
    float* patch(std::size_t t) { return values.data() + t * kPatchValues; }
};

// Requires H and W divisible by 16. An overload with an explicit patch size
// exists for experimentation; the grid invariants change with it.
std::pair<TokenBatch, PatchGrid> patchify(const SpectralCube& cube);
std::pair<TokenBatch, PatchGrid> patchify(const SpectralCube& cube, int patch_size);

// Exact inverse of patchify; placement is by each token's indices, so token
// order does not matter. Throws on missing or duplicated (position, channel).
SpectralCube unpatchify(const TokenBatch& tokens, const PatchGrid& grid);

}  // namespace hsmae
