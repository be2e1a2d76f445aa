#include "hsmae/tokenizer.hpp"

#include <vector>

namespace hsmae {

std::pair<TokenBatch, PatchGrid> patchify(const SpectralCube& cube) {
    return patchify(cube, kPatchSize);
}

std::pair<TokenBatch, PatchGrid> patchify(const SpectralCube& cube, int patch_size) {
    if (patch_size < 1) throw Error(ErrorCode::OutOfRange, "patch size must be >= 1");
    if (cube.height % patch_size != 0 || cube.width % patch_size != 0)
        throw Error(ErrorCode::NotDivisible,
                    std::to_string(cube.height) + "x" + std::to_string(cube.width) +
                        " not divisible by " + std::to_string(patch_size));

    PatchGrid grid;
    grid.grid_h = cube.height / patch_size;
    grid.grid_w = cube.width / patch_size;
    grid.channels = cube.channel_count();
    grid.patch = patch_size;

    const int pv = patch_size * patch_size;
    TokenBatch tokens;
    tokens.values.resize(static_cast<std::size_t>(grid.token_count()) * pv);
    tokens.spatial_index.reserve(grid.token_count());
    tokens.channel_index.reserve(grid.token_count());
    tokens.channel_meta.reserve(grid.token_count());

    std::size_t t = 0;
    for (int c = 0; c < grid.channels; ++c) {
        for (int gr = 0; gr < grid.grid_h; ++gr) {
            for (int gc = 0; gc < grid.grid_w; ++gc, ++t) {
                float* dst = tokens.values.data() + t * pv;
                for (int pr = 0; pr < patch_size; ++pr)
                    for (int pc = 0; pc < patch_size; ++pc)
                        dst[pr * patch_size + pc] = cube.at(c, gr * patch_size + pr, gc * patch_size + pc);
                tokens.spatial_index.emplace_back(gr, gc);
                tokens.channel_index.push_back(c);
                tokens.channel_meta.push_back(cube.channels[c]);
            }
        }
    }
    return {std::move(tokens), grid};
}

SpectralCube unpatchify(const TokenBatch& tokens, const PatchGrid& grid) {
    const int pv = grid.patch * grid.patch;
    SpectralCube cube;
    cube.width = grid.grid_w * grid.patch;
    cube.height = grid.grid_h * grid.patch;
    cube.channels.resize(grid.channels);
    cube.data.resize(cube.plane_size() * grid.channels);

    std::vector<bool> seen(static_cast<std::size_t>(grid.token_count()), false);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        auto [gr, gc] = tokens.spatial_index[t];
        int c = tokens.channel_index[t];
        if (c < 0 || c >= grid.channels || gr < 0 || gr >= grid.grid_h || gc < 0 || gc >= grid.grid_w)
            throw Error(ErrorCode::GridMismatch, "token indices outside grid");
        std::size_t id = (static_cast<std::size_t>(c) * grid.grid_h + gr) * grid.grid_w + gc;
        if (seen[id]) throw Error(ErrorCode::DuplicateToken, "token " + std::to_string(id));
        seen[id] = true;
        cube.channels[c] = tokens.channel_meta[t];
        const float* src = tokens.values.data() + t * pv;
        for (int pr = 0; pr < grid.patch; ++pr)
            for (int pc = 0; pc < grid.patch; ++pc)
                cube.at(c, gr * grid.patch + pr, gc * grid.patch + pc) = src[pr * grid.patch + pc];
    }
    for (bool s : seen)
        if (!s) throw Error(ErrorCode::IncompleteTokens, "token set does not cover the grid");
    return cube;
}

}  // namespace hsmae
