#pragma once

#include <string>
#include <vector>

#include "hsmae/rng.hpp"
#include "hsmae/tokenizer.hpp"

namespace hsmae {

// Two-stage mask: spatial tubes first, then whole channels. A token is
// visible iff its grid position survived stage one AND its channel survived
// stage two.
struct MaskPlan {
    PatchGrid grid;
    std::vector<int> kept_spatial;    // flat grid positions row*grid_w+col, ascending
    std::vector<int> kept_channels;   // ascending
    std::vector<int> visible_token_ids;  // ascending
    std::vector<int> masked_token_ids;   // ascending
    double r_spatial = 0.0;
    double r_channel = 0.0;
};

// 1 - (1-r_spatial)*(1-r_channel)
double total_mask_ratio(double r_spatial, double r_channel);

// Keep-counts are floor((1-r)*n) with a minimum of one position and one
// channel, so at least one token is always visible.
MaskPlan make_mask(const PatchGrid& grid, double r_spatial, double r_channel, Rng& rng);

// Splits a full token batch into the visible subset (original relative order)
// and the masked id list.
std::pair<TokenBatch, std::vector<int>> apply_mask(const TokenBatch& tokens, const MaskPlan& plan);

TokenBatch select_tokens(const TokenBatch& tokens, const std::vector<int>& ids);

std::string mask_plan_to_json(const MaskPlan& plan);
MaskPlan mask_plan_from_json(const std::string& text);

}  // namespace hsmae
