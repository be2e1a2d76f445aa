#include "hsmae/masking.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace hsmae {

double total_mask_ratio(double r_spatial, double r_channel) {
    if (!(r_spatial >= 0.0 && r_spatial < 1.0 && r_channel >= 0.0 && r_channel < 1.0))
        throw Error(ErrorCode::OutOfRange, "mask ratios must lie in [0,1)");
    return 1.0 - (1.0 - r_spatial) * (1.0 - r_channel);
}

namespace {

std::vector<int> keep_uniform(int n, double ratio, Rng& rng) {
    int keep = std::max(1, static_cast<int>(std::floor((1.0 - ratio) * n)));
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < keep; ++i) {
        int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(keep);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

MaskPlan make_mask(const PatchGrid& grid, double r_spatial, double r_channel, Rng& rng) {
    total_mask_ratio(r_spatial, r_channel);  // range check
    if (grid.token_count() < 1) throw Error(ErrorCode::OutOfRange, "empty grid");

    MaskPlan plan;
    plan.grid = grid;
    plan.r_spatial = r_spatial;
    plan.r_channel = r_channel;
    plan.kept_spatial = keep_uniform(grid.positions(), r_spatial, rng);
    plan.kept_channels = keep_uniform(grid.channels, r_channel, rng);

    std::vector<bool> spatial_kept(grid.positions(), false);
    for (int p : plan.kept_spatial) spatial_kept[p] = true;
    std::vector<bool> channel_kept(grid.channels, false);
    for (int c : plan.kept_channels) channel_kept[c] = true;

    for (int id = 0; id < grid.token_count(); ++id) {
        int c = id / grid.positions();
        int pos = id % grid.positions();
        if (channel_kept[c] && spatial_kept[pos])
            plan.visible_token_ids.push_back(id);
        else
            plan.masked_token_ids.push_back(id);
    }
    return plan;
}

TokenBatch select_tokens(const TokenBatch& tokens, const std::vector<int>& ids) {
    // stride comes from the batch so non-default patch sizes work too
    const std::size_t pv = tokens.size() ? tokens.values.size() / tokens.size() : kPatchValues;
    TokenBatch out;
    out.values.resize(ids.size() * pv);
    out.spatial_index.reserve(ids.size());
    out.channel_index.reserve(ids.size());
    out.channel_meta.reserve(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        std::size_t t = static_cast<std::size_t>(ids[k]);
        std::copy_n(tokens.values.begin() + t * pv, pv, out.values.begin() + k * pv);
        out.spatial_index.push_back(tokens.spatial_index[t]);
        out.channel_index.push_back(tokens.channel_index[t]);
        out.channel_meta.push_back(tokens.channel_meta[t]);
    }
    return out;
}

std::pair<TokenBatch, std::vector<int>> apply_mask(const TokenBatch& tokens, const MaskPlan& plan) {
    if (static_cast<int>(tokens.size()) != plan.grid.token_count())
        throw Error(ErrorCode::GridMismatch, "token batch does not match the plan's grid");
    return {select_tokens(tokens, plan.visible_token_ids), plan.masked_token_ids};
}

std::string mask_plan_to_json(const MaskPlan& plan) {
    nlohmann::json j;
    j["grid"] = {{"grid_h", plan.grid.grid_h},
                 {"grid_w", plan.grid.grid_w},
                 {"channels", plan.grid.channels},
                 {"patch", plan.grid.patch}};
    j["kept_spatial"] = plan.kept_spatial;
    j["kept_channels"] = plan.kept_channels;
    j["r_spatial"] = plan.r_spatial;
    j["r_channel"] = plan.r_channel;
    return j.dump(2);
}

MaskPlan mask_plan_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("mask plan JSON: ") + e.what());
    }
    MaskPlan plan;
    try {
        plan.grid.grid_h = j.at("grid").at("grid_h").get<int>();
        plan.grid.grid_w = j.at("grid").at("grid_w").get<int>();
        plan.grid.channels = j.at("grid").at("channels").get<int>();
        plan.grid.patch = j.at("grid").at("patch").get<int>();
        plan.kept_spatial = j.at("kept_spatial").get<std::vector<int>>();
        plan.kept_channels = j.at("kept_channels").get<std::vector<int>>();
        plan.r_spatial = j.at("r_spatial").get<double>();
        plan.r_channel = j.at("r_channel").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("mask plan schema: ") + e.what());
    }
    std::vector<bool> spatial_kept(plan.grid.positions(), false);
    for (int p : plan.kept_spatial) {
        if (p < 0 || p >= plan.grid.positions()) throw Error(ErrorCode::OutOfRange, "kept_spatial id");
        spatial_kept[p] = true;
    }
    std::vector<bool> channel_kept(plan.grid.channels, false);
    for (int c : plan.kept_channels) {
        if (c < 0 || c >= plan.grid.channels) throw Error(ErrorCode::OutOfRange, "kept_channels id");
        channel_kept[c] = true;
    }
    for (int id = 0; id < plan.grid.token_count(); ++id) {
        int c = id / plan.grid.positions();
        int pos = id % plan.grid.positions();
        if (channel_kept[c] && spatial_kept[pos])
            plan.visible_token_ids.push_back(id);
        else
            plan.masked_token_ids.push_back(id);
    }
    return plan;
}

}  // namespace hsmae
