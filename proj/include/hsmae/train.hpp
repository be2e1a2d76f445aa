#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "hsmae/augment.hpp"
#include "hsmae/checkpoint.hpp"
#include "hsmae/manifest.hpp"
#include "hsmae/model.hpp"
#include "hsmae/optimizer.hpp"
#include "hsmae/sampling.hpp"

namespace hsmae {

struct PretrainConfig {
    MaeConfig model;
    ScheduleConfig schedule;
    AdamWConfig adamw;
    int epochs = 1;
    int batch_size = 1;
    int channels_m = 100;
    bool variable_m = false;  // resample m per image in [m_lo, m_hi]
    int m_lo = 25, m_hi = 100;
    int crop_hw = 224;
    double scale_lo = 0.2, scale_hi = 1.0;
    double flip_prob = 0.5;
    double r_spatial = 0.75;
    double r_channel = 0.75;
    bool variable_r_channel = false;  // per-image uniform draw over [lo, hi]
    double r_channel_lo = 0.65, r_channel_hi = 0.95;
    std::uint64_t seed = 0;
    std::string out_dir;        // empty: no checkpoints / logs written
    int checkpoint_every = 1;   // epochs
};

struct StepLog {
    std::int64_t step = 0;
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
};

using StepLogger = std::function<void(const StepLog&)>;

struct PretrainResult {
    MaeParams<float> params;
    AdamWState<float> opt;
    std::int64_t steps = 0;
};

// Deterministic single-worker pretraining loop over in-memory cubes. Per
// sample: random-resized crop, flips, random channel sampling, patchify,
// two-stage mask, exact backward, AdamW with the cosine schedule.
PretrainResult pretrain_cubes(const std::vector<SpectralCube>& cubes, const PretrainConfig& cfg,
                              const StepLogger& log = nullptr,
                              std::optional<MaeParams<float>> initial = std::nullopt);

// Manifest-driven variant; cube paths must point at native ".hsc" files.
PretrainResult pretrain(const DatasetManifest& manifest, const PretrainConfig& cfg,
                        const StepLogger& log = nullptr);

// Wraps a 3-plane RGB image (plane, row, col order) as a SpectralCube with
// pseudo wavelength/bandwidth metadata so RGB data flows through the same
// pretraining path.
SpectralCube rgb_stage_adapter(const std::vector<float>& image, int height, int width,
                               const std::array<ChannelMeta, 3>& pseudo);

}  // namespace hsmae
