#include "hsmae/train.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "hsmae/native_io.hpp"

namespace hsmae {

namespace fs = std::filesystem;

PretrainResult pretrain_cubes(const std::vector<SpectralCube>& cubes, const PretrainConfig& cfg,
                              const StepLogger& log, std::optional<MaeParams<float>> initial) {
    if (cubes.empty()) throw Error(ErrorCode::EmptySplit, "no training cubes");
    if (cfg.epochs < 0 || cfg.batch_size < 1)
        throw Error(ErrorCode::ConfigError, "epochs must be >= 0 and batch_size >= 1");
    if (cfg.crop_hw % cfg.model.patch != 0)
        throw Error(ErrorCode::ConfigError, "crop size must be divisible by the patch size");
    int grid_hw = cfg.crop_hw / cfg.model.patch;
    if (grid_hw > cfg.model.grid_h || grid_hw > cfg.model.grid_w)
        throw Error(ErrorCode::ConfigError, "crop grid exceeds the model's spatial table");

    Rng rng(cfg.seed);
    MaeParams<float> params = initial ? std::move(*initial) : MaeParams<float>::init(cfg.model, rng);
    AdamWState<float> opt = AdamWState<float>::init(params.store, cfg.adamw);
    TensorStore<float> grads = params.store.zeros_like();

    std::ofstream loss_csv;
    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        loss_csv.open(fs::path(cfg.out_dir) / "loss.csv");
        loss_csv << "step,epoch,lr,loss\n";
    }

    std::vector<std::size_t> order(cubes.size());
    std::iota(order.begin(), order.end(), 0);

    std::int64_t step = 0;
    const double samples_per_epoch = static_cast<double>(cubes.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            std::size_t j = i + rng.uniform_index(order.size() - i);
            std::swap(order[i], order[j]);
        }
        std::size_t done = 0;
        while (done < order.size()) {
            std::size_t batch = std::min<std::size_t>(cfg.batch_size, order.size() - done);
            grads.fill_zero();
            double batch_loss = 0.0;
            double epoch_fraction = epoch + static_cast<double>(done) / samples_per_epoch;
            for (std::size_t b = 0; b < batch; ++b, ++done) {
                const SpectralCube& src = cubes[order[done]];
                SpectralCube view;
                try {
                    view = random_resized_crop(src, cfg.crop_hw, cfg.scale_lo, cfg.scale_hi, rng);
                    if (rng.bernoulli(cfg.flip_prob)) view = flip_h(view);
                    if (rng.bernoulli(cfg.flip_prob)) view = flip_v(view);
                    int m = cfg.channels_m;
                    if (cfg.variable_m)
                        m = cfg.m_lo + static_cast<int>(rng.uniform_index(
                                            static_cast<std::uint64_t>(cfg.m_hi - cfg.m_lo + 1)));
                    m = std::min(m, view.channel_count());
                    ChannelSelection sel = sample_channels_random(view.channels, m, rng);
                    view = take_channels(view, sel);
                } catch (const Error& e) {
                    throw Error(ErrorCode::DataError,
                                "sample " + std::to_string(order[done]) + ": " + e.what());
                }
                auto [tokens, grid] = patchify(view, cfg.model.patch);
                double r_channel = cfg.r_channel;
                if (cfg.variable_r_channel)
                    r_channel = rng.uniform(cfg.r_channel_lo, cfg.r_channel_hi);
                MaskPlan plan = make_mask(grid, cfg.r_spatial, r_channel, rng);
                batch_loss +=
                    mae_forward_backward(params, tokens, tokens, plan, grads, 1.0 / batch);
            }
            batch_loss /= batch;
            double lr = lr_at(epoch_fraction, cfg.schedule);
            adamw_step(params.store, grads, opt, lr);
            ++step;
            StepLog entry{step, epoch, lr, batch_loss};
            if (log) log(entry);
            if (loss_csv.is_open()) {
                char line[128];
                std::snprintf(line, sizeof(line), "%lld,%d,%.10g,%.10g\n",
                              static_cast<long long>(entry.step), entry.epoch, entry.lr, entry.loss);
                loss_csv << line;
            }
        }
        if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
            (epoch + 1) % cfg.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof(name), "ckpt_epoch_%04d.hsck", epoch + 1);
            save_checkpoint((fs::path(cfg.out_dir) / name).string(), params, &opt);
        }
    }
    if (!cfg.out_dir.empty())
        save_checkpoint((fs::path(cfg.out_dir) / "ckpt_final.hsck").string(), params, &opt);
    return {std::move(params), std::move(opt), step};
}

PretrainResult pretrain(const DatasetManifest& manifest, const PretrainConfig& cfg,
                        const StepLogger& log) {
    std::vector<SpectralCube> cubes;
    for (const auto& rec : manifest.records) {
        if (rec.split != Split::train) continue;
        try {
            cubes.push_back(read_native_file(rec.cube_path));
        } catch (const Error& e) {
            throw Error(ErrorCode::DataError, rec.cube_path + ": " + e.what());
        }
    }
    if (cubes.empty()) throw Error(ErrorCode::EmptySplit, "manifest has no train records");
    return pretrain_cubes(cubes, cfg, log);
}

SpectralCube rgb_stage_adapter(const std::vector<float>& image, int height, int width,
                               const std::array<ChannelMeta, 3>& pseudo) {
    if (image.size() != static_cast<std::size_t>(height) * width * 3)
        throw Error(ErrorCode::ShapeMismatch, "RGB image size does not match dimensions");
    SpectralCube cube;
    cube.width = width;
    cube.height = height;
    cube.channels.assign(pseudo.begin(), pseudo.end());
    cube.data = image;
    return cube;
}

}  // namespace hsmae
