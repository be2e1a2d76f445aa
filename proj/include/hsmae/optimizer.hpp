#pragma once

#include <cmath>
#include <cstdint>

#include "hsmae/tensor_store.hpp"

namespace hsmae {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.05;
};

template <typename T>
struct AdamWState {
    std::int64_t step = 0;
    TensorStore<T> m;
    TensorStore<T> v;
    AdamWConfig cfg;

    static AdamWState init(const TensorStore<T>& params, const AdamWConfig& cfg = {}) {
        AdamWState s;
        s.m = params.zeros_like();
        s.v = params.zeros_like();
        s.cfg = cfg;
        return s;
    }
};

// Decoupled weight decay, applied only to decay-flagged tensors (weight
// matrices; never biases, norms, embeddings, or the mask token).
// update_mask, when given, freezes entries whose flag is false (linear
// probing); frozen entries receive neither the Adam update nor weight decay.
template <typename T>
void adamw_step(TensorStore<T>& params, const TensorStore<T>& grads, AdamWState<T>& state,
                double lr, const std::vector<bool>* update_mask = nullptr) {
    if (params.entries.size() != grads.entries.size())
        throw Error(ErrorCode::ShapeMismatch, "gradient store does not mirror parameters");
    if (lr < 0.0) throw Error(ErrorCode::OutOfRange, "negative learning rate");
    state.step += 1;
    const AdamWConfig& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t e = 0; e < params.entries.size(); ++e) {
        if (update_mask && !(*update_mask)[e]) continue;
        auto& pe = params.entries[e];
        const auto& ge = grads.entries[e];
        if (pe.data.size() != ge.data.size())
            throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch for " + pe.name);
        auto& me = state.m.entries[e];
        auto& ve = state.v.entries[e];
        const double wd = pe.decay ? c.weight_decay : 0.0;
        for (std::size_t i = 0; i < pe.data.size(); ++i) {
            double g = static_cast<double>(ge.data[i]);
            if (!std::isfinite(g)) throw Error(ErrorCode::NonFinite, "gradient in " + pe.name);
            double m = c.beta1 * static_cast<double>(me.data[i]) + (1.0 - c.beta1) * g;
            double v = c.beta2 * static_cast<double>(ve.data[i]) + (1.0 - c.beta2) * g * g;
            me.data[i] = static_cast<T>(m);
            ve.data[i] = static_cast<T>(v);
            double mhat = static_cast<double>(me.data[i]) / bc1;
            double vhat = static_cast<double>(ve.data[i]) / bc2;
            double theta = static_cast<double>(pe.data[i]);
            theta -= lr * (mhat / (std::sqrt(vhat) + c.eps) + wd * theta);
            if (!std::isfinite(theta)) throw Error(ErrorCode::NonFinite, "parameter in " + pe.name);
            pe.data[i] = static_cast<T>(theta);
        }
    }
}

enum class ScheduleMode { warm_restarts, single_cosine };

struct ScheduleConfig {
    double base_lr = 1.5e-3;
    double min_lr = 0.0;
    double warmup_epochs = 0.0;
    double restart_period = 40.0;   // epochs between warm restarts
    double total_epochs = 100.0;    // horizon for single_cosine
    ScheduleMode mode = ScheduleMode::warm_restarts;
};

// Learning rate at a (possibly fractional) epoch position. Linear warmup,
// then either a cosine restarting at every multiple of restart_period or one
// cosine over the remaining horizon.
double lr_at(double epoch_fraction, const ScheduleConfig& cfg);

// Pixel-budget accounting used to trade channel count against epochs:
// 25 channels for 400 epochs sees exactly as many pixels as 100 channels for
// 100 epochs.
std::uint64_t pixels_seen(std::uint64_t channels, std::uint64_t epochs,
                          std::uint64_t images_per_epoch, std::uint64_t image_hw);

}  // namespace hsmae
