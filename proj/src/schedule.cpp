#include "hsmae/optimizer.hpp"

#include <cmath>

namespace hsmae {

double lr_at(double epoch_fraction, const ScheduleConfig& cfg) {
    if (epoch_fraction < 0.0) epoch_fraction = 0.0;
    if (cfg.warmup_epochs > 0.0 && epoch_fraction < cfg.warmup_epochs)
        return cfg.base_lr * (epoch_fraction / cfg.warmup_epochs);
    double t = epoch_fraction - cfg.warmup_epochs;
    double period;
    if (cfg.mode == ScheduleMode::warm_restarts) {
        period = cfg.restart_period;
        t = std::fmod(t, period);
    } else {
        period = cfg.total_epochs - cfg.warmup_epochs;
        if (period <= 0.0) return cfg.min_lr;
        if (t >= period) return cfg.min_lr;
    }
    return cfg.min_lr + (cfg.base_lr - cfg.min_lr) * 0.5 * (1.0 + std::cos(M_PI * t / period));
}

std::uint64_t pixels_seen(std::uint64_t channels, std::uint64_t epochs,
                          std::uint64_t images_per_epoch, std::uint64_t image_hw) {
    return channels * epochs * images_per_epoch * image_hw * image_hw;
}

}  // namespace hsmae
