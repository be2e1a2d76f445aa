#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hsmae {

// Deterministic RNG handle passed explicitly into every stochastic operation.
// Callers parallelizing across samples derive per-sample streams with
// Rng(base_seed ^ sample_index).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling, no modulo bias
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double uniform(double lo, double hi) {
        double u = (engine_() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
        return lo + (hi - lo) * u;
    }

    bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

    double normal() {
        // Box-Muller, one value per call for reproducibility of draw counts
        double u1 = uniform(0.0, 1.0);
        double u2 = uniform(0.0, 1.0);
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double truncated_normal(double std_dev, double clip = 2.0) {
        double x;
        do {
            x = normal();
        } while (std::fabs(x) > clip);
        return x * std_dev;
    }

    // Marsaglia-Tsang; shape boost for alpha < 1.
    double gamma(double alpha) {
        if (alpha < 1.0) {
            double u = uniform(0.0, 1.0);
            if (u < 1e-300) u = 1e-300;
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        double d = alpha - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform(0.0, 1.0);
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u < 1e-300) u = 1e-300;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double alpha, double beta_param) {
        double x = gamma(alpha);
        double y = gamma(beta_param);
        return x / (x + y);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace hsmae
