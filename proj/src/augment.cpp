#include "hsmae/augment.hpp"

#include <algorithm>
#include <cmath>

namespace hsmae {

SpectralCube flip_h(const SpectralCube& cube) {
    SpectralCube out = cube;
    for (int c = 0; c < cube.channel_count(); ++c)
        for (int r = 0; r < cube.height; ++r)
            for (int col = 0; col < cube.width; ++col)
                out.at(c, r, col) = cube.at(c, r, cube.width - 1 - col);
    return out;
}

SpectralCube flip_v(const SpectralCube& cube) {
    SpectralCube out = cube;
    for (int c = 0; c < cube.channel_count(); ++c)
        for (int r = 0; r < cube.height; ++r)
            for (int col = 0; col < cube.width; ++col)
                out.at(c, r, col) = cube.at(c, cube.height - 1 - r, col);
    return out;
}

SpectralCube resize_bilinear(const SpectralCube& cube, int out_h, int out_w) {
    if (out_h == cube.height && out_w == cube.width) return cube;
    SpectralCube out;
    out.width = out_w;
    out.height = out_h;
    out.channels = cube.channels;
    out.data.resize(out.plane_size() * out.channels.size());
    double sy = static_cast<double>(cube.height) / out_h;
    double sx = static_cast<double>(cube.width) / out_w;
    for (int c = 0; c < cube.channel_count(); ++c) {
        for (int r = 0; r < out_h; ++r) {
            double fy = (r + 0.5) * sy - 0.5;
            int y0 = static_cast<int>(std::floor(fy));
            double wy = fy - y0;
            int y0c = std::clamp(y0, 0, cube.height - 1);
            int y1c = std::clamp(y0 + 1, 0, cube.height - 1);
            for (int col = 0; col < out_w; ++col) {
                double fx = (col + 0.5) * sx - 0.5;
                int x0 = static_cast<int>(std::floor(fx));
                double wx = fx - x0;
                int x0c = std::clamp(x0, 0, cube.width - 1);
                int x1c = std::clamp(x0 + 1, 0, cube.width - 1);
                double v = (1 - wy) * ((1 - wx) * cube.at(c, y0c, x0c) + wx * cube.at(c, y0c, x1c)) +
                           wy * ((1 - wx) * cube.at(c, y1c, x0c) + wx * cube.at(c, y1c, x1c));
                out.at(c, r, col) = static_cast<float>(v);
            }
        }
    }
    return out;
}

namespace {

SpectralCube crop(const SpectralCube& cube, int r0, int c0, int h, int w) {
    SpectralCube out;
    out.width = w;
    out.height = h;
    out.channels = cube.channels;
    out.data.resize(out.plane_size() * out.channels.size());
    for (int c = 0; c < cube.channel_count(); ++c)
        for (int r = 0; r < h; ++r)
            for (int col = 0; col < w; ++col)
                out.at(c, r, col) = cube.at(c, r0 + r, c0 + col);
    return out;
}

}  // namespace

SpectralCube random_resized_crop(const SpectralCube& cube, int out_hw, double scale_lo,
                                 double scale_hi, Rng& rng) {
    if (out_hw < 1) throw Error(ErrorCode::OutOfRange, "output size must be >= 1");
    if (!(scale_lo > 0.0 && scale_lo <= scale_hi && scale_hi <= 1.0))
        throw Error(ErrorCode::OutOfRange, "scale range must satisfy 0 < lo <= hi <= 1");
    if (cube.height < 1 || cube.width < 1)
        throw Error(ErrorCode::TooSmall, "cube has no spatial extent");

    const double area = static_cast<double>(cube.height) * cube.width;
    int h = 0, w = 0, r0 = 0, c0 = 0;
    bool found = false;
    for (int attempt = 0; attempt < 10 && !found; ++attempt) {
        double target = area * rng.uniform(scale_lo, scale_hi);
        double ar = std::exp(rng.uniform(std::log(3.0 / 4.0), std::log(4.0 / 3.0)));
        w = static_cast<int>(std::lround(std::sqrt(target * ar)));
        h = static_cast<int>(std::lround(std::sqrt(target / ar)));
        if (w >= 1 && h >= 1 && w <= cube.width && h <= cube.height) found = true;
    }
    if (!found) {
        // centered square fallback
        h = w = std::min(cube.height, cube.width);
        r0 = (cube.height - h) / 2;
        c0 = (cube.width - w) / 2;
    } else {
        r0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cube.height - h + 1)));
        c0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cube.width - w + 1)));
    }
    return resize_bilinear(crop(cube, r0, c0, h, w), out_hw, out_hw);
}

static void check_shapes(const LabeledSample& a, const LabeledSample& b) {
    if (a.cube.width != b.cube.width || a.cube.height != b.cube.height ||
        a.cube.channel_count() != b.cube.channel_count() || a.labels.size() != b.labels.size())
        throw Error(ErrorCode::ShapeMismatch, "mixing requires identical shapes");
}

LabeledSample mixup_with_lambda(const LabeledSample& a, const LabeledSample& b, double lam) {
    check_shapes(a, b);
    LabeledSample out = a;
    for (std::size_t i = 0; i < out.cube.data.size(); ++i)
        out.cube.data[i] = static_cast<float>(lam * a.cube.data[i] + (1.0 - lam) * b.cube.data[i]);
    for (std::size_t i = 0; i < out.labels.size(); ++i)
        out.labels[i] = static_cast<float>(lam * a.labels[i] + (1.0 - lam) * b.labels[i]);
    return out;
}

LabeledSample mixup(const LabeledSample& a, const LabeledSample& b, double alpha, Rng& rng) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::OutOfRange, "mixup alpha must be > 0");
    return mixup_with_lambda(a, b, rng.beta(alpha, alpha));
}

LabeledSample cutmix(const LabeledSample& a, const LabeledSample& b, double alpha, Rng& rng) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::OutOfRange, "cutmix alpha must be > 0");
    check_shapes(a, b);
    const int H = a.cube.height, W = a.cube.width;
    double lam = rng.beta(alpha, alpha);
    double cut = std::sqrt(1.0 - lam);
    int rh = static_cast<int>(std::lround(H * cut));
    int rw = static_cast<int>(std::lround(W * cut));
    rh = std::clamp(rh, 0, H);
    rw = std::clamp(rw, 0, W);
    int r0 = rh < H ? static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(H - rh + 1))) : 0;
    int c0 = rw < W ? static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(W - rw + 1))) : 0;

    LabeledSample out = a;
    for (int c = 0; c < a.cube.channel_count(); ++c)
        for (int r = r0; r < r0 + rh; ++r)
            for (int col = c0; col < c0 + rw; ++col)
                out.cube.at(c, r, col) = b.cube.at(c, r, col);

    // label weight from realized pasted area, not the drawn lambda
    double kept = 1.0 - static_cast<double>(rh) * rw / (static_cast<double>(H) * W);
    for (std::size_t i = 0; i < out.labels.size(); ++i)
        out.labels[i] = static_cast<float>(kept * a.labels[i] + (1.0 - kept) * b.labels[i]);
    return out;
}

}  // namespace hsmae
