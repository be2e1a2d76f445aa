#include "hsmae/cube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsmae {

ValidationReport validate_cube(const SpectralCube& cube) {
    ValidationReport rep;
    if (cube.width < 1 || cube.height < 1) {
        rep.ok = false;
        rep.errors.push_back("non-positive spatial dimensions");
    }
    if (cube.channels.empty()) {
        rep.ok = false;
        rep.errors.push_back("cube has no channels");
    }
    std::size_t expected = cube.plane_size() * cube.channels.size();
    if (cube.data.size() != expected) {
        rep.ok = false;
        rep.errors.push_back("data length does not match height*width*channels");
        return rep;
    }
    for (std::size_t i = 0; i < cube.channels.size(); ++i) {
        const ChannelMeta& m = cube.channels[i];
        if (!std::isfinite(m.wavelength_nm) || m.wavelength_nm <= 0.0 ||
            !std::isfinite(m.bandwidth_nm) || m.bandwidth_nm <= 0.0) {
            rep.ok = false;
            rep.errors.push_back("channel " + std::to_string(i) + " has non-positive or non-finite metadata");
            continue;
        }
        if (m.wavelength_nm < 300.0 || m.wavelength_nm > 3000.0)
            rep.warnings.push_back("channel " + std::to_string(i) + " wavelength outside [300,3000] nm");
        if (m.bandwidth_nm < 0.5 || m.bandwidth_nm > 300.0)
            rep.warnings.push_back("channel " + std::to_string(i) + " bandwidth outside [0.5,300] nm");
    }
    for (float v : cube.data) {
        if (!std::isfinite(v)) {
            ++rep.non_finite_values;
        } else if (v < 0.0f || v > 1.0f) {
            ++rep.out_of_unit_range;
        }
    }
    if (rep.non_finite_values > 0) {
        rep.ok = false;
        rep.errors.push_back(std::to_string(rep.non_finite_values) + " non-finite data values");
    }
    return rep;
}

void require_valid(const SpectralCube& cube) {
    ValidationReport rep = validate_cube(cube);
    if (!rep.ok) throw Error(ErrorCode::DataError, rep.errors.empty() ? "invalid cube" : rep.errors.front());
}

std::vector<float> rgb_preview(const SpectralCube& cube, int* chosen_channels) {
    if (cube.channels.empty()) throw Error(ErrorCode::NoSpectralMetadata, "cube has no channel metadata");
    const double targets[3] = {620.0, 550.0, 460.0};
    std::size_t plane = cube.plane_size();
    std::vector<float> out(plane * 3);
    for (int p = 0; p < 3; ++p) {
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int c = 0; c < cube.channel_count(); ++c) {
            double d = std::fabs(cube.channels[c].wavelength_nm - targets[p]);
            if (d < best_dist) {
                best_dist = d;
                best = c;
            }
        }
        if (chosen_channels) chosen_channels[p] = best;
        const float* src = cube.data.data() + static_cast<std::size_t>(best) * plane;
        float lo = *std::min_element(src, src + plane);
        float hi = *std::max_element(src, src + plane);
        float span = hi - lo;
        for (std::size_t i = 0; i < plane; ++i)
            out[p * plane + i] = span > 0.0f ? (src[i] - lo) / span : 0.0f;
    }
    return out;
}

}  // namespace hsmae
