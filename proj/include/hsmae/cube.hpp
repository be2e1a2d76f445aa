#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hsmae/errors.hpp"

namespace hsmae {

// Band center wavelength and FWHM bandwidth, both in nanometers.
struct ChannelMeta {
    double wavelength_nm = 0.0;
    double bandwidth_nm = 0.0;
};

// H x W x C reflectance cube stored channel-major: data[(c*H + r)*W + col].
struct SpectralCube {
    int width = 0;
    int height = 0;
    std::vector<ChannelMeta> channels;
    std::vector<float> data;

    int channel_count() const { return static_cast<int>(channels.size()); }
    std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }

    float at(int c, int r, int col) const {
        return data[(static_cast<std::size_t>(c) * height + r) * width + col];
    }
    float& at(int c, int r, int col) {
        return data[(static_cast<std::size_t>(c) * height + r) * width + col];
    }
};

struct ValidationReport {
    bool ok = true;
    std::size_t non_finite_values = 0;
    std::size_t out_of_unit_range = 0;  // values outside [0,1]; informational
    std::vector<std::string> warnings;  // e.g. wavelength outside the usual envelope
    std::vector<std::string> errors;
};

// Structural checks per the cube invariants. Wavelengths outside [300,3000] nm
// and bandwidths outside [0.5,300] nm are warnings, not errors.
ValidationReport validate_cube(const SpectralCube& cube);

// Throws on structural violations instead of reporting.
void require_valid(const SpectralCube& cube);

// Nearest-wavelength channels to 620/550/460 nm, per-channel min-max
// normalized to [0,1]. Ties break toward the lower channel index.
// Output is H x W x 3 in (plane, row, col) order, planes R,G,B.
std::vector<float> rgb_preview(const SpectralCube& cube, int* chosen_channels = nullptr);

}  // namespace hsmae
