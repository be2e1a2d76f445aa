#pragma once

#include <array>
#include <string>
#include <vector>

#include "hsmae/cube.hpp"
#include "hsmae/rng.hpp"

namespace hsmae {

struct ChannelSelection {
    std::vector<int> indices;         // strictly increasing, within [0, C)
    std::vector<ChannelMeta> metas;   // parallel to indices
};

struct CatalogRecord {
    std::string tile_id;
    double latitude_deg = 0.0;    // [-90, 90]
    double longitude_deg = 0.0;   // [-180, 180)
    int acquisition_month = 1;    // [1, 12]
    int biome_id = 0;             // [0, 15)
};

struct StratumKey {
    int lat_bin = 0;   // [0, 30)
    int lon_bin = 0;   // [0, 60)
    int season = 0;    // [0, 4)
    int biome_id = 0;  // [0, 15)

    auto operator<=>(const StratumKey&) const = default;
};

// m distinct indices drawn uniformly without replacement, returned sorted.
ChannelSelection sample_channels_random(const std::vector<ChannelMeta>& channels, int m, Rng& rng);

// index_i = floor(i*(C-1)/(m-1) + 1/2); endpoints always included for m >= 2.
ChannelSelection select_channels_even(const std::vector<ChannelMeta>& channels, int m);

std::vector<int> even_indices(int C, int m);  // index arithmetic only

SpectralCube take_channels(const SpectralCube& cube, const ChannelSelection& sel);

StratumKey stratum_key(const CatalogRecord& rec);  // throws InvalidRecord

// One tile chosen uniformly per nonempty stratum; output sorted by tile_id.
std::vector<std::string> stratify_catalog(const std::vector<CatalogRecord>& records, Rng& rng);

std::vector<CatalogRecord> parse_catalog(const std::string& json_text);
std::vector<CatalogRecord> load_catalog(const std::string& path);

// Four quadrants split at floor(H/2), floor(W/2); odd trailing row/column goes
// to the lower/right quadrants. Order: top-left, top-right, bottom-left,
// bottom-right.
std::array<SpectralCube, 4> quarter_patches(const SpectralCube& cube);

struct SensitivitySample {
    double wavelength_nm;
    double sensitivity;
};

// Sensitivity-weighted mean wavelength plus FWHM of the curve (linear
// interpolation at the half-max crossings).
ChannelMeta pseudo_band_from_curve(const std::vector<SensitivitySample>& curve);

std::array<ChannelMeta, 3> rgb_pseudo_bands(const std::vector<SensitivitySample>& red,
                                            const std::vector<SensitivitySample>& green,
                                            const std::vector<SensitivitySample>& blue);

std::vector<SensitivitySample> load_sensitivity_csv(const std::string& path);

}  // namespace hsmae
