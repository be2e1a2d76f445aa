#include "hsmae/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace hsmae {

ChannelSelection sample_channels_random(const std::vector<ChannelMeta>& channels, int m, Rng& rng) {
    int C = static_cast<int>(channels.size());
    if (m < 1 || m > C)
        throw Error(ErrorCode::InvalidCount, "m=" + std::to_string(m) + " for C=" + std::to_string(C));
    std::vector<int> pool(C);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < m; ++i) {
        int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(C - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    ChannelSelection sel;
    sel.indices = std::move(pool);
    for (int idx : sel.indices) sel.metas.push_back(channels[idx]);
    return sel;
}

std::vector<int> even_indices(int C, int m) {
    if (m < 1 || m > C)
        throw Error(ErrorCode::InvalidCount, "m=" + std::to_string(m) + " for C=" + std::to_string(C));
    std::vector<int> out(m);
    if (m == 1) {
        out[0] = (C - 1) / 2;
        return out;
    }
    for (int i = 0; i < m; ++i)
        out[i] = static_cast<int>(std::floor(static_cast<double>(i) * (C - 1) / (m - 1) + 0.5));
    return out;
}

ChannelSelection select_channels_even(const std::vector<ChannelMeta>& channels, int m) {
    ChannelSelection sel;
    sel.indices = even_indices(static_cast<int>(channels.size()), m);
    for (int idx : sel.indices) sel.metas.push_back(channels[idx]);
    return sel;
}

SpectralCube take_channels(const SpectralCube& cube, const ChannelSelection& sel) {
    SpectralCube out;
    out.width = cube.width;
    out.height = cube.height;
    out.channels = sel.metas;
    std::size_t plane = cube.plane_size();
    out.data.resize(plane * sel.indices.size());
    for (std::size_t k = 0; k < sel.indices.size(); ++k)
        std::copy_n(cube.data.begin() + static_cast<std::size_t>(sel.indices[k]) * plane, plane,
                    out.data.begin() + k * plane);
    return out;
}

StratumKey stratum_key(const CatalogRecord& rec) {
    if (!(rec.latitude_deg >= -90.0 && rec.latitude_deg <= 90.0))
        throw Error(ErrorCode::InvalidRecord, rec.tile_id + ": latitude " + std::to_string(rec.latitude_deg));
    if (!(rec.longitude_deg >= -180.0 && rec.longitude_deg < 180.0))
        throw Error(ErrorCode::InvalidRecord, rec.tile_id + ": longitude " + std::to_string(rec.longitude_deg));
    if (rec.acquisition_month < 1 || rec.acquisition_month > 12)
        throw Error(ErrorCode::InvalidRecord, rec.tile_id + ": month " + std::to_string(rec.acquisition_month));
    if (rec.biome_id < 0 || rec.biome_id >= 15)
        throw Error(ErrorCode::InvalidRecord, rec.tile_id + ": biome " + std::to_string(rec.biome_id));

    StratumKey key;
    key.lat_bin = std::min(29, static_cast<int>(std::floor((rec.latitude_deg + 90.0) / 6.0)));
    key.lon_bin = std::min(59, static_cast<int>(std::floor((rec.longitude_deg + 180.0) / 6.0)));
    // meteorological quarters: DJF=0, MAM=1, JJA=2, SON=3
    key.season = rec.acquisition_month % 12 / 3;
    key.biome_id = rec.biome_id;
    return key;
}

std::vector<std::string> stratify_catalog(const std::vector<CatalogRecord>& records, Rng& rng) {
    std::map<StratumKey, std::vector<const CatalogRecord*>> buckets;
    for (const auto& rec : records) buckets[stratum_key(rec)].push_back(&rec);
    std::vector<std::string> out;
    out.reserve(buckets.size());
    for (const auto& [key, members] : buckets)
        out.push_back(members[rng.uniform_index(members.size())]->tile_id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CatalogRecord> parse_catalog(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("catalog is not valid JSON: ") + e.what());
    }
    std::vector<CatalogRecord> out;
    try {
        for (const auto& rj : j) {
            CatalogRecord r;
            r.tile_id = rj.at("tile_id").get<std::string>();
            r.latitude_deg = rj.at("latitude_deg").get<double>();
            r.longitude_deg = rj.at("longitude_deg").get<double>();
            r.acquisition_month = rj.at("acquisition_month").get<int>();
            r.biome_id = rj.at("biome_id").get<int>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("catalog schema error: ") + e.what());
    }
    return out;
}

std::vector<CatalogRecord> load_catalog(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_catalog(ss.str());
}

std::array<SpectralCube, 4> quarter_patches(const SpectralCube& cube) {
    if (cube.height < 2 || cube.width < 2)
        throw Error(ErrorCode::TooSmall, "quartering needs at least 2x2 spatial extent");
    int h0 = cube.height / 2, w0 = cube.width / 2;
    auto crop = [&](int r0, int r1, int c0, int c1) {
        SpectralCube q;
        q.width = c1 - c0;
        q.height = r1 - r0;
        q.channels = cube.channels;
        q.data.resize(q.plane_size() * q.channels.size());
        for (int c = 0; c < cube.channel_count(); ++c)
            for (int r = r0; r < r1; ++r)
                for (int col = c0; col < c1; ++col)
                    q.at(c, r - r0, col - c0) = cube.at(c, r, col);
        return q;
    };
    return {crop(0, h0, 0, w0), crop(0, h0, w0, cube.width),
            crop(h0, cube.height, 0, w0), crop(h0, cube.height, w0, cube.width)};
}

ChannelMeta pseudo_band_from_curve(const std::vector<SensitivitySample>& curve) {
    if (curve.size() < 2) throw Error(ErrorCode::DegenerateCurve, "curve needs at least 2 samples");
    double sum_s = 0.0, sum_ls = 0.0, s_max = 0.0;
    for (const auto& p : curve) {
        if (p.sensitivity < 0.0) throw Error(ErrorCode::DegenerateCurve, "negative sensitivity");
        sum_s += p.sensitivity;
        sum_ls += p.wavelength_nm * p.sensitivity;
        s_max = std::max(s_max, p.sensitivity);
    }
    if (sum_s <= 0.0) throw Error(ErrorCode::DegenerateCurve, "all-zero sensitivity");

    double half = s_max / 2.0;
    auto interp = [](const SensitivitySample& a, const SensitivitySample& b, double level) {
        double t = (level - a.sensitivity) / (b.sensitivity - a.sensitivity);
        return a.wavelength_nm + t * (b.wavelength_nm - a.wavelength_nm);
    };
    double left = curve.front().wavelength_nm;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].sensitivity >= half) {
            left = i == 0 ? curve[i].wavelength_nm : interp(curve[i - 1], curve[i], half);
            break;
        }
    }
    double right = curve.back().wavelength_nm;
    for (std::size_t i = curve.size(); i-- > 0;) {
        if (curve[i].sensitivity >= half) {
            right = i + 1 == curve.size() ? curve[i].wavelength_nm : interp(curve[i + 1], curve[i], half);
            break;
        }
    }
    ChannelMeta meta;
    meta.wavelength_nm = sum_ls / sum_s;
    meta.bandwidth_nm = right - left;
    return meta;
}

std::array<ChannelMeta, 3> rgb_pseudo_bands(const std::vector<SensitivitySample>& red,
                                            const std::vector<SensitivitySample>& green,
                                            const std::vector<SensitivitySample>& blue) {
    return {pseudo_band_from_curve(red), pseudo_band_from_curve(green), pseudo_band_from_curve(blue)};
}

std::vector<SensitivitySample> load_sensitivity_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<SensitivitySample> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw Error(ErrorCode::MalformedValue, "sensitivity CSV line: " + line);
        try {
            out.push_back({std::stod(a), std::stod(b)});
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedValue, "sensitivity CSV line: " + line);
        }
    }
    return out;
}

}  // namespace hsmae
