#include "hsmae.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hsmae/envi.hpp"
#include "hsmae/native_io.hpp"
#include "hsmae/run_config.hpp"
#include "hsmae/sampling.hpp"

namespace {

thread_local std::string g_last_error;

hsmae_status status_for(const hsmae::Error& e) {
    using hsmae::ErrorCode;
    switch (e.code()) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidCount:
        case ErrorCode::OutOfRange:
        case ErrorCode::InvalidRecord:
        case ErrorCode::TooSmall:
            return HSMAE_ERR_INVALID;
        case ErrorCode::MissingMagic:
        case ErrorCode::MissingKey:
        case ErrorCode::MalformedValue:
        case ErrorCode::LengthMismatch:
        case ErrorCode::CorruptHeader:
        case ErrorCode::UnsupportedDataType:
        case ErrorCode::NoSpectralMetadata:
        case ErrorCode::TruncatedData:
            return HSMAE_ERR_PARSE;
        case ErrorCode::IoError:
            return HSMAE_ERR_IO;
        default:
            return HSMAE_ERR_RUNTIME;
    }
}

template <typename Fn>
hsmae_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return HSMAE_OK;
    } catch (const hsmae::Error& e) {
        g_last_error = e.what();
        return status_for(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HSMAE_ERR_RUNTIME;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct hsmae_cube {
    hsmae::SpectralCube cube;
};

extern "C" {

const char* hsmae_last_error(void) { return g_last_error.c_str(); }

hsmae_status hsmae_cube_read_envi(const char* hdr_path, const char* raw_path,
                                  double default_bandwidth_nm, hsmae_cube** out) {
    if (!hdr_path || !raw_path || !out) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] {
        std::optional<double> bw;
        if (default_bandwidth_nm > 0.0) bw = default_bandwidth_nm;
        auto* h = new hsmae_cube{hsmae::read_envi_files(hdr_path, raw_path, bw)};
        *out = h;
    });
}

hsmae_status hsmae_cube_read_native(const char* path, hsmae_cube** out) {
    if (!path || !out) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] { *out = new hsmae_cube{hsmae::read_native_file(path)}; });
}

hsmae_status hsmae_cube_write_native(const hsmae_cube* cube, const char* path) {
    if (!cube || !path) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] { hsmae::write_native_file(cube->cube, path); });
}

hsmae_status hsmae_cube_dims(const hsmae_cube* cube, int32_t* width, int32_t* height,
                             int32_t* channels) {
    if (!cube) {
        g_last_error = "null cube";
        return HSMAE_ERR_INVALID;
    }
    if (width) *width = cube->cube.width;
    if (height) *height = cube->cube.height;
    if (channels) *channels = cube->cube.channel_count();
    return HSMAE_OK;
}

hsmae_status hsmae_cube_channel_meta(const hsmae_cube* cube, double* wavelengths_nm,
                                     double* bandwidths_nm) {
    if (!cube) {
        g_last_error = "null cube";
        return HSMAE_ERR_INVALID;
    }
    for (int c = 0; c < cube->cube.channel_count(); ++c) {
        if (wavelengths_nm) wavelengths_nm[c] = cube->cube.channels[c].wavelength_nm;
        if (bandwidths_nm) bandwidths_nm[c] = cube->cube.channels[c].bandwidth_nm;
    }
    return HSMAE_OK;
}

void hsmae_cube_free(hsmae_cube* cube) { delete cube; }

hsmae_status hsmae_envi_header_to_json(const char* hdr_path, char** json_out) {
    if (!hdr_path || !json_out) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] {
        std::ifstream f(hdr_path);
        if (!f) throw hsmae::Error(hsmae::ErrorCode::IoError, std::string("cannot open ") + hdr_path);
        std::stringstream ss;
        ss << f.rdbuf();
        hsmae::EnviHeader h = hsmae::parse_envi_header(ss.str());
        nlohmann::json j;
        j["samples"] = h.samples;
        j["lines"] = h.lines;
        j["bands"] = h.bands;
        j["interleave"] = hsmae::interleave_name(h.interleave);
        j["data_type"] = h.data_type;
        j["byte_order"] = h.byte_order == hsmae::ByteOrder::little ? "little" : "big";
        j["header_offset"] = h.header_offset;
        j["has_wavelength"] = h.wavelength.has_value();
        j["has_fwhm"] = h.fwhm.has_value();
        if (h.wavelength) j["wavelength"] = *h.wavelength;
        if (h.fwhm) j["fwhm"] = *h.fwhm;
        if (h.wavelength_units) j["wavelength_units"] = *h.wavelength_units;
        *json_out = dup_string(j.dump(2));
    });
}

hsmae_status hsmae_stratify(const char* catalog_json_path, uint64_t seed, char** tile_ids_out) {
    if (!catalog_json_path || !tile_ids_out) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] {
        auto records = hsmae::load_catalog(catalog_json_path);
        hsmae::Rng rng(seed);
        auto ids = hsmae::stratify_catalog(records, rng);
        std::string out;
        for (const auto& id : ids) {
            out += id;
            out += '\n';
        }
        *tile_ids_out = dup_string(out);
    });
}

hsmae_status hsmae_run_pretrain(const char* config_json_path) {
    if (!config_json_path) {
        g_last_error = "null config path";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] { hsmae::run_pretrain(config_json_path); });
}

hsmae_status hsmae_run_finetune(const char* config_json_path) {
    if (!config_json_path) {
        g_last_error = "null config path";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] { hsmae::run_finetune(config_json_path); });
}

hsmae_status hsmae_run_eval(const char* config_json_path) {
    if (!config_json_path) {
        g_last_error = "null config path";
        return HSMAE_ERR_INVALID;
    }
    return guarded([&] { hsmae::run_eval(config_json_path); });
}

hsmae_status hsmae_run_reconstruct(const char* checkpoint_path, const char* cube_path,
                                   double r_spatial, double r_channel, uint64_t seed,
                                   const char* out_dir) {
    if (!checkpoint_path || !cube_path || !out_dir) {
        g_last_error = "null argument";
        return HSMAE_ERR_INVALID;
    }
    return guarded(
        [&] { hsmae::run_reconstruct(checkpoint_path, cube_path, r_spatial, r_channel, seed, out_dir); });
}

void hsmae_string_free(char* s) { std::free(s); }

}  // extern "C"
