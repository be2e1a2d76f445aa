#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsmae/cube.hpp"

namespace hsmae {

enum class Interleave { bsq, bil, bip };
enum class ByteOrder { little, big };

struct EnviHeader {
    int samples = 0;  // width
    int lines = 0;    // height
    int bands = 0;
    Interleave interleave = Interleave::bsq;
    int data_type = 0;  // ENVI type code
    ByteOrder byte_order = ByteOrder::little;
    std::int64_t header_offset = 0;
    std::optional<std::vector<double>> wavelength;
    std::optional<std::vector<double>> fwhm;
    std::optional<std::string> wavelength_units;
    std::map<std::string, std::string> raw_keys;  // every key as seen, unparsed
};

// Parses ENVI ".hdr" text. List values ("{...}") may span lines. Unknown keys
// are kept in raw_keys. Never crashes on noise; malformed input throws Error.
EnviHeader parse_envi_header(const std::string& text);

std::size_t envi_type_size(int data_type);  // throws UnsupportedDataType

// De-interleaves raw pixel bytes into the native channel-major cube. Integer
// types are cast to float without rescaling. If the header lacks wavelength or
// fwhm the caller must supply a default bandwidth (> 0) or per-channel
// metadata is refused with NoSpectralMetadata.
SpectralCube read_cube(const EnviHeader& header, const std::vector<std::uint8_t>& raw_bytes,
                       std::optional<double> default_bandwidth_nm = std::nullopt);

SpectralCube read_envi_files(const std::string& hdr_path, const std::string& raw_path,
                             std::optional<double> default_bandwidth_nm = std::nullopt);

const char* interleave_name(Interleave il);

}  // namespace hsmae
