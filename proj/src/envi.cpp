#include "hsmae/envi.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hsmae {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long v = std::stol(trim(value), &pos);
        if (pos != trim(value).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedValue, key + " = " + value);
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string body = value;
    // strip enclosing braces if present
    std::size_t b = body.find('{');
    std::size_t e = body.rfind('}');
    if (b != std::string::npos && e != std::string::npos && e > b) body = body.substr(b + 1, e - b - 1);
    std::string item;
    std::stringstream ss(body);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument("trailing");
            out.push_back(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedValue, key + " list item '" + item + "'");
        }
    }
    return out;
}

}  // namespace

const char* interleave_name(Interleave il) {
    switch (il) {
        case Interleave::bsq: return "bsq";
        case Interleave::bil: return "bil";
        case Interleave::bip: return "bip";
    }
    return "?";
}

EnviHeader parse_envi_header(const std::string& text) {
    std::size_t magic = text.find("ENVI");
    // the magic must be the first non-whitespace token
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || magic != first)
        throw Error(ErrorCode::MissingMagic, "header does not start with ENVI");

    EnviHeader h;
    std::istringstream in(text.substr(first + 4));
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == ';') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) continue;  // tolerate stray lines
        std::string key = lower(trim(t.substr(0, eq)));
        std::string value = trim(t.substr(eq + 1));
        // multi-line "{...}" blocks
        if (!value.empty() && value.find('{') != std::string::npos &&
            value.find('}') == std::string::npos) {
            std::string cont;
            while (std::getline(in, cont)) {
                value += "\n" + cont;
                if (cont.find('}') != std::string::npos) break;
            }
        }
        h.raw_keys[key] = value;
    }

    auto require = [&](const char* key) -> const std::string& {
        auto it = h.raw_keys.find(key);
        if (it == h.raw_keys.end()) throw Error(ErrorCode::MissingKey, key);
        return it->second;
    };

    h.samples = static_cast<int>(parse_int("samples", require("samples")));
    h.lines = static_cast<int>(parse_int("lines", require("lines")));
    h.bands = static_cast<int>(parse_int("bands", require("bands")));
    if (h.samples < 1 || h.lines < 1 || h.bands < 1)
        throw Error(ErrorCode::MalformedValue, "samples/lines/bands must be >= 1");
    h.data_type = static_cast<int>(parse_int("data type", require("data type")));

    std::string il = lower(trim(require("interleave")));
    if (il == "bsq") h.interleave = Interleave::bsq;
    else if (il == "bil") h.interleave = Interleave::bil;
    else if (il == "bip") h.interleave = Interleave::bip;
    else throw Error(ErrorCode::MalformedValue, "interleave = " + il);

    if (auto it = h.raw_keys.find("byte order"); it != h.raw_keys.end())
        h.byte_order = parse_int("byte order", it->second) == 0 ? ByteOrder::little : ByteOrder::big;
    if (auto it = h.raw_keys.find("header offset"); it != h.raw_keys.end())
        h.header_offset = parse_int("header offset", it->second);
    if (h.header_offset < 0) throw Error(ErrorCode::MalformedValue, "negative header offset");

    if (auto it = h.raw_keys.find("wavelength"); it != h.raw_keys.end()) {
        h.wavelength = parse_double_list("wavelength", it->second);
        if (static_cast<int>(h.wavelength->size()) != h.bands)
            throw Error(ErrorCode::LengthMismatch, "wavelength list length != bands");
    }
    if (auto it = h.raw_keys.find("fwhm"); it != h.raw_keys.end()) {
        h.fwhm = parse_double_list("fwhm", it->second);
        if (static_cast<int>(h.fwhm->size()) != h.bands)
            throw Error(ErrorCode::LengthMismatch, "fwhm list length != bands");
    }
    if (auto it = h.raw_keys.find("wavelength units"); it != h.raw_keys.end())
        h.wavelength_units = it->second;
    return h;
}

std::size_t envi_type_size(int data_type) {
    switch (data_type) {
        case 1: return 1;   // u8
        case 2: return 2;   // i16
        case 3: return 4;   // i32
        case 4: return 4;   // f32
        case 5: return 8;   // f64
        case 12: return 2;  // u16
        case 13: return 4;  // u32
        default:
            throw Error(ErrorCode::UnsupportedDataType, "ENVI data type " + std::to_string(data_type));
    }
}

namespace {

float decode_value(const std::uint8_t* p, int data_type, bool swap) {
    std::uint8_t buf[8];
    std::size_t n = envi_type_size(data_type);
    for (std::size_t i = 0; i < n; ++i) buf[i] = swap ? p[n - 1 - i] : p[i];
    switch (data_type) {
        case 1: return static_cast<float>(buf[0]);
        case 2: {
            std::int16_t v;
            std::memcpy(&v, buf, 2);
            return static_cast<float>(v);
        }
        case 3: {
            std::int32_t v;
            std::memcpy(&v, buf, 4);
            return static_cast<float>(v);
        }
        case 4: {
            float v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case 5: {
            double v;
            std::memcpy(&v, buf, 8);
            return static_cast<float>(v);
        }
        case 12: {
            std::uint16_t v;
            std::memcpy(&v, buf, 2);
            return static_cast<float>(v);
        }
        case 13: {
            std::uint32_t v;
            std::memcpy(&v, buf, 4);
            return static_cast<float>(v);
        }
    }
    throw Error(ErrorCode::UnsupportedDataType, std::to_string(data_type));
}

}  // namespace

SpectralCube read_cube(const EnviHeader& header, const std::vector<std::uint8_t>& raw_bytes,
                       std::optional<double> default_bandwidth_nm) {
    std::size_t elem = envi_type_size(header.data_type);
    std::size_t count = static_cast<std::size_t>(header.samples) * header.lines * header.bands;
    std::size_t need = static_cast<std::size_t>(header.header_offset) + count * elem;
    if (raw_bytes.size() < need)
        throw Error(ErrorCode::TruncatedData,
                    "need " + std::to_string(need) + " bytes, have " + std::to_string(raw_bytes.size()));

    if (!header.wavelength)
        throw Error(ErrorCode::NoSpectralMetadata, "header has no wavelength list");
    if (!header.fwhm && !default_bandwidth_nm)
        throw Error(ErrorCode::NoSpectralMetadata,
                    "header has no fwhm list and no default bandwidth was given");

    SpectralCube cube;
    cube.width = header.samples;
    cube.height = header.lines;
    cube.channels.resize(header.bands);
    for (int c = 0; c < header.bands; ++c) {
        cube.channels[c].wavelength_nm = (*header.wavelength)[c];
        cube.channels[c].bandwidth_nm = header.fwhm ? (*header.fwhm)[c] : *default_bandwidth_nm;
    }
    cube.data.resize(count);

    const std::uint8_t* base = raw_bytes.data() + header.header_offset;
    bool swap = false;
    if (elem > 1) {
        const std::uint16_t probe = 1;
        bool host_little = *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
        swap = (header.byte_order == ByteOrder::big) == host_little;
    }
    const int W = header.samples, H = header.lines, B = header.bands;
    for (std::size_t i = 0; i < count; ++i) {
        int c, r, col;
        switch (header.interleave) {
            case Interleave::bsq:
                c = static_cast<int>(i / (static_cast<std::size_t>(W) * H));
                r = static_cast<int>(i / W % H);
                col = static_cast<int>(i % W);
                break;
            case Interleave::bil:
                r = static_cast<int>(i / (static_cast<std::size_t>(W) * B));
                c = static_cast<int>(i / W % B);
                col = static_cast<int>(i % W);
                break;
            case Interleave::bip:
            default:
                r = static_cast<int>(i / (static_cast<std::size_t>(W) * B));
                col = static_cast<int>(i / B % W);
                c = static_cast<int>(i % B);
                break;
        }
        cube.at(c, r, col) = decode_value(base + i * elem, header.data_type, swap);
    }
    return cube;
}

SpectralCube read_envi_files(const std::string& hdr_path, const std::string& raw_path,
                             std::optional<double> default_bandwidth_nm) {
    std::ifstream hdr(hdr_path);
    if (!hdr) throw Error(ErrorCode::IoError, "cannot open " + hdr_path);
    std::stringstream text;
    text << hdr.rdbuf();
    EnviHeader header = parse_envi_header(text.str());

    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw Error(ErrorCode::IoError, "cannot open " + raw_path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(raw)),
                                    std::istreambuf_iterator<char>());
    return read_cube(header, bytes, default_bandwidth_nm);
}

}  // namespace hsmae
