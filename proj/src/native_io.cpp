#include "hsmae/native_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hsmae {

namespace {

static_assert(std::endian::native == std::endian::little,
              "native container I/O assumes a little-endian host");

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& value, std::size_t expect) {
    std::size_t b = value.find('{');
    std::size_t e = value.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e <= b)
        throw Error(ErrorCode::CorruptHeader, "list value missing braces");
    std::vector<double> out;
    std::stringstream ss(value.substr(b + 1, e - b - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::CorruptHeader, "bad list item '" + item + "'");
        }
    }
    if (out.size() != expect) throw Error(ErrorCode::CorruptHeader, "list length mismatch");
    return out;
}

}  // namespace

void write_native(const SpectralCube& cube, std::ostream& sink) {
    require_valid(cube);
    sink << "HSC1\n";
    sink << "width = " << cube.width << "\n";
    sink << "height = " << cube.height << "\n";
    sink << "channels = " << cube.channel_count() << "\n";
    sink << "wavelengths = { ";
    for (int c = 0; c < cube.channel_count(); ++c)
        sink << (c ? ", " : "") << fmt_double(cube.channels[c].wavelength_nm);
    sink << " }\n";
    sink << "bandwidths = { ";
    for (int c = 0; c < cube.channel_count(); ++c)
        sink << (c ? ", " : "") << fmt_double(cube.channels[c].bandwidth_nm);
    sink << " }\n";
    sink << "end\n";
    sink.write(reinterpret_cast<const char*>(cube.data.data()),
               static_cast<std::streamsize>(cube.data.size() * sizeof(float)));
    if (!sink) throw Error(ErrorCode::IoError, "write failed");
}

SpectralCube read_native(std::istream& source) {
    std::string line;
    if (!std::getline(source, line) || trim(line) != "HSC1")
        throw Error(ErrorCode::CorruptHeader, "missing HSC1 magic");

    int width = -1, height = -1, channels = -1;
    std::string wl_raw, bw_raw;
    for (;;) {
        if (!std::getline(source, line)) throw Error(ErrorCode::CorruptHeader, "unterminated header");
        std::string t = trim(line);
        if (t == "end") break;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::CorruptHeader, "bad header line: " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "width") width = std::stoi(value);
            else if (key == "height") height = std::stoi(value);
            else if (key == "channels") channels = std::stoi(value);
            else if (key == "wavelengths") wl_raw = value;
            else if (key == "bandwidths") bw_raw = value;
            // unknown keys ignored
        } catch (const std::exception&) {
            throw Error(ErrorCode::CorruptHeader, "bad value for " + key);
        }
    }
    if (width < 1 || height < 1) throw Error(ErrorCode::CorruptHeader, "bad dimensions");
    if (channels < 1) throw Error(ErrorCode::CorruptHeader, "channel count must be >= 1");
    if (wl_raw.empty() || bw_raw.empty())
        throw Error(ErrorCode::CorruptHeader, "missing wavelengths or bandwidths");

    SpectralCube cube;
    cube.width = width;
    cube.height = height;
    std::vector<double> wl = parse_list(wl_raw, static_cast<std::size_t>(channels));
    std::vector<double> bw = parse_list(bw_raw, static_cast<std::size_t>(channels));
    cube.channels.resize(channels);
    for (int c = 0; c < channels; ++c) cube.channels[c] = {wl[c], bw[c]};

    std::size_t count = cube.plane_size() * channels;
    cube.data.resize(count);
    source.read(reinterpret_cast<char*>(cube.data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(source.gcount()) != count * sizeof(float))
        throw Error(ErrorCode::TruncatedData, "payload shorter than header promises");
    return cube;
}

void write_native_file(const SpectralCube& cube, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    write_native(cube, f);
}

SpectralCube read_native_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_native(f);
}

}  // namespace hsmae
