#include "hsmae/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "hsmae/errors.hpp"

namespace hsmae {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::vector<std::uint8_t>& out, const char* type,
                 const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start)));
    put_u32(out, crc);
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(ErrorCode::ShapeMismatch, "pixel buffer does not match dimensions");

    // scanlines with filter byte 0
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
    for (int r = 0; r < height; ++r) {
        raw.push_back(0);
        const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(r) * width * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw Error(ErrorCode::IoError, "zlib compression failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // truecolor
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // filter method
    ihdr.push_back(0);   // no interlace
    write_chunk(png, "IHDR", ihdr);
    write_chunk(png, "IDAT", compressed);
    write_chunk(png, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!f) throw Error(ErrorCode::IoError, "write failed: " + path);
}

std::vector<std::uint8_t> planes_to_rgb8(const std::vector<float>& planes, int width, int height) {
    std::size_t plane = static_cast<std::size_t>(width) * height;
    if (planes.size() != plane * 3)
        throw Error(ErrorCode::ShapeMismatch, "plane buffer does not match dimensions");
    std::vector<std::uint8_t> out(plane * 3);
    for (std::size_t i = 0; i < plane; ++i) {
        for (int p = 0; p < 3; ++p) {
            float v = std::clamp(planes[p * plane + i], 0.0f, 1.0f);
            out[i * 3 + p] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
        }
    }
    return out;
}

}  // namespace hsmae
