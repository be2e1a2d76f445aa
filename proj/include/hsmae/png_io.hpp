#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hsmae {

// Minimal RGB8 PNG writer (zlib-compressed, filter 0). pixels are interleaved
// RGB rows, length 3*width*height.
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& pixels);

// Planar [3 x H x W] floats in [0,1] -> interleaved 8-bit.
std::vector<std::uint8_t> planes_to_rgb8(const std::vector<float>& planes, int width, int height);

}  // namespace hsmae
