#pragma once

#include <iosfwd>
#include <string>

#include "hsmae/cube.hpp"

namespace hsmae {

// Native ".hsc" container: a UTF-8 key-value header terminated by a line
// reading "end", followed by raw little-endian float32 values in
// (channel, row, col) order. Round-trips 32-bit cubes bit-exactly.
//
//   HSC1
//   width = <int>
//   height = <int>
//   channels = <int>
//   wavelengths = { w0, w1, ... }   # nm, one per channel
//   bandwidths = { b0, b1, ... }    # nm, one per channel
//   end
void write_native(const SpectralCube& cube, std::ostream& sink);
SpectralCube read_native(std::istream& source);

void write_native_file(const SpectralCube& cube, const std::string& path);
SpectralCube read_native_file(const std::string& path);

}  // namespace hsmae
