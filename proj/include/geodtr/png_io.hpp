#pragma once

#include "geodtr/image.hpp"

#include <string>
#include <vector>

namespace geodtr {

/// Quantizes to 8-bit RGB, row-major interleaved. The same rounding
/// (floor(x*255 + 0.5) after clamping) is used for file output and for
/// content hashing so the two agree byte for byte.
std::vector<unsigned char> to_rgb8(const Image& img);

Image from_rgb8(const std::vector<unsigned char>& data, int h, int w, View v);

void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path, View view);

}  // namespace geodtr
