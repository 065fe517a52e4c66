#pragma once

#include <string>

#include "escher/render.hpp"

namespace escher {

// 8-bit PNG, gamma-naive (value * 255, rounded). Rows are flipped on the way
// out so row 0 of the buffer (world bottom) lands at the image bottom.
void write_png(const RasterImage& image, const std::string& path);

// Reads any libpng-supported PNG as 8-bit gray or RGB values in [0, 1].
RasterImage read_png(const std::string& path);

RasterImage to_grayscale(const RasterImage& image);

}  // namespace escher
