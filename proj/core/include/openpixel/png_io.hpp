#pragma once

#include <string>

#include "openpixel/image.hpp"

namespace openpixel {

// 8-bit PNG reader. Paletted files are expanded to RGB; the result has
// 3 channels (RGB) or 1 (grayscale). 16-bit depth and alpha are rejected so
// every sample stays a plain 8-bit value.
ImageU8 read_png(const std::string& path);

// Deterministic writers (fixed zlib settings): identical pixels give
// identical bytes.
void write_png_rgb8(const ImageU8& image, const std::string& path);
void write_png_gray8(const ImageU8& image, const std::string& path);

}  // namespace openpixel
