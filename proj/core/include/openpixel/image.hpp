#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace openpixel {

// Interleaved 8-bit image, row-major, c samples per pixel.
struct ImageU8 {
    int64_t h = 0;
    int64_t w = 0;
    int64_t c = 0;
    std::vector<uint8_t> data;

    ImageU8() = default;
    ImageU8(int64_t height, int64_t width, int64_t channels)
        : h(height), w(width), c(channels),
          data(static_cast<size_t>(height * width * channels), 0) {
        if (height <= 0 || width <= 0 || channels <= 0)
            throw std::invalid_argument("image dimensions must be positive");
    }

    uint8_t at(int64_t y, int64_t x, int64_t ch) const {
        return data[static_cast<size_t>((y * w + x) * c + ch)];
    }
    uint8_t& at(int64_t y, int64_t x, int64_t ch) {
        return data[static_cast<size_t>((y * w + x) * c + ch)];
    }
};

// Symmetric (edge-repeating) mirror fold of an arbitrary integer index into
// [0, n). Period 2n, so any pad width works, including around 1-pixel images.
inline int64_t fold_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    const int64_t period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

// Shared sample normalization for every path that feeds the network, so
// patch extraction and dense prediction see bit-identical values.
template <typename T>
inline T normalize_u8(uint8_t v) {
    return static_cast<T>(v) / static_cast<T>(255);
}

}  // namespace openpixel
