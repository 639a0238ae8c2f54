#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace openpixel {

// Reserved label ids shared across the pipeline.
inline constexpr uint8_t kUnknownLabel = 255;
inline constexpr uint8_t kIgnoreLabel = 254;

// H x W x n_classes per-pixel class distributions, pixel-major.
struct ProbabilityMap {
    int64_t h = 0;
    int64_t w = 0;
    int64_t n_classes = 0;
    std::vector<float> p;

    ProbabilityMap() = default;
    ProbabilityMap(int64_t height, int64_t width, int64_t classes)
        : h(height), w(width), n_classes(classes),
          p(static_cast<size_t>(height * width * classes), 0.0f) {
        if (height <= 0 || width <= 0 || classes <= 0)
            throw std::invalid_argument("probability map dimensions must be positive");
    }

    const float* pixel(int64_t y, int64_t x) const {
        return p.data() + (y * w + x) * n_classes;
    }
    float* pixel(int64_t y, int64_t x) { return p.data() + (y * w + x) * n_classes; }

    // Each pixel's vector must be a distribution: values in [0,1], sum 1.
    void validate(double tol = 1e-6) const;
};

// H x W labels over known training ids plus the UNKNOWN sentinel.
struct PredictionMap {
    int64_t h = 0;
    int64_t w = 0;
    std::vector<uint8_t> labels;

    PredictionMap() = default;
    PredictionMap(int64_t height, int64_t width)
        : h(height), w(width), labels(static_cast<size_t>(height * width), 0) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("prediction map dimensions must be positive");
    }

    uint8_t at(int64_t y, int64_t x) const { return labels[static_cast<size_t>(y * w + x)]; }
    uint8_t& at(int64_t y, int64_t x) { return labels[static_cast<size_t>(y * w + x)]; }
};

// Little-endian binary container for probability maps ("OPXPROB1").
void save_probability_map(const ProbabilityMap& map, const std::string& path);
ProbabilityMap load_probability_map(const std::string& path);

}  // namespace openpixel
