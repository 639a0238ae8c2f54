#pragma once

#include <array>

#include "openpixel/dataset.hpp"

namespace openpixel {

// Desk-scale synthetic tiles: seeded Voronoi regions filled with per-class
// textures, labels exact by construction.
struct SynthConfig {
    int64_t tiles = 8;
    int64_t height = 256;
    int64_t width = 256;
    int64_t classes = 5;
    int64_t cells = 24;   // Voronoi regions per tile, assigned round-robin to classes
    double noise = 10.0;  // uniform per-sample amplitude, 8-bit units
    uint64_t seed = 1;

    void validate() const;
};

// Noise-free texture sample for a class at (y, x): distinct base hue per class
// modulated by a stripe/checker pattern.
std::array<uint8_t, 3> synth_texture(int64_t class_idx, int64_t classes, int64_t y, int64_t x);

// Ground-truth colors for the generated classes ("class0".."classN-1").
Palette synth_palette(int64_t classes);

std::vector<LabeledTile> generate_synthetic(const SynthConfig& cfg);

// Writes tiles/<id>/{image,labels}.png plus palette.txt under out_root.
void write_synthetic_dataset(const SynthConfig& cfg, const std::string& out_root);

}  // namespace openpixel
