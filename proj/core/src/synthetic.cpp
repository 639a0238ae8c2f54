#include "openpixel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "openpixel/rng.hpp"

namespace openpixel {

namespace {

std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    auto to8 = [&](double f) { return static_cast<uint8_t>(std::lround((f + m) * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

uint8_t clamp8(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

void SynthConfig::validate() const {
    if (classes < 2) throw std::invalid_argument("synthetic: class count must be >= 2");
    if (tiles < 1) throw std::invalid_argument("synthetic: tile count must be >= 1");
    if (height < 1 || width < 1) throw std::invalid_argument("synthetic: tile size must be >= 1");
    if (cells < classes)
        throw std::invalid_argument("synthetic: region count must be >= class count");
    if (noise < 0 || noise > 128) throw std::invalid_argument("synthetic: noise must be in [0, 128]");
}

std::array<uint8_t, 3> synth_texture(int64_t class_idx, int64_t classes, int64_t y, int64_t x) {
    const auto base = hsv_to_rgb((static_cast<double>(class_idx) + 0.7) /
                                     static_cast<double>(classes),
                                 0.55, 0.78);
    const int64_t period = 10 + 3 * (class_idx % 4);
    double mod = 1.0;
    switch (class_idx % 4) {
        case 0: break;  // solid
        case 1: mod = (y / period) % 2 == 0 ? 1.15 : 0.8; break;             // horizontal stripes
        case 2: mod = (x / period) % 2 == 0 ? 1.15 : 0.8; break;             // vertical stripes
        case 3: mod = ((y / period + x / period) % 2 == 0) ? 1.15 : 0.8; break;  // checker
    }
    return {clamp8(base[0] * mod), clamp8(base[1] * mod), clamp8(base[2] * mod)};
}

Palette synth_palette(int64_t classes) {
    if (classes < 2 || classes > 200)
        throw std::invalid_argument("synthetic palette supports 2..200 classes");
    Palette p;
    for (int64_t k = 0; k < classes; ++k) {
        const auto rgb = hsv_to_rgb((static_cast<double>(k) + 0.35) / static_cast<double>(classes),
                                    0.85, 0.95);
        p.entries.push_back({rgb[0], rgb[1], rgb[2], "class" + std::to_string(k)});
    }
    return p;
}

std::vector<LabeledTile> generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    std::vector<LabeledTile> tiles;
    for (int64_t t = 0; t < cfg.tiles; ++t) {
        Rng rng = root.fork(static_cast<uint64_t>(t) + 1);
        LabeledTile tile;
        tile.id = "synth" + std::string(t < 10 ? "0" : "") + std::to_string(t);
        tile.image = ImageU8(cfg.height, cfg.width, 3);
        tile.labels.resize(static_cast<size_t>(cfg.height * cfg.width));

        // Voronoi seeds with a round-robin class assignment, shuffled so every
        // class owns roughly cells/classes regions at random positions.
        std::vector<int64_t> cy(static_cast<size_t>(cfg.cells)),
            cx(static_cast<size_t>(cfg.cells));
        std::vector<uint8_t> cell_class(static_cast<size_t>(cfg.cells));
        for (int64_t i = 0; i < cfg.cells; ++i) {
            cy[static_cast<size_t>(i)] = static_cast<int64_t>(rng.next_below(
                static_cast<uint64_t>(cfg.height)));
            cx[static_cast<size_t>(i)] = static_cast<int64_t>(rng.next_below(
                static_cast<uint64_t>(cfg.width)));
            cell_class[static_cast<size_t>(i)] = static_cast<uint8_t>(i % cfg.classes);
        }
        rng.shuffle(cell_class);

        for (int64_t y = 0; y < cfg.height; ++y) {
            for (int64_t x = 0; x < cfg.width; ++x) {
                int64_t best = 0;
                int64_t best_d = std::numeric_limits<int64_t>::max();
                for (int64_t i = 0; i < cfg.cells; ++i) {
                    const int64_t dy = y - cy[static_cast<size_t>(i)];
                    const int64_t dx = x - cx[static_cast<size_t>(i)];
                    const int64_t d = dy * dy + dx * dx;
                    if (d < best_d) {
                        best_d = d;
                        best = i;
                    }
                }
                const uint8_t cls = cell_class[static_cast<size_t>(best)];
                tile.labels[static_cast<size_t>(y * cfg.width + x)] = cls;
                const auto tex = synth_texture(cls, cfg.classes, y, x);
                for (int64_t ch = 0; ch < 3; ++ch) {
                    const double v = static_cast<double>(tex[static_cast<size_t>(ch)]) +
                                     cfg.noise * rng.uniform(-1.0, 1.0);
                    tile.image.at(y, x, ch) = clamp8(v);
                }
            }
        }
        tiles.push_back(std::move(tile));
    }
    return tiles;
}

void write_synthetic_dataset(const SynthConfig& cfg, const std::string& out_root) {
    const Palette palette = synth_palette(cfg.classes);
    std::filesystem::create_directories(out_root);
    palette.save((std::filesystem::path(out_root) / "palette.txt").string());
    for (const auto& tile : generate_synthetic(cfg)) write_tile(tile, out_root, palette);
}

}  // namespace openpixel
