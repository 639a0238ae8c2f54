#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "openpixel/image.hpp"
#include "openpixel/maps.hpp"
#include "openpixel/network.hpp"

namespace openpixel {

// Color-coded label palette: text lines "R,G,B,class_name".
struct PaletteEntry {
    uint8_t r = 0, g = 0, b = 0;
    std::string name;
};

struct Palette {
    std::vector<PaletteEntry> entries;

    static Palette load(const std::string& path);
    void save(const std::string& path) const;

    // ISPRS Vaihingen convention: street, building, grass, tree, car.
    static Palette isprs_vaihingen();

    std::vector<std::string> class_names() const;
    int64_t index_of(const std::string& name) const;  // -1 when absent
};

// Image tile plus per-pixel ground truth in dataset class ids (palette order);
// pixels whose label color matches no palette entry carry kIgnoreLabel.
struct LabeledTile {
    std::string id;
    ImageU8 image;                // H x W x 3
    std::vector<uint8_t> labels;  // H x W dataset ids
};

// Mapping between dataset classes and contiguous training ids for one
// leave-one-class-out rotation (or the closed scheme when nothing is held out).
struct ClassScheme {
    std::vector<std::string> class_names;  // dataset order
    std::vector<uint8_t> known_ids;        // training id -> dataset id
    std::optional<uint8_t> unknown_id;     // held-out dataset id

    int64_t n_known() const { return static_cast<int64_t>(known_ids.size()); }

    // dataset id -> training id, kUnknownLabel, or kIgnoreLabel
    uint8_t to_training(uint8_t dataset_id) const { return remap_[dataset_id]; }
    uint8_t training_to_dataset(uint8_t training_id) const;
    std::string unknown_name() const;

    friend ClassScheme make_loco_scheme(const std::vector<std::string>&, const std::string&);
    friend ClassScheme make_closed_scheme(const std::vector<std::string>&);

private:
    std::array<uint8_t, 256> remap_{};
};

// Held-out class becomes UNKNOWN; the remaining classes get training ids
// 0..k-2 in dataset (palette) order.
ClassScheme make_loco_scheme(const std::vector<std::string>& classes, const std::string& unknown);
ClassScheme make_closed_scheme(const std::vector<std::string>& classes);

std::vector<uint8_t> remap_labels(const std::vector<uint8_t>& labels, const ClassScheme& scheme);

LabeledTile load_tile(const std::string& image_path, const std::string& labels_path,
                      const Palette& palette, const std::string& id = "");

// tiles/<id>/image.png + tiles/<id>/labels.png
void write_tile(const LabeledTile& tile, const std::string& data_root, const Palette& palette);
std::vector<std::string> list_tile_ids(const std::string& data_root);
LabeledTile load_tile_by_id(const std::string& data_root, const std::string& id,
                            const Palette& palette);

// Fixed test split of the Vaihingen patch numbering: {11, 15, 28, 30, 34}.
std::pair<std::vector<std::string>, std::vector<std::string>> split_vaihingen(
    std::vector<std::string> tile_ids);

// ceil(fraction * n) test tiles chosen by seeded shuffle.
std::pair<std::vector<std::string>, std::vector<std::string>> split_fraction(
    std::vector<std::string> tile_ids, double fraction, uint64_t seed);

// ceil(fraction * n) validation tiles; remainder stays in training.
std::pair<std::vector<std::string>, std::vector<std::string>> hold_out_validation(
    std::vector<std::string> train_ids, double fraction, uint64_t seed);

// Class-balanced center sampling: per known class min(quota, available)
// patches, centers whose ground truth maps to UNKNOWN or IGNORE never emitted.
std::vector<PatchSample> extract_training_patches(const std::vector<LabeledTile>& tiles,
                                                  const ClassScheme& scheme, int64_t quota,
                                                  uint64_t seed);

}  // namespace openpixel
