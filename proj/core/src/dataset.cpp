#include "openpixel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "openpixel/png_io.hpp"
#include "openpixel/predict.hpp"
#include "openpixel/rng.hpp"

namespace openpixel {

namespace fs = std::filesystem;

Palette Palette::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open palette '" + path + "'");
    Palette p;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        int r, g, b;
        char c1, c2, c3;
        std::string name;
        if (!(ls >> r >> c1 >> g >> c2 >> b >> c3) || c1 != ',' || c2 != ',' || c3 != ',' ||
            !std::getline(ls, name) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
            throw std::runtime_error("palette '" + path + "' line " + std::to_string(line_no) +
                                     ": expected 'R,G,B,class_name'");
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t\r") + 1);
        if (name.empty())
            throw std::runtime_error("palette '" + path + "' line " + std::to_string(line_no) +
                                     ": empty class name");
        p.entries.push_back({static_cast<uint8_t>(r), static_cast<uint8_t>(g),
                             static_cast<uint8_t>(b), name});
    }
    if (p.entries.empty()) throw std::runtime_error("palette '" + path + "' defines no classes");
    if (p.entries.size() > 200)
        throw std::runtime_error("palette '" + path + "' defines too many classes");
    for (size_t i = 0; i < p.entries.size(); ++i)
        for (size_t j = i + 1; j < p.entries.size(); ++j) {
            if (p.entries[i].name == p.entries[j].name)
                throw std::runtime_error("palette '" + path + "': duplicate class name '" +
                                         p.entries[i].name + "'");
            if (p.entries[i].r == p.entries[j].r && p.entries[i].g == p.entries[j].g &&
                p.entries[i].b == p.entries[j].b)
                throw std::runtime_error("palette '" + path + "': classes '" + p.entries[i].name +
                                         "' and '" + p.entries[j].name + "' share a color");
        }
    return p;
}

void Palette::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const auto& e : entries)
        os << int(e.r) << "," << int(e.g) << "," << int(e.b) << "," << e.name << "\n";
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

Palette Palette::isprs_vaihingen() {
    Palette p;
    p.entries = {{255, 255, 255, "street"},
                 {0, 0, 255, "building"},
                 {0, 255, 255, "grass"},
                 {0, 255, 0, "tree"},
                 {255, 255, 0, "car"}};
    return p;
}

std::vector<std::string> Palette::class_names() const {
    std::vector<std::string> names;
    names.reserve(entries.size());
    for (const auto& e : entries) names.push_back(e.name);
    return names;
}

int64_t Palette::index_of(const std::string& name) const {
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].name == name) return static_cast<int64_t>(i);
    return -1;
}

uint8_t ClassScheme::training_to_dataset(uint8_t training_id) const {
    if (training_id >= known_ids.size())
        throw std::invalid_argument("training id " + std::to_string(training_id) +
                                    " outside the known set of " +
                                    std::to_string(known_ids.size()));
    return known_ids[training_id];
}

std::string ClassScheme::unknown_name() const {
    return unknown_id ? class_names[*unknown_id] : std::string();
}

namespace {

void check_class_list(const std::vector<std::string>& classes) {
    if (classes.size() < 2)
        throw std::invalid_argument("class scheme needs at least 2 dataset classes");
    if (classes.size() > 200)
        throw std::invalid_argument("class scheme supports at most 200 dataset classes");
}

}  // namespace

ClassScheme make_loco_scheme(const std::vector<std::string>& classes,
                             const std::string& unknown) {
    check_class_list(classes);
    ClassScheme s;
    s.class_names = classes;
    s.remap_.fill(kIgnoreLabel);
    int64_t unknown_idx = -1;
    for (size_t i = 0; i < classes.size(); ++i)
        if (classes[i] == unknown) unknown_idx = static_cast<int64_t>(i);
    if (unknown_idx < 0)
        throw std::invalid_argument("unknown class '" + unknown +
                                    "' is not one of the dataset classes");
    s.unknown_id = static_cast<uint8_t>(unknown_idx);
    for (size_t i = 0; i < classes.size(); ++i) {
        if (static_cast<int64_t>(i) == unknown_idx) {
            s.remap_[i] = kUnknownLabel;
        } else {
            s.remap_[i] = static_cast<uint8_t>(s.known_ids.size());
            s.known_ids.push_back(static_cast<uint8_t>(i));
        }
    }
    return s;
}

ClassScheme make_closed_scheme(const std::vector<std::string>& classes) {
    check_class_list(classes);
    ClassScheme s;
    s.class_names = classes;
    s.remap_.fill(kIgnoreLabel);
    for (size_t i = 0; i < classes.size(); ++i) {
        s.remap_[i] = static_cast<uint8_t>(i);
        s.known_ids.push_back(static_cast<uint8_t>(i));
    }
    return s;
}

std::vector<uint8_t> remap_labels(const std::vector<uint8_t>& labels, const ClassScheme& scheme) {
    std::vector<uint8_t> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) out[i] = scheme.to_training(labels[i]);
    return out;
}

LabeledTile load_tile(const std::string& image_path, const std::string& labels_path,
                      const Palette& palette, const std::string& id) {
    LabeledTile tile;
    tile.id = id;
    tile.image = read_png(image_path);
    if (tile.image.c != 3)
        throw std::runtime_error("tile image '" + image_path + "' must have 3 channels, got " +
                                 std::to_string(tile.image.c));
    ImageU8 label_img = read_png(labels_path);
    if (label_img.h != tile.image.h || label_img.w != tile.image.w)
        throw std::runtime_error("labels '" + labels_path + "' are " +
                                 std::to_string(label_img.w) + "x" + std::to_string(label_img.h) +
                                 " but image is " + std::to_string(tile.image.w) + "x" +
                                 std::to_string(tile.image.h));

    // exact color -> class id; anything else is IGNORE
    std::map<uint32_t, uint8_t> color_to_id;
    for (size_t i = 0; i < palette.entries.size(); ++i) {
        const auto& e = palette.entries[i];
        color_to_id[(uint32_t(e.r) << 16) | (uint32_t(e.g) << 8) | e.b] =
            static_cast<uint8_t>(i);
    }
    tile.labels.resize(static_cast<size_t>(label_img.h * label_img.w));
    for (int64_t i = 0; i < label_img.h * label_img.w; ++i) {
        uint8_t r, g, b;
        if (label_img.c == 3) {
            r = label_img.data[static_cast<size_t>(i * 3)];
            g = label_img.data[static_cast<size_t>(i * 3 + 1)];
            b = label_img.data[static_cast<size_t>(i * 3 + 2)];
        } else {
            r = g = b = label_img.data[static_cast<size_t>(i)];
        }
        const auto it = color_to_id.find((uint32_t(r) << 16) | (uint32_t(g) << 8) | b);
        tile.labels[static_cast<size_t>(i)] = it == color_to_id.end() ? kIgnoreLabel : it->second;
    }
    return tile;
}

void write_tile(const LabeledTile& tile, const std::string& data_root, const Palette& palette) {
    if (tile.id.empty()) throw std::invalid_argument("write_tile: tile id must not be empty");
    if (static_cast<int64_t>(tile.labels.size()) != tile.image.h * tile.image.w)
        throw std::invalid_argument("write_tile: labels do not cover the image");
    const fs::path dir = fs::path(data_root) / "tiles" / tile.id;
    fs::create_directories(dir);
    write_png_rgb8(tile.image, (dir / "image.png").string());

    ImageU8 label_img(tile.image.h, tile.image.w, 3);
    for (int64_t i = 0; i < tile.image.h * tile.image.w; ++i) {
        const uint8_t id = tile.labels[static_cast<size_t>(i)];
        uint8_t r = 0, g = 0, b = 0;  // IGNORE and out-of-palette ids encode as black
        if (id < palette.entries.size()) {
            r = palette.entries[id].r;
            g = palette.entries[id].g;
            b = palette.entries[id].b;
        }
        label_img.data[static_cast<size_t>(i * 3)] = r;
        label_img.data[static_cast<size_t>(i * 3 + 1)] = g;
        label_img.data[static_cast<size_t>(i * 3 + 2)] = b;
    }
    write_png_rgb8(label_img, (dir / "labels.png").string());
}

std::vector<std::string> list_tile_ids(const std::string& data_root) {
    const fs::path tiles = fs::path(data_root) / "tiles";
    if (!fs::is_directory(tiles))
        throw std::runtime_error("data root '" + data_root + "' has no tiles/ directory");
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(tiles))
        if (entry.is_directory() && fs::exists(entry.path() / "image.png"))
            ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) throw std::runtime_error("data root '" + data_root + "' contains no tiles");
    return ids;
}

LabeledTile load_tile_by_id(const std::string& data_root, const std::string& id,
                            const Palette& palette) {
    const fs::path dir = fs::path(data_root) / "tiles" / id;
    return load_tile((dir / "image.png").string(), (dir / "labels.png").string(), palette, id);
}

namespace {

int64_t trailing_number(const std::string& id) {
    int64_t end = static_cast<int64_t>(id.size());
    while (end > 0 && !std::isdigit(static_cast<unsigned char>(id[end - 1]))) --end;
    int64_t begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(id[begin - 1]))) --begin;
    if (begin == end) return -1;
    return std::stoll(id.substr(static_cast<size_t>(begin), static_cast<size_t>(end - begin)));
}

}  // namespace

std::pair<std::vector<std::string>, std::vector<std::string>> split_vaihingen(
    std::vector<std::string> tile_ids) {
    std::sort(tile_ids.begin(), tile_ids.end());
    const std::vector<int64_t> test_numbers = {11, 15, 28, 30, 34};
    std::vector<std::string> train, test;
    for (const auto& id : tile_ids) {
        const int64_t n = trailing_number(id);
        if (n < 0)
            throw std::invalid_argument("tile id '" + id +
                                        "' does not carry a Vaihingen patch number");
        if (std::find(test_numbers.begin(), test_numbers.end(), n) != test_numbers.end())
            test.push_back(id);
        else
            train.push_back(id);
    }
    if (train.empty()) throw std::runtime_error("Vaihingen split left the training set empty");
    return {train, test};
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_fraction(
    std::vector<std::string> tile_ids, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("test fraction must be in (0, 1)");
    std::sort(tile_ids.begin(), tile_ids.end());
    const int64_t n = static_cast<int64_t>(tile_ids.size());
    const int64_t n_test = static_cast<int64_t>(
        std::ceil(fraction * static_cast<double>(n)));
    if (n_test <= 0 || n_test >= n)
        throw std::runtime_error("test fraction " + std::to_string(fraction) + " leaves " +
                                 std::to_string(n - n_test) + " train / " +
                                 std::to_string(n_test) + " test tiles");
    Rng rng(seed);
    rng.shuffle(tile_ids);
    std::vector<std::string> test(tile_ids.begin(), tile_ids.begin() + n_test);
    std::vector<std::string> train(tile_ids.begin() + n_test, tile_ids.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {train, test};
}

std::pair<std::vector<std::string>, std::vector<std::string>> hold_out_validation(
    std::vector<std::string> train_ids, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("validation fraction must be in (0, 1)");
    std::sort(train_ids.begin(), train_ids.end());
    const int64_t n = static_cast<int64_t>(train_ids.size());
    const int64_t n_val = static_cast<int64_t>(std::ceil(fraction * static_cast<double>(n)));
    if (n_val <= 0 || n_val >= n)
        throw std::runtime_error("validation fraction " + std::to_string(fraction) + " leaves " +
                                 std::to_string(n - n_val) + " train / " + std::to_string(n_val) +
                                 " validation tiles");
    Rng rng(seed);
    rng.shuffle(train_ids);
    std::vector<std::string> val(train_ids.begin(), train_ids.begin() + n_val);
    std::vector<std::string> rest(train_ids.begin() + n_val, train_ids.end());
    std::sort(val.begin(), val.end());
    std::sort(rest.begin(), rest.end());
    return {rest, val};
}

std::vector<PatchSample> extract_training_patches(const std::vector<LabeledTile>& tiles,
                                                  const ClassScheme& scheme, int64_t quota,
                                                  uint64_t seed) {
    if (quota < 1) throw std::invalid_argument("patch quota must be >= 1");
    if (tiles.empty()) throw std::invalid_argument("no tiles to extract patches from");

    struct Center {
        int32_t tile;
        int32_t y;
        int32_t x;
    };
    std::vector<std::vector<Center>> by_class(static_cast<size_t>(scheme.n_known()));
    for (size_t t = 0; t < tiles.size(); ++t) {
        const auto& tile = tiles[t];
        if (static_cast<int64_t>(tile.labels.size()) != tile.image.h * tile.image.w)
            throw std::invalid_argument("tile '" + tile.id + "' labels do not cover the image");
        for (int64_t i = 0; i < tile.image.h * tile.image.w; ++i) {
            const uint8_t training = scheme.to_training(tile.labels[static_cast<size_t>(i)]);
            if (training == kUnknownLabel || training == kIgnoreLabel) continue;
            by_class[training].push_back({static_cast<int32_t>(t),
                                          static_cast<int32_t>(i / tile.image.w),
                                          static_cast<int32_t>(i % tile.image.w)});
        }
    }

    Rng rng(seed);
    std::vector<PatchSample> out;
    for (int64_t c = 0; c < scheme.n_known(); ++c) {
        auto& pool = by_class[static_cast<size_t>(c)];
        if (pool.empty())
            throw std::runtime_error("known class '" +
                                     scheme.class_names[scheme.training_to_dataset(
                                         static_cast<uint8_t>(c))] +
                                     "' has no labeled pixels in the training tiles");
        Rng class_rng = rng.fork(static_cast<uint64_t>(c) + 1);
        const int64_t take = std::min<int64_t>(quota, static_cast<int64_t>(pool.size()));
        const auto picks = class_rng.sample_indices(static_cast<int64_t>(pool.size()), take);
        for (int64_t pick : picks) {
            const Center& ctr = pool[static_cast<size_t>(pick)];
            const auto& tile = tiles[static_cast<size_t>(ctr.tile)];
            PatchSample sample;
            sample.pixels = mirror_crop(tile.image, ctr.y, ctr.x);
            sample.label = static_cast<int>(c);
            sample.tile_id = tile.id;
            sample.row = ctr.y;
            sample.col = ctr.x;
            out.push_back(std::move(sample));
        }
    }
    return out;
}

}  // namespace openpixel
