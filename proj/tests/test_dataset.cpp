#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "openpixel/dataset.hpp"
#include "openpixel/png_io.hpp"
#include "openpixel/predict.hpp"
#include "openpixel/synthetic.hpp"

using namespace openpixel;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("openpixel_ds_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// The 33 Vaihingen patch numbers.
const std::vector<int> kVaihingenAreas = {1,  2,  3,  4,  5,  6,  7,  8,  10, 11, 12,
                                          13, 14, 15, 16, 17, 20, 21, 22, 23, 24, 26,
                                          27, 28, 29, 30, 31, 32, 33, 34, 35, 37, 38};

}  // namespace

TEST_CASE("palette save/load round trip and validation") {
    TempDir dir;
    Palette p = Palette::isprs_vaihingen();
    p.save(dir.file("palette.txt"));
    Palette q = Palette::load(dir.file("palette.txt"));
    REQUIRE(q.entries.size() == 5);
    CHECK(q.entries[4].name == "car");
    CHECK(q.entries[4].r == 255);
    CHECK(q.entries[4].g == 255);
    CHECK(q.entries[4].b == 0);
    CHECK(q.index_of("grass") == 2);
    CHECK(q.index_of("missing") == -1);

    std::ofstream(dir.file("bad.txt")) << "1,2\nnot a palette\n";
    CHECK_THROWS_AS(Palette::load(dir.file("bad.txt")), std::runtime_error);
    std::ofstream(dir.file("dup.txt")) << "1,2,3,a\n1,2,3,b\n";
    CHECK_THROWS_AS(Palette::load(dir.file("dup.txt")), std::runtime_error);
}

TEST_CASE("png round trip rgb and gray") {
    TempDir dir;
    ImageU8 img(5, 7, 3);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<uint8_t>(i * 13);
    write_png_rgb8(img, dir.file("x.png"));
    ImageU8 back = read_png(dir.file("x.png"));
    CHECK(back.h == 5);
    CHECK(back.w == 7);
    CHECK(back.c == 3);
    CHECK(back.data == img.data);

    ImageU8 gray(4, 3, 1);
    for (size_t i = 0; i < gray.data.size(); ++i) gray.data[i] = static_cast<uint8_t>(200 + i);
    write_png_gray8(gray, dir.file("g.png"));
    ImageU8 gback = read_png(dir.file("g.png"));
    CHECK(gback.c == 1);
    CHECK(gback.data == gray.data);

    CHECK_THROWS_AS(read_png(dir.file("nope.png")), std::runtime_error);
    std::ofstream(dir.file("trash.png")) << "not png";
    CHECK_THROWS_AS(read_png(dir.file("trash.png")), std::runtime_error);
}

TEST_CASE("load_tile decodes palette colors exactly") {
    TempDir dir;
    Palette palette = Palette::isprs_vaihingen();
    ImageU8 img(2, 2, 3);
    img.data = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120};
    ImageU8 lbl(2, 2, 3);
    // car, street, grass, stray color
    lbl.data = {255, 255, 0, 255, 255, 255, 0, 255, 255, 1, 2, 3};
    write_png_rgb8(img, dir.file("image.png"));
    write_png_rgb8(lbl, dir.file("labels.png"));

    LabeledTile tile = load_tile(dir.file("image.png"), dir.file("labels.png"), palette, "t");
    CHECK(tile.labels[0] == 4);  // car
    CHECK(tile.labels[1] == 0);  // street
    CHECK(tile.labels[2] == 2);  // grass
    CHECK(tile.labels[3] == kIgnoreLabel);
    CHECK(tile.image.data == img.data);
}

TEST_CASE("load_tile uniform label map and size mismatch") {
    TempDir dir;
    Palette palette = Palette::isprs_vaihingen();
    ImageU8 img(3, 3, 3);
    ImageU8 lbl(3, 3, 3);
    for (int64_t i = 0; i < 9; ++i) {
        lbl.data[static_cast<size_t>(i * 3)] = 0;
        lbl.data[static_cast<size_t>(i * 3 + 1)] = 255;
        lbl.data[static_cast<size_t>(i * 3 + 2)] = 0;  // tree everywhere
    }
    write_png_rgb8(img, dir.file("image.png"));
    write_png_rgb8(lbl, dir.file("labels.png"));
    LabeledTile tile = load_tile(dir.file("image.png"), dir.file("labels.png"), palette);
    for (uint8_t v : tile.labels) CHECK(v == 3);

    ImageU8 small(2, 3, 3);
    write_png_rgb8(small, dir.file("small.png"));
    CHECK_THROWS_AS(load_tile(dir.file("image.png"), dir.file("small.png"), palette),
                    std::runtime_error);
}

TEST_CASE("make_loco_scheme assigns contiguous ids in palette order") {
    const auto classes = Palette::isprs_vaihingen().class_names();
    ClassScheme s = make_loco_scheme(classes, "car");
    CHECK(s.n_known() == 4);
    CHECK(s.to_training(0) == 0);  // street
    CHECK(s.to_training(1) == 1);  // building
    CHECK(s.to_training(2) == 2);  // grass
    CHECK(s.to_training(3) == 3);  // tree
    CHECK(s.to_training(4) == kUnknownLabel);
    CHECK(s.unknown_name() == "car");

    ClassScheme mid = make_loco_scheme(classes, "building");
    CHECK(mid.to_training(0) == 0);
    CHECK(mid.to_training(1) == kUnknownLabel);
    CHECK(mid.to_training(2) == 1);
    CHECK(mid.to_training(3) == 2);
    CHECK(mid.to_training(4) == 3);

    CHECK_THROWS_AS(make_loco_scheme(classes, "water"), std::invalid_argument);
}

TEST_CASE("all five leave-one-out schemes exist and invert cleanly") {
    const auto classes = Palette::isprs_vaihingen().class_names();
    int count = 0;
    for (const auto& unknown : classes) {
        ClassScheme s = make_loco_scheme(classes, unknown);
        ++count;
        CHECK(s.n_known() == 4);
        for (uint8_t tid = 0; tid < s.n_known(); ++tid) {
            const uint8_t dataset_id = s.training_to_dataset(tid);
            CHECK(s.to_training(dataset_id) == tid);  // remap then inverse is identity
            CHECK(classes[dataset_id] != unknown);
        }
    }
    CHECK(count == 5);
}

TEST_CASE("closed scheme keeps every class known") {
    const auto classes = Palette::isprs_vaihingen().class_names();
    ClassScheme s = make_closed_scheme(classes);
    CHECK(s.n_known() == 5);
    CHECK(s.unknown_name().empty());
    for (uint8_t i = 0; i < 5; ++i) CHECK(s.to_training(i) == i);
}

TEST_CASE("remapped labels stay within training ids plus sentinels") {
    const auto classes = Palette::isprs_vaihingen().class_names();
    ClassScheme s = make_loco_scheme(classes, "grass");
    std::vector<uint8_t> labels = {0, 1, 2, 3, 4, kIgnoreLabel, 0, 2};
    auto remapped = remap_labels(labels, s);
    for (uint8_t v : remapped) {
        const bool ok = v < 4 || v == kUnknownLabel || v == kIgnoreLabel;
        CHECK(ok);
    }
    CHECK(remapped[2] == kUnknownLabel);
    CHECK(remapped[5] == kIgnoreLabel);
}

TEST_CASE("split_vaihingen separates the documented test patches") {
    std::vector<std::string> ids;
    for (int n : kVaihingenAreas) ids.push_back("area" + std::to_string(n));
    auto [train, test] = split_vaihingen(ids);
    CHECK(train.size() == 28);
    CHECK(test.size() == 5);
    const std::set<std::string> test_set(test.begin(), test.end());
    for (int n : {11, 15, 28, 30, 34})
        CHECK(test_set.count("area" + std::to_string(n)) == 1);
    CHECK(std::find(train.begin(), train.end(), "area11") == train.end());

    CHECK_THROWS_AS(split_vaihingen({"tile_a", "tile_b"}), std::invalid_argument);
}

TEST_CASE("split_fraction honors the ceiling rule and determinism") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("synth0" + std::to_string(i));
    auto [train, test] = split_fraction(ids, 0.2, 7);
    CHECK(test.size() == 2);
    CHECK(train.size() == 8);

    auto [train2, test2] = split_fraction(ids, 0.2, 7);
    CHECK(train == train2);
    CHECK(test == test2);

    std::set<std::string> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 10);

    CHECK_THROWS_AS(split_fraction(ids, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_fraction(ids, 0.99, 1), std::runtime_error);
}

TEST_CASE("hold_out_validation ceiling, disjointness, determinism") {
    std::vector<std::string> ids;
    for (int i = 0; i < 28; ++i) ids.push_back("area" + std::to_string(i + 100));
    auto [train, val] = hold_out_validation(ids, 0.1, 3);
    CHECK(val.size() == 3);  // ceil(2.8)
    CHECK(train.size() == 25);

    std::set<std::string> overlap;
    std::set<std::string> train_set(train.begin(), train.end());
    for (const auto& v : val) CHECK(train_set.count(v) == 0);

    auto [train2, val2] = hold_out_validation(ids, 0.1, 3);
    CHECK(val == val2);
    auto [train3, val3] = hold_out_validation(ids, 0.1, 4);
    CHECK((val != val3 || train != train3));  // different seed, different draw (near-certain)
}

TEST_CASE("extract_training_patches balances classes and respects sentinels") {
    SynthConfig cfg;
    cfg.tiles = 2;
    cfg.height = 64;
    cfg.width = 64;
    cfg.classes = 3;
    cfg.cells = 9;
    cfg.noise = 5.0;
    cfg.seed = 11;
    auto tiles = generate_synthetic(cfg);
    const auto classes = synth_palette(3).class_names();
    ClassScheme scheme = make_loco_scheme(classes, "class1");

    auto patches = extract_training_patches(tiles, scheme, 40, 5);
    CHECK(patches.size() == 80);  // 2 known classes x quota
    int per_class[2] = {0, 0};
    for (const auto& p : patches) {
        REQUIRE(p.label >= 0);
        REQUIRE(p.label < 2);
        ++per_class[p.label];
        // center label must be the class the scheme maps to this training id
        const auto& tile = *std::find_if(tiles.begin(), tiles.end(),
                                         [&](const LabeledTile& t) { return t.id == p.tile_id; });
        const uint8_t dataset_label =
            tile.labels[static_cast<size_t>(p.row * tile.image.w + p.col)];
        CHECK(scheme.to_training(dataset_label) == p.label);
        CHECK(dataset_label != 1);  // never the held-out class
    }
    CHECK(per_class[0] == 40);
    CHECK(per_class[1] == 40);
}

TEST_CASE("extracted patch equals an independently computed mirror crop") {
    SynthConfig cfg;
    cfg.tiles = 1;
    cfg.height = 40;
    cfg.width = 52;
    cfg.classes = 2;
    cfg.cells = 4;
    cfg.seed = 9;
    auto tiles = generate_synthetic(cfg);
    ClassScheme scheme = make_closed_scheme(synth_palette(2).class_names());
    auto patches = extract_training_patches(tiles, scheme, 5, 3);
    REQUIRE(!patches.empty());
    const auto& img = tiles[0].image;
    for (const auto& p : patches) {
        size_t i = 0;
        for (int64_t c = 0; c < 3; ++c)
            for (int64_t dy = -27; dy <= 27; ++dy)
                for (int64_t dx = -27; dx <= 27; ++dx) {
                    // reference fold: reflect with edge repeat until in range
                    int64_t y = p.row + dy, x = p.col + dx;
                    while (y < 0 || y >= img.h) y = y < 0 ? -1 - y : 2 * img.h - 1 - y;
                    while (x < 0 || x >= img.w) x = x < 0 ? -1 - x : 2 * img.w - 1 - x;
                    CHECK(p.pixels[i++] == img.at(y, x, c));
                }
    }
}

TEST_CASE("extraction fails loudly when a known class has no pixels") {
    SynthConfig cfg;
    cfg.tiles = 1;
    cfg.height = 16;
    cfg.width = 16;
    cfg.classes = 2;
    cfg.cells = 2;
    cfg.seed = 4;
    auto tiles = generate_synthetic(cfg);
    // overwrite every pixel with class 0: class 1 has nothing to sample
    std::fill(tiles[0].labels.begin(), tiles[0].labels.end(), uint8_t(0));
    ClassScheme scheme = make_closed_scheme(synth_palette(2).class_names());
    CHECK_THROWS_WITH_AS(extract_training_patches(tiles, scheme, 10, 1),
                         doctest::Contains("class1"), std::runtime_error);
}

TEST_CASE("tile whose pixels all map to the unknown class yields a protocol error") {
    SynthConfig cfg;
    cfg.tiles = 1;
    cfg.height = 16;
    cfg.width = 16;
    cfg.classes = 2;
    cfg.cells = 2;
    cfg.seed = 4;
    auto tiles = generate_synthetic(cfg);
    // every pixel belongs to the held-out class: no known center can be sampled
    std::fill(tiles[0].labels.begin(), tiles[0].labels.end(), uint8_t(0));
    ClassScheme scheme = make_loco_scheme(synth_palette(2).class_names(), "class0");
    CHECK_THROWS_AS(extract_training_patches(tiles, scheme, 10, 1), std::runtime_error);
}

TEST_CASE("synthetic generation is deterministic and labels match regions") {
    SynthConfig cfg;
    cfg.tiles = 2;
    cfg.height = 48;
    cfg.width = 48;
    cfg.classes = 4;
    cfg.cells = 12;
    cfg.noise = 8.0;
    cfg.seed = 21;
    auto a = generate_synthetic(cfg);
    auto b = generate_synthetic(cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].image.data == b[i].image.data);
        CHECK(a[i].labels == b[i].labels);
    }
    SynthConfig other = cfg;
    other.seed = 22;
    auto c = generate_synthetic(other);
    CHECK(a[0].image.data != c[0].image.data);
}

TEST_CASE("zero-noise synthetic pixels equal the class texture exactly") {
    SynthConfig cfg;
    cfg.tiles = 1;
    cfg.height = 32;
    cfg.width = 32;
    cfg.classes = 2;
    cfg.cells = 4;
    cfg.noise = 0.0;
    cfg.seed = 2;
    auto tiles = generate_synthetic(cfg);
    const auto& tile = tiles[0];
    for (int64_t y = 0; y < 32; ++y)
        for (int64_t x = 0; x < 32; ++x) {
            const uint8_t cls = tile.labels[static_cast<size_t>(y * 32 + x)];
            const auto tex = synth_texture(cls, 2, y, x);
            for (int64_t ch = 0; ch < 3; ++ch) CHECK(tile.image.at(y, x, ch) == tex[ch]);
        }
}

TEST_CASE("per-class pixel share is spread across classes") {
    SynthConfig cfg;  // defaults: 5 classes, 24 cells, 256x256
    cfg.tiles = 2;
    cfg.seed = 1;
    auto tiles = generate_synthetic(cfg);
    std::vector<int64_t> counts(5, 0);
    int64_t total = 0;
    for (const auto& tile : tiles)
        for (uint8_t v : tile.labels) {
            ++counts[v];
            ++total;
        }
    for (int64_t c = 0; c < 5; ++c) {
        const double share = static_cast<double>(counts[static_cast<size_t>(c)]) /
                             static_cast<double>(total);
        CHECK(share > 0.05);
        CHECK(share < 0.5);
    }
}

TEST_CASE("synthetic dataset writes the documented layout and round-trips labels") {
    TempDir dir;
    SynthConfig cfg;
    cfg.tiles = 2;
    cfg.height = 24;
    cfg.width = 24;
    cfg.classes = 3;
    cfg.cells = 6;
    cfg.seed = 8;
    write_synthetic_dataset(cfg, dir.path.string());

    CHECK(std::filesystem::exists(dir.path / "palette.txt"));
    auto ids = list_tile_ids(dir.path.string());
    REQUIRE(ids.size() == 2);
    CHECK(ids[0] == "synth00");

    Palette palette = Palette::load((dir.path / "palette.txt").string());
    auto generated = generate_synthetic(cfg);
    for (size_t i = 0; i < ids.size(); ++i) {
        LabeledTile tile = load_tile_by_id(dir.path.string(), ids[i], palette);
        CHECK(tile.labels == generated[i].labels);  // exact label round trip
        CHECK(tile.image.data == generated[i].image.data);
    }
}
