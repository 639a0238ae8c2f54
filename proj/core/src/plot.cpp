#include "openpixel/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

namespace openpixel {

namespace {

struct Rgb {
    uint8_t r, g, b;
};

void put(ImageU8& img, int64_t y, int64_t x, Rgb c) {
    if (y < 0 || y >= img.h || x < 0 || x >= img.w) return;
    img.at(y, x, 0) = c.r;
    img.at(y, x, 1) = c.g;
    img.at(y, x, 2) = c.b;
}

void line(ImageU8& img, int64_t y0, int64_t x0, int64_t y1, int64_t x1, Rgb c) {
    const int64_t dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int64_t sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int64_t err = dx + dy;
    for (;;) {
        put(img, y0, x0, c);
        if (x0 == x1 && y0 == y1) break;
        const int64_t e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

// 5x7 bitmap glyphs for the handful of characters the plot needs.
const std::map<char, std::array<uint8_t, 7>>& glyphs() {
    static const std::map<char, std::array<uint8_t, 7>> g = {
        {'0', {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e}},
        {'1', {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e}},
        {'5', {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c}},
        {'a', {0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f}},
        {'e', {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e}},
        {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
        {'l', {0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e}},
        {'m', {0x00, 0x00, 0x1a, 0x15, 0x15, 0x15, 0x15}},
        {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
        {'o', {0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e}},
        {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d}},
        {'w', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0a}},
        {'t', {0x04, 0x04, 0x1f, 0x04, 0x04, 0x04, 0x03}},
    };
    return g;
}

void text(ImageU8& img, int64_t y, int64_t x, const std::string& s, Rgb c) {
    for (char ch : s) {
        const auto it = glyphs().find(ch);
        if (it != glyphs().end()) {
            for (int row = 0; row < 7; ++row)
                for (int col = 0; col < 5; ++col)
                    if (it->second[static_cast<size_t>(row)] & (1u << (4 - col)))
                        put(img, y + row, x + col, c);
        }
        x += 6;
    }
}

}  // namespace

ImageU8 render_sweep_plot(const SweepCurve& curve, int64_t width, int64_t height) {
    if (curve.points.empty()) throw std::invalid_argument("render_sweep_plot: empty curve");
    if (width < 160 || height < 120)
        throw std::invalid_argument("render_sweep_plot: canvas too small");

    ImageU8 img(height, width, 3);
    std::fill(img.data.begin(), img.data.end(), uint8_t(255));

    const int64_t ml = 48, mr = 16, mt = 28, mb = 36;
    const int64_t x0 = ml, x1 = width - mr, y0 = height - mb, y1 = mt;
    const Rgb axis{40, 40, 40}, grid_c{225, 225, 225};

    auto px = [&](double tau) {
        return x0 + static_cast<int64_t>(std::lround(tau * static_cast<double>(x1 - x0)));
    };
    auto py = [&](double acc) {
        return y0 - static_cast<int64_t>(std::lround(acc * static_cast<double>(y0 - y1)));
    };

    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        line(img, py(v), x0, py(v), x1, grid_c);
        line(img, y0, px(v), y1, px(v), grid_c);
    }
    line(img, y0, x0, y0, x1, axis);
    line(img, y0, x0, y1, x0, axis);
    for (const double v : {0.0, 0.5, 1.0}) {
        const std::string label = v == 0.0 ? "0" : (v == 1.0 ? "1" : "0.5");
        text(img, y0 + 6, px(v) - 5, label, axis);
        text(img, py(v) - 3, x0 - 26, label, axis);
    }
    text(img, y0 + 18, (x0 + x1) / 2 - 9, "tau", axis);

    struct Series {
        const char* label;
        Rgb color;
        std::optional<double> SweepPoint::* field;
    };
    const Series series[] = {
        {"all", {60, 60, 60}, &SweepPoint::acc_all},
        {"known", {31, 119, 180}, &SweepPoint::acc_known},
        {"unknown", {214, 39, 40}, &SweepPoint::acc_unknown},
        {"mean", {44, 160, 44}, &SweepPoint::acc_mean},
    };

    int64_t legend_x = x0 + 8;
    for (const auto& s : series) {
        bool have_prev = false;
        int64_t prev_x = 0, prev_y = 0;
        for (const auto& pt : curve.points) {
            const auto& val = pt.*(s.field);
            if (!val) {
                have_prev = false;
                continue;
            }
            const int64_t cx = px(std::clamp(pt.tau, 0.0, 1.0));
            const int64_t cy = py(std::clamp(*val, 0.0, 1.0));
            if (have_prev) line(img, prev_y, prev_x, cy, cx, s.color);
            put(img, cy - 1, cx, s.color);
            put(img, cy + 1, cx, s.color);
            put(img, cy, cx - 1, s.color);
            put(img, cy, cx + 1, s.color);
            prev_x = cx;
            prev_y = cy;
            have_prev = true;
        }
        line(img, mt / 2, legend_x, mt / 2, legend_x + 14, s.color);
        line(img, mt / 2 + 1, legend_x, mt / 2 + 1, legend_x + 14, s.color);
        text(img, mt / 2 - 3, legend_x + 18, s.label, axis);
        legend_x += 18 + 6 * static_cast<int64_t>(std::strlen(s.label)) + 14;
    }
    return img;
}

}  // namespace openpixel
