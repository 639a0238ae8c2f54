#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "openpixel/image.hpp"
#include "openpixel/kernels.hpp"
#include "openpixel/maps.hpp"
#include "openpixel/network.hpp"

namespace openpixel {

struct PredictOptions {
    int64_t fc_block = 8192;  // pixels per FC batch
    int threads = 0;          // 0 = hardware concurrency
};

namespace detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index) on [0, chunks) across workers. Work items are
// independent and write disjoint output, so scheduling cannot affect values.
template <typename Fn>
void parallel_chunks(int64_t chunks, int threads, Fn&& fn) {
    if (threads <= 1 || chunks <= 1) {
        for (int64_t i = 0; i < chunks; ++i) fn(i);
        return;
    }
    const int n = static_cast<int>(std::min<int64_t>(threads, chunks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&, t]() {
            for (int64_t i = t; i < chunks; i += n) fn(i);
        });
    for (auto& th : pool) th.join();
}

// Channel-planar view of one feature map level of the dense pass.
template <typename T>
struct PlanarMap {
    int64_t c = 0, h = 0, w = 0;
    std::vector<T> data;
    PlanarMap() = default;
    PlanarMap(int64_t channels, int64_t height, int64_t width)
        : c(channels), h(height), w(width),
          data(static_cast<size_t>(channels * height * width)) {}
    T* plane(int64_t ch) { return data.data() + ch * h * w; }
    const T* plane(int64_t ch) const { return data.data() + ch * h * w; }
};

// Valid convolution with dilated taps evaluated at every position. Window
// element (kh, kw) reads input at (y + dilation*kh, x + dilation*kw), which is
// exactly where a per-patch convolution at downsampled grid spacing `dilation`
// would read; accumulation order (c, kh, kw) and the shared axpy_n kernel keep
// each output bit-identical to the patch route.
template <typename T>
PlanarMap<T> dilated_conv(const PlanarMap<T>& in, const Tensor<T>& weights, const Tensor<T>& bias,
                          int64_t dilation, int threads) {
    const int64_t c_out = weights.dim(0), c_in = weights.dim(1), k = weights.dim(2);
    const int64_t reach = dilation * (k - 1);
    PlanarMap<T> out(c_out, in.h - reach, in.w - reach);
    parallel_chunks(c_out, threads, [&](int64_t o) {
        const T* w_base = weights.data() + o * c_in * k * k;
        T* out_plane = out.plane(o);
        for (int64_t y = 0; y < out.h; ++y) {
            T* out_row = out_plane + y * out.w;
            std::fill(out_row, out_row + out.w, bias[o]);
            const T* wp = w_base;
            for (int64_t c = 0; c < c_in; ++c) {
                const T* in_plane = in.plane(c);
                for (int64_t kh = 0; kh < k; ++kh)
                    for (int64_t kw = 0; kw < k; ++kw, ++wp)
                        axpy_n(out_row, in_plane + (y + dilation * kh) * in.w + dilation * kw,
                               *wp, out.w);
            }
        }
    });
    return out;
}

template <typename T>
PlanarMap<T> dilated_maxpool(const PlanarMap<T>& in, int64_t k, int64_t dilation, int threads) {
    const int64_t reach = dilation * (k - 1);
    PlanarMap<T> out(in.c, in.h - reach, in.w - reach);
    parallel_chunks(in.c, threads, [&](int64_t c) {
        const T* in_plane = in.plane(c);
        T* out_plane = out.plane(c);
        for (int64_t y = 0; y < out.h; ++y) {
            T* out_row = out_plane + y * out.w;
            const T* first = in_plane + y * in.w;
            std::copy(first, first + out.w, out_row);
            for (int64_t kh = 0; kh < k; ++kh)
                for (int64_t kw = 0; kw < k; ++kw) {
                    if (kh == 0 && kw == 0) continue;
                    const T* src = in_plane + (y + dilation * kh) * in.w + dilation * kw;
                    for (int64_t x = 0; x < out.w; ++x) out_row[x] = std::max(out_row[x], src[x]);
                }
        }
    });
    return out;
}

template <typename T>
void relu_inplace(PlanarMap<T>& m) {
    for (auto& v : m.data) v = v > T(0) ? v : T(0);
}

// Mirror-padded (symmetric, edge-repeating) normalized copy of the tile with
// kPatchHalf pixels of context on every side.
template <typename T>
PlanarMap<T> pad_image(const ImageU8& image) {
    if (image.c != kPatchChannels)
        throw std::invalid_argument("predict: image must have 3 channels, got " +
                                    std::to_string(image.c));
    const int64_t ph = image.h + 2 * kPatchHalf;
    const int64_t pw = image.w + 2 * kPatchHalf;
    PlanarMap<T> padded(kPatchChannels, ph, pw);
    for (int64_t c = 0; c < kPatchChannels; ++c) {
        T* plane = padded.plane(c);
        for (int64_t y = 0; y < ph; ++y) {
            const int64_t sy = fold_index(y - kPatchHalf, image.h);
            for (int64_t x = 0; x < pw; ++x) {
                const int64_t sx = fold_index(x - kPatchHalf, image.w);
                plane[y * pw + x] = normalize_u8<T>(image.at(sy, sx, c));
            }
        }
    }
    return padded;
}

}  // namespace detail

// Per-pixel class distributions for a whole tile. Semantically identical to
// running forward() on the mirror-padded 55x55 patch centered at every pixel;
// the conv/pool trunk is shared across overlapping windows (dilated ops over
// the padded tile) and the FC head runs on gathered per-pixel feature vectors.
template <typename T>
ProbabilityMap predict_image(const NetworkParams<T>& params, const ImageU8& image,
                             const PredictOptions& opts = {}) {
    validate_params(params);
    if (image.h < 1 || image.w < 1)
        throw std::invalid_argument("predict: tile must be at least 1x1");
    const int threads = detail::resolve_threads(opts.threads);
    const int64_t h = image.h, w = image.w;

    using detail::PlanarMap;
    PlanarMap<T> padded = detail::pad_image<T>(image);
    PlanarMap<T> m = detail::dilated_conv(padded, params.conv1_w, params.conv1_b, 1, threads);
    padded = PlanarMap<T>();
    detail::relu_inplace(m);
    m = detail::dilated_maxpool(m, 2, 2, threads);
    m = detail::dilated_conv(m, params.conv2_w, params.conv2_b, 4, threads);
    detail::relu_inplace(m);
    m = detail::dilated_maxpool(m, 2, 4, threads);
    m = detail::dilated_conv(m, params.conv3_w, params.conv3_b, 8, threads);
    detail::relu_inplace(m);
    PlanarMap<T> trunk = detail::dilated_maxpool(m, 2, 16, threads);
    m = PlanarMap<T>();

    ProbabilityMap result(h, w, params.n_classes);
    const int64_t pixels = h * w;
    const int64_t block = std::max<int64_t>(1, opts.fc_block);
    const int64_t blocks = (pixels + block - 1) / block;
    detail::parallel_chunks(blocks, threads, [&](int64_t bi) {
        const int64_t begin = bi * block;
        const int64_t end = std::min(begin + block, pixels);
        Tensor<T> flat({end - begin, kTrunkFeatures});
        for (int64_t i = begin; i < end; ++i) {
            const int64_t y = i / w, x = i % w;
            T* dst = flat.data() + (i - begin) * kTrunkFeatures;
            for (int64_t f = 0; f < kTrunkFeatures; ++f)
                dst[f] = trunk.plane(f)[y * trunk.w + x];
        }
        Tensor<T> a1 = relu(fully_connected(flat, params.fc1_w, params.fc1_b));
        Tensor<T> a2 = relu(fully_connected(a1, params.fc2_w, params.fc2_b));
        Tensor<T> a3 = relu(fully_connected(a2, params.fc3_w, params.fc3_b));
        Tensor<T> probs = softmax(fully_connected(a3, params.out_w, params.out_b));
        for (int64_t i = begin; i < end; ++i) {
            const T* src = probs.data() + (i - begin) * params.n_classes;
            float* dst = result.p.data() + i * params.n_classes;
            for (int64_t c = 0; c < params.n_classes; ++c) dst[c] = static_cast<float>(src[c]);
        }
    });
    return result;
}

// The 55x55 mirror-padded context window centered at (row, col), channel-first.
inline std::vector<uint8_t> mirror_crop(const ImageU8& image, int64_t row, int64_t col) {
    if (image.c != kPatchChannels)
        throw std::invalid_argument("mirror_crop: image must have 3 channels");
    std::vector<uint8_t> out(static_cast<size_t>(kPatchChannels * kPatchSize * kPatchSize));
    size_t i = 0;
    for (int64_t c = 0; c < kPatchChannels; ++c)
        for (int64_t dy = 0; dy < kPatchSize; ++dy) {
            const int64_t sy = fold_index(row + dy - kPatchHalf, image.h);
            for (int64_t dx = 0; dx < kPatchSize; ++dx) {
                const int64_t sx = fold_index(col + dx - kPatchHalf, image.w);
                out[i++] = image.at(sy, sx, c);
            }
        }
    return out;
}

}  // namespace openpixel
