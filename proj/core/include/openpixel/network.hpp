#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "openpixel/image.hpp"
#include "openpixel/layers.hpp"
#include "openpixel/rng.hpp"
#include "openpixel/tensor.hpp"

namespace openpixel {

inline constexpr int64_t kPatchSize = 55;
inline constexpr int64_t kPatchChannels = 3;
inline constexpr int64_t kPatchHalf = 27;
inline constexpr int64_t kTrunkFeatures = 256;

// Context-window patch: 3x55x55 channel-first crop whose center pixel defines
// the label (a known-class training id).
struct PatchSample {
    std::vector<uint8_t> pixels;  // kPatchChannels * kPatchSize * kPatchSize
    int label = 0;
    std::string tile_id;
    int64_t row = 0;
    int64_t col = 0;
};

enum class Precision { f32, f64 };

inline const char* precision_name(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

inline Precision precision_from_name(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    throw std::invalid_argument("unknown precision '" + s + "' (expected f32 or f64)");
}

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int64_t batch_size = 64;
    int64_t epochs = 3;
    int64_t patches_per_class = 200;
    uint64_t seed = 1;
    Precision precision = Precision::f32;

    void validate() const {
        if (!(learning_rate > 0)) throw std::invalid_argument("train: learning rate must be positive");
        if (momentum < 0 || momentum >= 1) throw std::invalid_argument("train: momentum must be in [0,1)");
        if (batch_size <= 0) throw std::invalid_argument("train: batch size must be positive");
        if (epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
        if (patches_per_class <= 0) throw std::invalid_argument("train: patches per class must be positive");
    }
};

struct EpochStats {
    double mean_loss = 0.0;
    double accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
};

// The seven-layer parameter set: three conv blocks (each followed by ReLU and
// max pooling at forward time) and four FC layers ending at n_classes logits.
template <typename T>
struct NetworkParams {
    int64_t n_classes = 0;
    Tensor<T> conv1_w, conv1_b;  // 64 x 3 x 4 x 4, stride 2; pool 2x2 stride 2
    Tensor<T> conv2_w, conv2_b;  // 128 x 64 x 4 x 4, stride 1; pool 2x2 stride 2
    Tensor<T> conv3_w, conv3_b;  // 256 x 128 x 2 x 2, stride 2; pool 2x2 stride 1
    Tensor<T> fc1_w, fc1_b;      // 256 -> 1024
    Tensor<T> fc2_w, fc2_b;      // 1024 -> 1024
    Tensor<T> fc3_w, fc3_b;      // 1024 -> 1024
    Tensor<T> out_w, out_b;      // 1024 -> n_classes

    std::vector<std::pair<const char*, Tensor<T>*>> entries() {
        return {{"conv1_w", &conv1_w}, {"conv1_b", &conv1_b}, {"conv2_w", &conv2_w},
                {"conv2_b", &conv2_b}, {"conv3_w", &conv3_w}, {"conv3_b", &conv3_b},
                {"fc1_w", &fc1_w},     {"fc1_b", &fc1_b},     {"fc2_w", &fc2_w},
                {"fc2_b", &fc2_b},     {"fc3_w", &fc3_w},     {"fc3_b", &fc3_b},
                {"out_w", &out_w},     {"out_b", &out_b}};
    }
    std::vector<std::pair<const char*, const Tensor<T>*>> entries() const {
        auto* self = const_cast<NetworkParams*>(this);
        std::vector<std::pair<const char*, const Tensor<T>*>> out;
        for (auto& [name, t] : self->entries()) out.emplace_back(name, t);
        return out;
    }
};

inline std::vector<std::pair<const char*, Shape>> expected_param_shapes(int64_t n_classes) {
    return {{"conv1_w", {64, 3, 4, 4}},    {"conv1_b", {64}},
            {"conv2_w", {128, 64, 4, 4}},  {"conv2_b", {128}},
            {"conv3_w", {256, 128, 2, 2}}, {"conv3_b", {256}},
            {"fc1_w", {256, 1024}},        {"fc1_b", {1024}},
            {"fc2_w", {1024, 1024}},       {"fc2_b", {1024}},
            {"fc3_w", {1024, 1024}},       {"fc3_b", {1024}},
            {"out_w", {1024, n_classes}},  {"out_b", {n_classes}}};
}

template <typename T>
void validate_params(const NetworkParams<T>& params) {
    if (params.n_classes < 2)
        throw std::invalid_argument("network: n_classes must be >= 2, got " +
                                    std::to_string(params.n_classes));
    auto expected = expected_param_shapes(params.n_classes);
    auto actual = params.entries();
    for (size_t i = 0; i < expected.size(); ++i) {
        if (actual[i].second->shape() != expected[i].second)
            throw std::invalid_argument(std::string("network: ") + expected[i].first +
                                        " has shape " + shape_str(actual[i].second->shape()) +
                                        ", expected " + shape_str(expected[i].second));
        actual[i].second->check_finite(expected[i].first);
    }
}

// Fan-in-scaled Gaussian weights (std = sqrt(2/fan_in)), zero biases,
// bit-reproducible per seed.
template <typename T>
NetworkParams<T> init_network(int64_t n_classes, uint64_t seed) {
    if (n_classes < 2)
        throw std::invalid_argument("init_network: n_classes must be >= 2, got " +
                                    std::to_string(n_classes));
    NetworkParams<T> p;
    p.n_classes = n_classes;
    Rng rng(seed);
    for (auto& [name, shape] : expected_param_shapes(n_classes)) {
        Tensor<T> t(shape);
        const bool is_weight = shape.size() > 1;
        if (is_weight) {
            int64_t fan_in = 1;
            if (shape.size() == 4) fan_in = shape[1] * shape[2] * shape[3];
            else fan_in = shape[0];
            const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
            for (int64_t i = 0; i < t.size(); ++i)
                t[i] = static_cast<T>(rng.normal() * std_dev);
        }
        auto entries = p.entries();
        for (auto& [ename, tensor] : entries)
            if (std::string(ename) == name) *tensor = std::move(t);
    }
    return p;
}

template <typename T>
struct ForwardCache {
    Tensor<T> input;           // N x 3 x 55 x 55
    Tensor<T> c1, c2, c3;      // conv outputs (pre-ReLU)
    Tensor<T> r1, r2, r3;      // ReLU outputs (pool inputs)
    PoolResult<T> p1, p2, p3;  // pool outputs + argmax
    Tensor<T> flat;            // N x 256
    Tensor<T> h1, a1, h2, a2, h3, a3;  // FC pre/post activations
    Tensor<T> logits;
};

template <typename T>
void check_patch_batch(const Tensor<T>& batch) {
    if (batch.ndim() != 4 || batch.dim(1) != kPatchChannels || batch.dim(2) != kPatchSize ||
        batch.dim(3) != kPatchSize)
        throw std::invalid_argument("forward: patch batch must be Nx3x55x55, got " +
                                    shape_str(batch.shape()) + " (no silent resize)");
}

template <typename T>
ForwardCache<T> forward_cached(const NetworkParams<T>& params, Tensor<T> batch) {
    check_patch_batch(batch);
    const int64_t n = batch.dim(0);
    ForwardCache<T> c;
    c.input = std::move(batch);
    c.c1 = conv2d(c.input, params.conv1_w, params.conv1_b, 2);
    c.r1 = relu(c.c1);
    c.p1 = maxpool2d(c.r1, 2, 2);
    c.c2 = conv2d(c.p1.output, params.conv2_w, params.conv2_b, 1);
    c.r2 = relu(c.c2);
    c.p2 = maxpool2d(c.r2, 2, 2);
    c.c3 = conv2d(c.p2.output, params.conv3_w, params.conv3_b, 2);
    c.r3 = relu(c.c3);
    c.p3 = maxpool2d(c.r3, 2, 1);
    c.flat = c.p3.output.reshaped({n, kTrunkFeatures});
    c.h1 = fully_connected(c.flat, params.fc1_w, params.fc1_b);
    c.a1 = relu(c.h1);
    c.h2 = fully_connected(c.a1, params.fc2_w, params.fc2_b);
    c.a2 = relu(c.h2);
    c.h3 = fully_connected(c.a2, params.fc3_w, params.fc3_b);
    c.a3 = relu(c.h3);
    c.logits = fully_connected(c.a3, params.out_w, params.out_b);
    c.logits.check_finite("forward logits");
    return c;
}

template <typename T>
Tensor<T> forward(const NetworkParams<T>& params, Tensor<T> batch) {
    return forward_cached(params, std::move(batch)).logits;
}

template <typename T>
struct NetworkGrads {
    Tensor<T> conv1_w, conv1_b, conv2_w, conv2_b, conv3_w, conv3_b;
    Tensor<T> fc1_w, fc1_b, fc2_w, fc2_b, fc3_w, fc3_b, out_w, out_b;

    std::vector<Tensor<T>*> tensors() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &conv3_w, &conv3_b, &fc1_w,
                &fc1_b,   &fc2_w,   &fc2_b,   &fc3_w,   &fc3_b,   &out_w,   &out_b};
    }
};

template <typename T>
NetworkGrads<T> backward(const NetworkParams<T>& params, const ForwardCache<T>& c,
                         const Tensor<T>& d_logits) {
    NetworkGrads<T> g;
    auto fc_out = fully_connected_backward(c.a3, params.out_w, d_logits);
    g.out_w = std::move(fc_out.d_weights);
    g.out_b = std::move(fc_out.d_bias);
    auto fc3 = fully_connected_backward(c.a2, params.fc3_w, relu_backward(c.h3, fc_out.d_input));
    g.fc3_w = std::move(fc3.d_weights);
    g.fc3_b = std::move(fc3.d_bias);
    auto fc2 = fully_connected_backward(c.a1, params.fc2_w, relu_backward(c.h2, fc3.d_input));
    g.fc2_w = std::move(fc2.d_weights);
    g.fc2_b = std::move(fc2.d_bias);
    auto fc1 = fully_connected_backward(c.flat, params.fc1_w, relu_backward(c.h1, fc2.d_input));
    g.fc1_w = std::move(fc1.d_weights);
    g.fc1_b = std::move(fc1.d_bias);

    Tensor<T> d_p3 = fc1.d_input.reshaped(c.p3.output.shape());
    Tensor<T> d_r3 = maxpool2d_backward(c.r3.shape(), c.p3.argmax, d_p3);
    auto conv3 = conv2d_backward(c.p2.output, params.conv3_w, 2, relu_backward(c.c3, d_r3));
    g.conv3_w = std::move(conv3.d_weights);
    g.conv3_b = std::move(conv3.d_bias);
    Tensor<T> d_r2 = maxpool2d_backward(c.r2.shape(), c.p2.argmax, conv3.d_input);
    auto conv2 = conv2d_backward(c.p1.output, params.conv2_w, 1, relu_backward(c.c2, d_r2));
    g.conv2_w = std::move(conv2.d_weights);
    g.conv2_b = std::move(conv2.d_bias);
    Tensor<T> d_r1 = maxpool2d_backward(c.r1.shape(), c.p1.argmax, conv2.d_input);
    auto conv1 = conv2d_backward(c.input, params.conv1_w, 2, relu_backward(c.c1, d_r1));
    g.conv1_w = std::move(conv1.d_weights);
    g.conv1_b = std::move(conv1.d_bias);
    return g;
}

template <typename T>
Tensor<T> patches_to_batch(const std::vector<PatchSample>& patches, const std::vector<int64_t>& idx,
                           int64_t begin, int64_t end) {
    Tensor<T> batch({end - begin, kPatchChannels, kPatchSize, kPatchSize});
    const int64_t per = kPatchChannels * kPatchSize * kPatchSize;
    for (int64_t i = begin; i < end; ++i) {
        const auto& p = patches[static_cast<size_t>(idx[static_cast<size_t>(i)])];
        if (static_cast<int64_t>(p.pixels.size()) != per)
            throw std::invalid_argument("train: patch pixel count " +
                                        std::to_string(p.pixels.size()) + ", expected " +
                                        std::to_string(per));
        T* dst = batch.data() + (i - begin) * per;
        for (int64_t j = 0; j < per; ++j) dst[j] = normalize_u8<T>(p.pixels[static_cast<size_t>(j)]);
    }
    return batch;
}

// Minibatch SGD over the extracted patch pool. Single-threaded by contract;
// the seed fully determines visit order and therefore the final parameters.
template <typename T>
TrainReport train(NetworkParams<T>& params, const std::vector<PatchSample>& patches,
                  const TrainConfig& cfg) {
    cfg.validate();
    validate_params(params);
    for (const auto& p : patches)
        if (p.label < 0 || p.label >= params.n_classes)
            throw std::invalid_argument(
                "train: patch at tile '" + p.tile_id + "' (" + std::to_string(p.row) + "," +
                std::to_string(p.col) + ") carries label " + std::to_string(p.label) +
                " outside the known classes (protocol violation)");
    if (cfg.epochs > 0 && patches.empty())
        throw std::invalid_argument("train: no training patches");

    std::vector<Tensor<T>> velocity;
    for (auto& [name, t] : params.entries()) velocity.emplace_back(t->shape());

    std::vector<int64_t> order(patches.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);

    TrainReport report;
    Rng epoch_rng(cfg.seed);
    for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng = epoch_rng.fork(static_cast<uint64_t>(epoch) + 1);
        rng.shuffle(order);

        double loss_sum = 0.0;
        int64_t correct = 0;
        const int64_t total = static_cast<int64_t>(order.size());
        for (int64_t begin = 0; begin < total; begin += cfg.batch_size) {
            const int64_t end = std::min(begin + cfg.batch_size, total);
            Tensor<T> batch = patches_to_batch<T>(patches, order, begin, end);
            std::vector<int> labels;
            labels.reserve(static_cast<size_t>(end - begin));
            for (int64_t i = begin; i < end; ++i)
                labels.push_back(patches[static_cast<size_t>(order[static_cast<size_t>(i)])].label);

            ForwardCache<T> cache = forward_cached(params, std::move(batch));
            SoftmaxXent<T> xent = softmax_cross_entropy(cache.logits, labels);
            loss_sum += static_cast<double>(xent.loss) * static_cast<double>(end - begin);
            for (int64_t i = 0; i < end - begin; ++i) {
                const T* row = xent.probs.data() + i * params.n_classes;
                int64_t best = 0;
                for (int64_t j = 1; j < params.n_classes; ++j)
                    if (row[j] > row[best]) best = j;
                if (best == labels[static_cast<size_t>(i)]) ++correct;
            }

            NetworkGrads<T> grads = backward(params, cache, xent.d_logits);
            auto entries = params.entries();
            auto grad_tensors = grads.tensors();
            for (size_t i = 0; i < entries.size(); ++i)
                sgd_update(*entries[i].second, *grad_tensors[i], velocity[i],
                           static_cast<T>(cfg.learning_rate), static_cast<T>(cfg.momentum));
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.mean_loss = loss_sum / static_cast<double>(total);
        stats.accuracy = static_cast<double>(correct) / static_cast<double>(total);
        stats.seconds = std::chrono::duration<double>(t1 - t0).count();
        report.epochs.push_back(stats);
    }
    return report;
}

}  // namespace openpixel
