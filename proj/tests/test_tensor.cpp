#include <doctest.h>

#include <cmath>

#include "openpixel/gradcheck.hpp"
#include "openpixel/layers.hpp"
#include "openpixel/rng.hpp"
#include "openpixel/tensor.hpp"

using namespace openpixel;

namespace {

TensorD random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    TensorD t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Independent quadruple-loop reference for valid convolution.
TensorD naive_conv2d(const TensorD& in, const TensorD& w, const TensorD& b, int64_t stride) {
    const int64_t n = in.dim(0), ci = in.dim(1), h = in.dim(2), wd = in.dim(3);
    const int64_t co = w.dim(0), k = w.dim(2);
    const int64_t ho = (h - k) / stride + 1, wo = (wd - k) / stride + 1;
    TensorD out({n, co, ho, wo});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t o = 0; o < co; ++o)
            for (int64_t y = 0; y < ho; ++y)
                for (int64_t x = 0; x < wo; ++x) {
                    double acc = b[o];
                    for (int64_t c = 0; c < ci; ++c)
                        for (int64_t kh = 0; kh < k; ++kh)
                            for (int64_t kw = 0; kw < k; ++kw)
                                acc += in.at(i, c, y * stride + kh, x * stride + kw) *
                                       w.at(o, c, kh, kw);
                    out.at(i, o, y, x) = acc;
                }
    return out;
}

TensorD naive_maxpool(const TensorD& in, int64_t k, int64_t stride) {
    const int64_t n = in.dim(0), c = in.dim(1), h = in.dim(2), wd = in.dim(3);
    const int64_t ho = (h - k) / stride + 1, wo = (wd - k) / stride + 1;
    TensorD out({n, c, ho, wo});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < ho; ++y)
                for (int64_t x = 0; x < wo; ++x) {
                    double best = in.at(i, ch, y * stride, x * stride);
                    for (int64_t kh = 0; kh < k; ++kh)
                        for (int64_t kw = 0; kw < k; ++kw)
                            best = std::max(best,
                                            in.at(i, ch, y * stride + kh, x * stride + kw));
                    out.at(i, ch, y, x) = best;
                }
    return out;
}

}  // namespace

TEST_CASE("tensor basics") {
    TensorD t({2, 3});
    CHECK(t.size() == 6);
    t.at(1, 2) = 5.0;
    CHECK(t[5] == 5.0);
    CHECK_THROWS_AS(t.at(2, 0), std::out_of_range);
    CHECK_THROWS_AS(TensorD({0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(TensorD({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    TensorD nan_t({1});
    nan_t[0] = std::nan("");
    CHECK_THROWS_AS(nan_t.check_finite("test"), std::runtime_error);
}

TEST_CASE("conv2d output extent") {
    Rng rng(7);
    TensorD in = random_tensor({1, 3, 55, 55}, rng);
    TensorD w = random_tensor({64, 3, 4, 4}, rng, -0.1, 0.1);
    TensorD b({64});
    TensorD out = conv2d(in, w, b, 2);
    CHECK(out.shape() == Shape{1, 64, 26, 26});
}

TEST_CASE("conv2d hand-computed window sums") {
    TensorD in({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    TensorD w = TensorD::full({1, 1, 2, 2}, 1.0);
    TensorD b({1});
    TensorD out = conv2d(in, w, b, 1);
    CHECK(out.shape() == Shape{1, 1, 2, 2});
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(12.0));
    CHECK(out.at(0, 0, 0, 1) == doctest::Approx(16.0));
    CHECK(out.at(0, 0, 1, 0) == doctest::Approx(24.0));
    CHECK(out.at(0, 0, 1, 1) == doctest::Approx(28.0));
}

TEST_CASE("conv2d 1x1 identity kernel") {
    Rng rng(3);
    TensorD in = random_tensor({2, 1, 5, 6}, rng);
    TensorD w({1, 1, 1, 1}, {1.0});
    TensorD b({1});
    TensorD out = conv2d(in, w, b, 1);
    for (int64_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("conv2d argument errors") {
    Rng rng(1);
    TensorD in = random_tensor({1, 3, 8, 8}, rng);
    TensorD w = random_tensor({4, 2, 3, 3}, rng);  // channel mismatch
    TensorD b({4});
    CHECK_THROWS_AS(conv2d(in, w, b, 1), std::invalid_argument);
    TensorD w2 = random_tensor({4, 3, 3, 3}, rng);
    CHECK_THROWS_AS(conv2d(in, w2, b, 0), std::invalid_argument);
    CHECK_THROWS_AS(conv2d(in, w2, b, -2), std::invalid_argument);
    TensorD small = random_tensor({1, 3, 2, 2}, rng);
    CHECK_THROWS_AS(conv2d(small, w2, b, 1), std::invalid_argument);
    TensorD bad_bias({5});
    CHECK_THROWS_AS(conv2d(in, w2, bad_bias, 1), std::invalid_argument);
}

TEST_CASE("conv2d matches naive reference on random inputs") {
    Rng rng(11);
    for (int rep = 0; rep < 12; ++rep) {
        const int64_t n = 1 + static_cast<int64_t>(rng.next_below(2));
        const int64_t c = 1 + static_cast<int64_t>(rng.next_below(8));
        const int64_t o = 1 + static_cast<int64_t>(rng.next_below(6));
        const int64_t k = 1 + static_cast<int64_t>(rng.next_below(4));
        const int64_t h = k + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(17 - k)));
        const int64_t wd = k + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(17 - k)));
        const int64_t s = 1 + static_cast<int64_t>(rng.next_below(3));
        TensorD in = random_tensor({n, c, h, wd}, rng);
        TensorD w = random_tensor({o, c, k, k}, rng);
        TensorD b = random_tensor({o}, rng);
        TensorD got = conv2d(in, w, b, s);
        TensorD want = naive_conv2d(in, w, b, s);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - want[i]) <= 1e-12);
    }
}

TEST_CASE("conv2d deterministic") {
    Rng rng(5);
    TensorD in = random_tensor({2, 3, 9, 9}, rng);
    TensorD w = random_tensor({4, 3, 3, 3}, rng);
    TensorD b = random_tensor({4}, rng);
    CHECK(conv2d(in, w, b, 2) == conv2d(in, w, b, 2));
}

TEST_CASE("conv2d_backward zero upstream") {
    Rng rng(9);
    TensorD in = random_tensor({1, 2, 6, 6}, rng);
    TensorD w = random_tensor({3, 2, 3, 3}, rng);
    TensorD zero({1, 3, 2, 2});
    auto g = conv2d_backward(in, w, 2, zero);
    for (int64_t i = 0; i < g.d_input.size(); ++i) CHECK(g.d_input[i] == 0.0);
    for (int64_t i = 0; i < g.d_weights.size(); ++i) CHECK(g.d_weights[i] == 0.0);
    for (int64_t i = 0; i < g.d_bias.size(); ++i) CHECK(g.d_bias[i] == 0.0);
}

TEST_CASE("conv2d_backward 1x1 kernel weight gradient is input-upstream correlation") {
    Rng rng(13);
    TensorD in = random_tensor({1, 1, 4, 4}, rng);
    TensorD w = random_tensor({1, 1, 1, 1}, rng);
    TensorD up = random_tensor({1, 1, 4, 4}, rng);
    auto g = conv2d_backward(in, w, 1, up);
    double want = 0.0;
    for (int64_t i = 0; i < in.size(); ++i) want += in[i] * up[i];
    CHECK(g.d_weights[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("conv2d_backward upstream shape checked") {
    Rng rng(2);
    TensorD in = random_tensor({1, 2, 6, 6}, rng);
    TensorD w = random_tensor({3, 2, 3, 3}, rng);
    TensorD bad({1, 3, 4, 4});
    CHECK_THROWS_AS(conv2d_backward(in, w, 2, bad), std::invalid_argument);
}

TEST_CASE("conv2d_backward agrees with finite differences") {
    Rng rng(17);
    TensorD in = random_tensor({1, 2, 5, 5}, rng);
    TensorD w = random_tensor({3, 2, 2, 2}, rng);
    TensorD b = random_tensor({3}, rng);
    TensorD proj = random_tensor({1, 3, 4, 4}, rng);

    auto loss_of_input = [&](const TensorD& x) {
        TensorD out = conv2d(x, w, b, 1);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    auto g = conv2d_backward(in, w, 1, proj);
    CHECK(finite_difference_check<double>(loss_of_input, in, g.d_input, 1e-3) < 1e-4);

    auto loss_of_weights = [&](const TensorD& wt) {
        TensorD out = conv2d(in, wt, b, 1);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(loss_of_weights, w, g.d_weights, 1e-3) < 1e-4);

    auto loss_of_bias = [&](const TensorD& bt) {
        TensorD out = conv2d(in, w, bt, 1);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(loss_of_bias, b, g.d_bias, 1e-3) < 1e-4);
}

TEST_CASE("maxpool2d window maxima") {
    TensorD in({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    auto res = maxpool2d(in, 2, 1);
    CHECK(res.output.shape() == Shape{1, 1, 2, 2});
    CHECK(res.output.at(0, 0, 0, 0) == 5.0);
    CHECK(res.output.at(0, 0, 0, 1) == 6.0);
    CHECK(res.output.at(0, 0, 1, 0) == 8.0);
    CHECK(res.output.at(0, 0, 1, 1) == 9.0);
}

TEST_CASE("maxpool2d constant input and first-position tie break") {
    TensorD in = TensorD::full({1, 1, 4, 4}, 3.5);
    auto res = maxpool2d(in, 2, 2);
    for (int64_t i = 0; i < res.output.size(); ++i) CHECK(res.output[i] == 3.5);
    // all window values equal: gradient must route to the first window position
    CHECK(res.argmax[0] == 0 * 4 + 0);
    CHECK(res.argmax[1] == 0 * 4 + 2);
    CHECK(res.argmax[2] == 2 * 4 + 0);
    CHECK(res.argmax[3] == 2 * 4 + 2);
}

TEST_CASE("maxpool2d final Table-1 pooling row: 256x2x2 -> 256x1x1") {
    Rng rng(23);
    TensorD in = random_tensor({1, 256, 2, 2}, rng);
    auto res = maxpool2d(in, 2, 1);
    CHECK(res.output.shape() == Shape{1, 256, 1, 1});
}

TEST_CASE("maxpool2d invalid window or stride") {
    TensorD in = TensorD::full({1, 1, 4, 4}, 1.0);
    CHECK_THROWS_AS(maxpool2d(in, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(maxpool2d(in, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(maxpool2d(in, 5, 1), std::invalid_argument);
}

TEST_CASE("maxpool2d matches naive reference on random inputs") {
    Rng rng(29);
    for (int rep = 0; rep < 12; ++rep) {
        const int64_t n = 1 + static_cast<int64_t>(rng.next_below(2));
        const int64_t c = 1 + static_cast<int64_t>(rng.next_below(8));
        const int64_t k = 1 + static_cast<int64_t>(rng.next_below(3));
        const int64_t h = k + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(17 - k)));
        const int64_t wd = k + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(17 - k)));
        const int64_t s = 1 + static_cast<int64_t>(rng.next_below(3));
        TensorD in = random_tensor({n, c, h, wd}, rng);
        TensorD got = maxpool2d(in, k, s).output;
        TensorD want = naive_maxpool(in, k, s);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("maxpool2d backward routes gradient to max positions only") {
    TensorD in({1, 1, 2, 2}, {1, 4, 2, 3});
    auto res = maxpool2d(in, 2, 1);
    TensorD up({1, 1, 1, 1}, {2.5});
    TensorD din = maxpool2d_backward(in.shape(), res.argmax, up);
    CHECK(din.at(0, 0, 0, 0) == 0.0);
    CHECK(din.at(0, 0, 0, 1) == 2.5);
    CHECK(din.at(0, 0, 1, 0) == 0.0);
    CHECK(din.at(0, 0, 1, 1) == 0.0);
}

TEST_CASE("maxpool2d backward agrees with finite differences away from ties") {
    Rng rng(31);
    // spread values so the +-1e-3 probe cannot flip any window max
    TensorD in({1, 2, 6, 6});
    std::vector<int64_t> order(static_cast<size_t>(in.size()));
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int64_t>(i);
    rng.shuffle(order);
    for (int64_t i = 0; i < in.size(); ++i) in[i] = 0.01 * static_cast<double>(order[i]);

    TensorD proj = random_tensor({1, 2, 3, 3}, rng);
    auto res = maxpool2d(in, 2, 2);
    auto loss = [&](const TensorD& x) {
        TensorD out = maxpool2d(x, 2, 2).output;
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    TensorD din = maxpool2d_backward(in.shape(), res.argmax, proj);
    CHECK(finite_difference_check<double>(loss, in, din, 1e-3) < 1e-4);
}

TEST_CASE("relu forward") {
    TensorD in({3}, {-1.0, 0.0, 2.0});
    TensorD out = relu(in);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 2.0);

    Rng rng(37);
    TensorD pos = random_tensor({2, 5}, rng, 0.1, 2.0);
    TensorD id = relu(pos);
    for (int64_t i = 0; i < pos.size(); ++i) CHECK(id[i] == pos[i]);
}

TEST_CASE("relu backward masks and matches finite differences away from zero") {
    TensorD in({4}, {-2.0, -0.5, 0.0, 3.0});
    TensorD up({4}, {1.0, 1.0, 1.0, 1.0});
    TensorD din = relu_backward(in, up);
    CHECK(din[0] == 0.0);
    CHECK(din[1] == 0.0);
    CHECK(din[2] == 0.0);  // gradient at exactly 0 defined as 0
    CHECK(din[3] == 1.0);

    Rng rng(41);
    TensorD x({20});
    for (int64_t i = 0; i < x.size(); ++i) {
        double v = rng.uniform(0.05, 1.0);
        x[i] = rng.next_below(2) ? v : -v;  // keep |x| > eps
    }
    TensorD proj = random_tensor({20}, rng);
    auto loss = [&](const TensorD& t) {
        TensorD out = relu(t);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    TensorD analytic = relu_backward(x, proj);
    CHECK(finite_difference_check<double>(loss, x, analytic, 1e-3) < 1e-4);
}

TEST_CASE("fully_connected identity") {
    Rng rng(43);
    TensorD in = random_tensor({3, 4}, rng);
    TensorD w({4, 4});
    for (int64_t i = 0; i < 4; ++i) w.at(i, i) = 1.0;
    TensorD b({4});
    TensorD out = fully_connected(in, w, b);
    for (int64_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("fully_connected Table-1 FC chain type-checks") {
    Rng rng(47);
    const int64_t n_classes = 5;
    TensorD x = random_tensor({2, 256}, rng, -0.01, 0.01);
    TensorD w1 = random_tensor({256, 1024}, rng, -0.01, 0.01);
    TensorD w2 = random_tensor({1024, 1024}, rng, -0.01, 0.01);
    TensorD w3 = random_tensor({1024, 1024}, rng, -0.01, 0.01);
    TensorD w4 = random_tensor({1024, n_classes}, rng, -0.01, 0.01);
    TensorD b1({1024}), b2({1024}), b3({1024}), b4({n_classes});
    TensorD h = fully_connected(fully_connected(fully_connected(fully_connected(x, w1, b1), w2, b2), w3, b3), w4, b4);
    CHECK(h.shape() == Shape{2, n_classes});
}

TEST_CASE("fully_connected shape errors") {
    Rng rng(53);
    TensorD in = random_tensor({2, 3}, rng);
    TensorD w = random_tensor({4, 5}, rng);
    TensorD b({5});
    CHECK_THROWS_AS(fully_connected(in, w, b), std::invalid_argument);
    TensorD w2 = random_tensor({3, 5}, rng);
    TensorD bad_b({4});
    CHECK_THROWS_AS(fully_connected(in, w2, bad_b), std::invalid_argument);
}

TEST_CASE("fully_connected backward agrees with finite differences") {
    Rng rng(59);
    TensorD in = random_tensor({3, 4}, rng);
    TensorD w = random_tensor({4, 6}, rng);
    TensorD b = random_tensor({6}, rng);
    TensorD proj = random_tensor({3, 6}, rng);
    auto g = fully_connected_backward(in, w, proj);

    auto loss_in = [&](const TensorD& x) {
        TensorD out = fully_connected(x, w, b);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(loss_in, in, g.d_input, 1e-3) < 1e-4);

    auto loss_w = [&](const TensorD& wt) {
        TensorD out = fully_connected(in, wt, b);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(loss_w, w, g.d_weights, 1e-3) < 1e-4);

    auto loss_b = [&](const TensorD& bt) {
        TensorD out = fully_connected(in, w, bt);
        double acc = 0.0;
        for (int64_t i = 0; i < out.size(); ++i) acc += out[i] * proj[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(loss_b, b, g.d_bias, 1e-3) < 1e-4);
}

TEST_CASE("softmax_cross_entropy uniform logits") {
    TensorD logits({2, 4});
    auto res = softmax_cross_entropy(logits, {1, 3});
    for (int64_t i = 0; i < res.probs.size(); ++i)
        CHECK(res.probs[i] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("softmax_cross_entropy extreme logit stays stable") {
    TensorD logits({1, 4});
    logits.at(0, 2) = 1000.0;
    auto res = softmax_cross_entropy(logits, {2});
    CHECK(std::isfinite(res.loss));
    CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.probs.at(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("softmax rows sum to one, loss non-negative") {
    Rng rng(61);
    TensorD logits = random_tensor({8, 5}, rng, -10.0, 10.0);
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) labels.push_back(static_cast<int>(rng.next_below(5)));
    auto res = softmax_cross_entropy(logits, labels);
    CHECK(res.loss >= 0.0);
    for (int64_t r = 0; r < 8; ++r) {
        double sum = 0.0;
        for (int64_t c = 0; c < 5; ++c) sum += res.probs.at(r, c);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("softmax_cross_entropy label range checked") {
    TensorD logits({1, 3});
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {3}), std::invalid_argument);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {-1}), std::invalid_argument);
    CHECK_THROWS_AS(softmax_cross_entropy(logits, {0, 1}), std::invalid_argument);
}

TEST_CASE("softmax_cross_entropy gradient agrees with finite differences") {
    Rng rng(67);
    TensorD logits = random_tensor({4, 6}, rng, -2.0, 2.0);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) labels.push_back(static_cast<int>(rng.next_below(6)));
    auto res = softmax_cross_entropy(logits, labels);
    auto loss = [&](const TensorD& x) { return softmax_cross_entropy(x, labels).loss; };
    CHECK(finite_difference_check<double>(loss, logits, res.d_logits, 1e-3) < 1e-4);
}

TEST_CASE("sgd_update momentum zero") {
    TensorD w({2}, {1.0, 2.0});
    TensorD g({2}, {0.5, -1.0});
    TensorD v({2});
    sgd_update(w, g, v, 0.1, 0.0);
    CHECK(w[0] == doctest::Approx(0.95));
    CHECK(w[1] == doctest::Approx(2.1));
}

TEST_CASE("sgd_update zero gradient leaves params unchanged") {
    TensorD w({3}, {1.0, -2.0, 3.0});
    TensorD g({3});
    TensorD v({3});
    sgd_update(w, g, v, 0.5, 0.0);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == -2.0);
    CHECK(w[2] == 3.0);
}

TEST_CASE("sgd_update two momentum steps match hand-unrolled recurrence") {
    TensorD w({1}, {1.0});
    TensorD g1({1}, {0.3});
    TensorD g2({1}, {-0.2});
    TensorD v({1});
    const double lr = 0.1, m = 0.9;
    sgd_update(w, g1, v, lr, m);
    sgd_update(w, g2, v, lr, m);
    // v1 = g1; w1 = w0 - lr*v1; v2 = m*v1 + g2; w2 = w1 - lr*v2
    const double v1 = 0.3, w1 = 1.0 - lr * v1;
    const double v2 = m * v1 + (-0.2), w2 = w1 - lr * v2;
    CHECK(v[0] == doctest::Approx(v2).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(w2).epsilon(1e-15));
}

TEST_CASE("sgd_update validates arguments") {
    TensorD w({2}), g({2}), v({2});
    TensorD bad({3});
    CHECK_THROWS_AS(sgd_update(w, bad, v, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sgd_update(w, g, v, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sgd_update(w, g, v, 0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sgd_update(w, g, v, 0.1, -0.1), std::invalid_argument);
}

TEST_CASE("finite_difference_check on analytic cases") {
    TensorD x({4}, {0.5, -1.0, 2.0, 0.1});
    auto f_sum = [](const TensorD& t) {
        double acc = 0.0;
        for (int64_t i = 0; i < t.size(); ++i) acc += t[i];
        return acc;
    };
    CHECK(finite_difference_check<double>(f_sum, x, TensorD::full({4}, 1.0), 1e-3) < 1e-10);

    TensorD p({2}, {1.0, 2.0});
    auto f_sq = [](const TensorD& t) {
        double acc = 0.0;
        for (int64_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
        return acc;
    };
    TensorD grad({2}, {2.0, 4.0});
    CHECK(finite_difference_check<double>(f_sq, p, grad, 1e-3) < 1e-9);

    TensorD wrong({2}, {2.0, 5.0});
    CHECK(finite_difference_check<double>(f_sq, p, wrong, 1e-3) > 0.1);
}
