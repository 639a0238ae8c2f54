#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "openpixel/kernels.hpp"
#include "openpixel/tensor.hpp"

namespace openpixel {

inline int64_t conv_out_extent(int64_t in, int64_t k, int64_t stride, const char* what) {
    if (stride <= 0)
        throw std::invalid_argument(std::string(what) + ": stride must be positive, got " +
                                    std::to_string(stride));
    if (k <= 0)
        throw std::invalid_argument(std::string(what) + ": window must be positive, got " +
                                    std::to_string(k));
    if (in < k)
        throw std::invalid_argument(std::string(what) + ": input extent " + std::to_string(in) +
                                    " smaller than window " + std::to_string(k));
    return (in - k) / stride + 1;
}

namespace detail {

// col(k, p) = input(c, y*stride+kh, x*stride+kw) with k = (c,kh,kw) row-major
// and p = y*wout+x. Keeping k in (c,kh,kw) order makes the GEMM accumulate in
// exactly the same order as a naive quadruple loop.
template <typename T>
void im2col(const T* in, int64_t c_in, int64_t h, int64_t w, int64_t k, int64_t stride,
            int64_t hout, int64_t wout, T* col) {
    const int64_t p = hout * wout;
    int64_t row = 0;
    for (int64_t c = 0; c < c_in; ++c) {
        const T* plane = in + c * h * w;
        for (int64_t kh = 0; kh < k; ++kh) {
            for (int64_t kw = 0; kw < k; ++kw, ++row) {
                T* dst = col + row * p;
                for (int64_t y = 0; y < hout; ++y) {
                    const T* src = plane + (y * stride + kh) * w + kw;
                    for (int64_t x = 0; x < wout; ++x) dst[y * wout + x] = src[x * stride];
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, int64_t c_in, int64_t h, int64_t w, int64_t k, int64_t stride,
                int64_t hout, int64_t wout, T* in_grad) {
    const int64_t p = hout * wout;
    int64_t row = 0;
    for (int64_t c = 0; c < c_in; ++c) {
        T* plane = in_grad + c * h * w;
        for (int64_t kh = 0; kh < k; ++kh) {
            for (int64_t kw = 0; kw < k; ++kw, ++row) {
                const T* src = col + row * p;
                for (int64_t y = 0; y < hout; ++y) {
                    T* dst = plane + (y * stride + kh) * w + kw;
                    for (int64_t x = 0; x < wout; ++x) dst[x * stride] += src[y * wout + x];
                }
            }
        }
    }
}

template <typename T>
void check_conv_args(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>* bias,
                     int64_t stride) {
    if (input.ndim() != 4)
        throw std::invalid_argument("conv2d: input must be NCHW, got " + shape_str(input.shape()));
    if (weights.ndim() != 4)
        throw std::invalid_argument("conv2d: weights must be OxCxKxK, got " +
                                    shape_str(weights.shape()));
    if (weights.dim(2) != weights.dim(3))
        throw std::invalid_argument("conv2d: kernel must be square, got " +
                                    shape_str(weights.shape()));
    if (input.dim(1) != weights.dim(1))
        throw std::invalid_argument("conv2d: input channels " + std::to_string(input.dim(1)) +
                                    " do not match weight channels " +
                                    std::to_string(weights.dim(1)));
    if (bias && (bias->ndim() != 1 || bias->dim(0) != weights.dim(0)))
        throw std::invalid_argument("conv2d: bias shape " + shape_str(bias->shape()) +
                                    " does not match " + std::to_string(weights.dim(0)) +
                                    " output channels");
    conv_out_extent(input.dim(2), weights.dim(2), stride, "conv2d");
    conv_out_extent(input.dim(3), weights.dim(2), stride, "conv2d");
}

}  // namespace detail

// Valid (unpadded) 2-D convolution, NCHW.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                 int64_t stride) {
    detail::check_conv_args(input, weights, &bias, stride);
    const int64_t n = input.dim(0), c_in = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t c_out = weights.dim(0), k = weights.dim(2);
    const int64_t hout = (h - k) / stride + 1, wout = (w - k) / stride + 1;
    const int64_t p = hout * wout, ckk = c_in * k * k;

    Tensor<T> out({n, c_out, hout, wout});
    std::vector<T> col(static_cast<size_t>(ckk * p));
    for (int64_t i = 0; i < n; ++i) {
        detail::im2col(input.data() + i * c_in * h * w, c_in, h, w, k, stride, hout, wout,
                       col.data());
        T* out_n = out.data() + i * c_out * p;
        for (int64_t o = 0; o < c_out; ++o) {
            T* out_row = out_n + o * p;
            std::fill(out_row, out_row + p, bias[o]);
            const T* w_row = weights.data() + o * ckk;
            for (int64_t r = 0; r < ckk; ++r)
                axpy_n(out_row, col.data() + r * p, w_row[r], p);
        }
    }
    out.check_finite("conv2d");
    return out;
}

template <typename T>
struct Conv2dGrads {
    Tensor<T> d_input;
    Tensor<T> d_weights;
    Tensor<T> d_bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, int64_t stride,
                               const Tensor<T>& upstream) {
    detail::check_conv_args(input, weights, static_cast<const Tensor<T>*>(nullptr), stride);
    const int64_t n = input.dim(0), c_in = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t c_out = weights.dim(0), k = weights.dim(2);
    const int64_t hout = (h - k) / stride + 1, wout = (w - k) / stride + 1;
    const Shape expect{n, c_out, hout, wout};
    if (upstream.shape() != expect)
        throw std::invalid_argument("conv2d_backward: upstream shape " +
                                    shape_str(upstream.shape()) + " does not match output " +
                                    shape_str(expect));

    const int64_t p = hout * wout, ckk = c_in * k * k;
    Conv2dGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(weights.shape()),
                     Tensor<T>({c_out})};
    std::vector<T> col(static_cast<size_t>(ckk * p));
    std::vector<T> dcol(static_cast<size_t>(ckk * p));
    for (int64_t i = 0; i < n; ++i) {
        detail::im2col(input.data() + i * c_in * h * w, c_in, h, w, k, stride, hout, wout,
                       col.data());
        const T* up_n = upstream.data() + i * c_out * p;
        for (int64_t o = 0; o < c_out; ++o) {
            const T* up_row = up_n + o * p;
            T acc = T(0);
            for (int64_t q = 0; q < p; ++q) acc += up_row[q];
            g.d_bias[o] += acc;
            T* dw_row = g.d_weights.data() + o * ckk;
            for (int64_t r = 0; r < ckk; ++r) dw_row[r] += dot_n(up_row, col.data() + r * p, p);
        }
        std::fill(dcol.begin(), dcol.end(), T(0));
        for (int64_t r = 0; r < ckk; ++r) {
            T* dcol_row = dcol.data() + r * p;
            for (int64_t o = 0; o < c_out; ++o)
                axpy_n(dcol_row, up_n + o * p, weights.data()[o * ckk + r], p);
        }
        detail::col2im_add(dcol.data(), c_in, h, w, k, stride, hout, wout,
                           g.d_input.data() + i * c_in * h * w);
    }
    return g;
}

template <typename T>
struct PoolResult {
    Tensor<T> output;
    // Flat (y*W + x) position of the max within each (n, c) input plane;
    // ties resolved to the first position in row-major window scan.
    std::vector<int64_t> argmax;
};

template <typename T>
PoolResult<T> maxpool2d(const Tensor<T>& input, int64_t k, int64_t stride) {
    if (input.ndim() != 4)
        throw std::invalid_argument("maxpool2d: input must be NCHW, got " +
                                    shape_str(input.shape()));
    const int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const int64_t hout = conv_out_extent(h, k, stride, "maxpool2d");
    const int64_t wout = conv_out_extent(w, k, stride, "maxpool2d");

    PoolResult<T> res{Tensor<T>({n, c, hout, wout}), {}};
    res.argmax.resize(static_cast<size_t>(n * c * hout * wout));
    int64_t out_i = 0;
    for (int64_t plane = 0; plane < n * c; ++plane) {
        const T* src = input.data() + plane * h * w;
        for (int64_t y = 0; y < hout; ++y) {
            for (int64_t x = 0; x < wout; ++x, ++out_i) {
                int64_t best = (y * stride) * w + (x * stride);
                T best_v = src[best];
                for (int64_t kh = 0; kh < k; ++kh) {
                    for (int64_t kw = 0; kw < k; ++kw) {
                        const int64_t pos = (y * stride + kh) * w + (x * stride + kw);
                        if (src[pos] > best_v) {
                            best_v = src[pos];
                            best = pos;
                        }
                    }
                }
                res.output[out_i] = best_v;
                res.argmax[static_cast<size_t>(out_i)] = best;
            }
        }
    }
    return res;
}

// Routes upstream gradient solely to each window's recorded max position.
template <typename T>
Tensor<T> maxpool2d_backward(const Shape& input_shape, const std::vector<int64_t>& argmax,
                             const Tensor<T>& upstream) {
    if (input_shape.size() != 4)
        throw std::invalid_argument("maxpool2d_backward: input shape must be NCHW");
    if (argmax.size() != static_cast<size_t>(upstream.size()))
        throw std::invalid_argument("maxpool2d_backward: argmax count " +
                                    std::to_string(argmax.size()) + " does not match upstream " +
                                    shape_str(upstream.shape()));
    const int64_t h = input_shape[2], w = input_shape[3];
    const int64_t planes = input_shape[0] * input_shape[1];
    const int64_t per_plane = upstream.size() / planes;
    Tensor<T> d_input(input_shape);
    for (int64_t plane = 0; plane < planes; ++plane) {
        T* dst = d_input.data() + plane * h * w;
        const T* up = upstream.data() + plane * per_plane;
        const int64_t* am = argmax.data() + plane * per_plane;
        for (int64_t i = 0; i < per_plane; ++i) dst[am[i]] += up[i];
    }
    return d_input;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
    Tensor<T> out(input.shape());
    const T* src = input.data();
    T* dst = out.data();
    for (int64_t i = 0; i < input.size(); ++i) dst[i] = src[i] > T(0) ? src[i] : T(0);
    return out;
}

// Subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& upstream) {
    if (input.shape() != upstream.shape())
        throw std::invalid_argument("relu_backward: shape mismatch " + shape_str(input.shape()) +
                                    " vs " + shape_str(upstream.shape()));
    Tensor<T> out(input.shape());
    for (int64_t i = 0; i < input.size(); ++i)
        out[i] = input.data()[i] > T(0) ? upstream.data()[i] : T(0);
    return out;
}

// Affine map: input (N x In) * weights (In x Out) + bias (Out).
template <typename T>
Tensor<T> fully_connected(const Tensor<T>& input, const Tensor<T>& weights,
                          const Tensor<T>& bias) {
    if (input.ndim() != 2 || weights.ndim() != 2 || bias.ndim() != 1)
        throw std::invalid_argument("fully_connected: expected input NxIn, weights InxOut, bias Out");
    if (input.dim(1) != weights.dim(0))
        throw std::invalid_argument("fully_connected: inner dimensions disagree, input " +
                                    shape_str(input.shape()) + " vs weights " +
                                    shape_str(weights.shape()));
    if (bias.dim(0) != weights.dim(1))
        throw std::invalid_argument("fully_connected: bias shape " + shape_str(bias.shape()) +
                                    " does not match output width " +
                                    std::to_string(weights.dim(1)));
    const int64_t n = input.dim(0), in_w = input.dim(1), out_w = weights.dim(1);
    Tensor<T> out({n, out_w});
    for (int64_t i = 0; i < n; ++i) {
        T* out_row = out.data() + i * out_w;
        std::copy(bias.data(), bias.data() + out_w, out_row);
        const T* x = input.data() + i * in_w;
        for (int64_t r = 0; r < in_w; ++r)
            axpy_n(out_row, weights.data() + r * out_w, x[r], out_w);
    }
    out.check_finite("fully_connected");
    return out;
}

template <typename T>
struct FcGrads {
    Tensor<T> d_input;
    Tensor<T> d_weights;
    Tensor<T> d_bias;
};

template <typename T>
FcGrads<T> fully_connected_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                    const Tensor<T>& upstream) {
    const int64_t n = input.dim(0), in_w = input.dim(1), out_w = weights.dim(1);
    if (upstream.ndim() != 2 || upstream.dim(0) != n || upstream.dim(1) != out_w)
        throw std::invalid_argument("fully_connected_backward: upstream shape " +
                                    shape_str(upstream.shape()) + " does not match output [" +
                                    std::to_string(n) + "x" + std::to_string(out_w) + "]");
    FcGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(weights.shape()), Tensor<T>({out_w})};
    for (int64_t i = 0; i < n; ++i) {
        const T* up_row = upstream.data() + i * out_w;
        const T* x = input.data() + i * in_w;
        for (int64_t o = 0; o < out_w; ++o) g.d_bias[o] += up_row[o];
        for (int64_t r = 0; r < in_w; ++r) {
            axpy_n(g.d_weights.data() + r * out_w, up_row, x[r], out_w);
            g.d_input.data()[i * in_w + r] = dot_n(up_row, weights.data() + r * out_w, out_w);
        }
    }
    return g;
}

// Row-wise softmax, numerically stabilized by max subtraction.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
    if (logits.ndim() != 2)
        throw std::invalid_argument("softmax: logits must be NxC, got " +
                                    shape_str(logits.shape()));
    const int64_t n = logits.dim(0), c = logits.dim(1);
    Tensor<T> probs(logits.shape());
    for (int64_t i = 0; i < n; ++i) {
        const T* row = logits.data() + i * c;
        T* out = probs.data() + i * c;
        T mx = row[0];
        for (int64_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (int64_t j = 0; j < c; ++j) {
            out[j] = std::exp(row[j] - mx);
            sum += out[j];
        }
        for (int64_t j = 0; j < c; ++j) out[j] /= sum;
    }
    return probs;
}

template <typename T>
struct SoftmaxXent {
    T loss;             // mean over the batch
    Tensor<T> probs;    // N x C, rows sum to 1
    Tensor<T> d_logits; // (probs - onehot) / N
};

template <typename T>
SoftmaxXent<T> softmax_cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels) {
    if (logits.ndim() != 2)
        throw std::invalid_argument("softmax_cross_entropy: logits must be NxC, got " +
                                    shape_str(logits.shape()));
    const int64_t n = logits.dim(0), c = logits.dim(1);
    if (static_cast<int64_t>(labels.size()) != n)
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for batch of " + std::to_string(n));
    for (int label : labels)
        if (label < 0 || label >= c)
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                        " outside [0, " + std::to_string(c) + ")");

    SoftmaxXent<T> res{T(0), Tensor<T>(logits.shape()), Tensor<T>(logits.shape())};
    for (int64_t i = 0; i < n; ++i) {
        const T* row = logits.data() + i * c;
        T* p = res.probs.data() + i * c;
        T* d = res.d_logits.data() + i * c;
        T mx = row[0];
        for (int64_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (int64_t j = 0; j < c; ++j) {
            p[j] = std::exp(row[j] - mx);
            sum += p[j];
        }
        const T log_sum = std::log(sum);
        // -log p[label] computed in shifted space so a saturated softmax
        // cannot produce log(0).
        res.loss += -(row[labels[static_cast<size_t>(i)]] - mx - log_sum);
        for (int64_t j = 0; j < c; ++j) {
            p[j] /= sum;
            d[j] = p[j] / T(n);
        }
        d[labels[static_cast<size_t>(i)]] -= T(1) / T(n);
    }
    res.loss /= T(n);
    res.probs.check_finite("softmax_cross_entropy");
    return res;
}

// v <- momentum*v + g; w <- w - lr*v
template <typename T>
void sgd_update(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& velocity, T lr, T momentum) {
    if (param.shape() != grad.shape() || param.shape() != velocity.shape())
        throw std::invalid_argument("sgd_update: shape mismatch param " + shape_str(param.shape()) +
                                    " grad " + shape_str(grad.shape()) + " velocity " +
                                    shape_str(velocity.shape()));
    if (!(lr > T(0)))
        throw std::invalid_argument("sgd_update: learning rate must be positive");
    if (momentum < T(0) || momentum >= T(1))
        throw std::invalid_argument("sgd_update: momentum must be in [0, 1)");
    for (int64_t i = 0; i < param.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grad[i];
        param[i] -= lr * velocity[i];
    }
}

}  // namespace openpixel
