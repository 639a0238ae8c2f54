#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace openpixel {

using Shape = std::vector<int64_t>;

inline std::string shape_str(const Shape& s) {
    std::string r = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) r += "x";
        r += std::to_string(s[i]);
    }
    return r + "]";
}

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d <= 0)
            throw std::invalid_argument("tensor extent must be positive, got shape " + shape_str(s));
        n *= d;
    }
    return n;
}

// Dense row-major n-dimensional array. Carrier of all network math; double in
// tests and gradient checks, float at training/inference time.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape)
        : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), T(0)) {}

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<int64_t>(data_.size()) != shape_numel(shape_))
            throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_str(shape_));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const Shape& shape() const { return shape_; }
    int64_t ndim() const { return static_cast<int64_t>(shape_.size()); }
    int64_t dim(int64_t i) const { return shape_.at(static_cast<size_t>(i)); }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    template <typename... Ix>
    T& at(Ix... ix) {
        return data_[flat_index({static_cast<int64_t>(ix)...})];
    }
    template <typename... Ix>
    const T& at(Ix... ix) const {
        return data_[flat_index({static_cast<int64_t>(ix)...})];
    }

    Tensor reshaped(Shape shape) const {
        if (shape_numel(shape) != size())
            throw std::invalid_argument("reshape " + shape_str(shape_) + " -> " + shape_str(shape) +
                                        " changes element count");
        return Tensor(std::move(shape), data_);
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

    // Every operation must leave tensors finite; a NaN/Inf is a hard error.
    void check_finite(const char* what) const {
        for (const T& v : data_)
            if (!std::isfinite(v))
                throw std::runtime_error(std::string(what) + ": non-finite value in tensor " +
                                         shape_str(shape_));
    }

private:
    size_t flat_index(std::initializer_list<int64_t> ix) const {
        if (static_cast<int64_t>(ix.size()) != ndim())
            throw std::out_of_range("index rank " + std::to_string(ix.size()) + " for tensor " +
                                    shape_str(shape_));
        int64_t flat = 0;
        size_t d = 0;
        for (int64_t i : ix) {
            if (i < 0 || i >= shape_[d])
                throw std::out_of_range("index " + std::to_string(i) + " out of bounds for dim " +
                                        std::to_string(d) + " of " + shape_str(shape_));
            flat = flat * shape_[d] + i;
            ++d;
        }
        return static_cast<size_t>(flat);
    }

    Shape shape_;
    std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace openpixel
