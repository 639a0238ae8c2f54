#include "openpixel/kernels.hpp"

namespace openpixel {

template <typename T>
__attribute__((noinline)) void axpy_n(T* out, const T* in, T a, int64_t n) {
    for (int64_t i = 0; i < n; ++i) out[i] += a * in[i];
}

template <typename T>
__attribute__((noinline)) T dot_n(const T* a, const T* b, int64_t n) {
    T acc = T(0);
    for (int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

template void axpy_n<float>(float*, const float*, float, int64_t);
template void axpy_n<double>(double*, const double*, double, int64_t);
template float dot_n<float>(const float*, const float*, int64_t);
template double dot_n<double>(const double*, const double*, int64_t);

}  // namespace openpixel
