#pragma once

#include <cstdint>

namespace openpixel {

// out[i] += a * in[i] for i in [0, n).
//
// Every multiply-accumulate that feeds a convolution or FC output value goes
// through this one non-inlined function, so the patch-batched forward pass and
// the dense sliding-window pass execute the exact same machine code and stay
// bit-identical per output element (same accumulation order, same rounding,
// same FMA contraction).
template <typename T>
void axpy_n(T* out, const T* in, T a, int64_t n);

// acc += sum_i a[i] * b[i]; used on backward paths where only tolerance-level
// agreement is required.
template <typename T>
T dot_n(const T* a, const T* b, int64_t n);

}  // namespace openpixel
