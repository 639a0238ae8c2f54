#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "openpixel/tensor.hpp"

namespace openpixel {

// Max over coordinates of the relative error between an analytic gradient and
// the central finite difference (f(x+e) - f(x-e)) / 2e. The loss function must
// be pure and deterministic.
template <typename T>
double finite_difference_check(const std::function<T(const Tensor<T>&)>& loss, const Tensor<T>& x,
                               const Tensor<T>& analytic_grad, T eps) {
    if (x.shape() != analytic_grad.shape())
        throw std::invalid_argument("finite_difference_check: gradient shape " +
                                    shape_str(analytic_grad.shape()) + " does not match point " +
                                    shape_str(x.shape()));
    if (!(eps > T(0)))
        throw std::invalid_argument("finite_difference_check: eps must be positive");

    Tensor<T> probe = x;
    double worst = 0.0;
    for (int64_t i = 0; i < x.size(); ++i) {
        const T orig = probe[i];
        probe[i] = orig + eps;
        const double f_plus = static_cast<double>(loss(probe));
        probe[i] = orig - eps;
        const double f_minus = static_cast<double>(loss(probe));
        probe[i] = orig;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
            throw std::runtime_error("finite_difference_check: loss returned non-finite value");
        const double numeric = (f_plus - f_minus) / (2.0 * static_cast<double>(eps));
        const double analytic = static_cast<double>(analytic_grad[i]);
        if (!std::isfinite(analytic))
            throw std::runtime_error("finite_difference_check: non-finite analytic gradient");
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace openpixel
