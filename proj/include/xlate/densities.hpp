#ifndef XLATE_DENSITIES_HPP
#define XLATE_DENSITIES_HPP

#include <cmath>
#include <numbers>

namespace xlate {

template <typename Scalar>
Scalar log_normal_pdf(Scalar x, Scalar mean, Scalar var) {
    const Scalar d = x - mean;
    return Scalar(-0.5) * (std::log(Scalar(2) * std::numbers::pi_v<Scalar> * var) + d * d / var);
}

/// Inverse-gamma with shape/rate (density of 1/X for X ~ Gamma(shape, rate)).
template <typename Scalar>
Scalar log_inverse_gamma_pdf(Scalar x, Scalar shape, Scalar rate) {
    return shape * std::log(rate) - std::lgamma(shape) - (shape + 1) * std::log(x) - rate / x;
}

template <typename Scalar>
Scalar log_beta_pdf(Scalar x, Scalar a, Scalar b) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1) * std::log(x) +
           (b - 1) * std::log1p(-x);
}

} // namespace xlate

#endif // XLATE_DENSITIES_HPP
