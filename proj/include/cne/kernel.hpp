#ifndef CNE_KERNEL_HPP
#define CNE_KERNEL_HPP

#include "types.hpp"

#include <cmath>
#include <stdexcept>

/**
 * @file kernel.hpp
 *
 * @brief Low-dimensional distances and similarity kernels.
 *
 * Every kernel here is a function of the squared distance between two
 * embedding points. The loss code differentiates through the squared
 * distance, so each kernel comes with its derivative.
 */

namespace cne {

/**
 * Lower clamp on squared distances before any log or division.
 */
template<typename Float = double>
inline constexpr Float min_sq_dist = Float(1e-12);

template<typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sq_dist(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("sq_dist: dimension mismatch");
    }
    return (a - b).squaredNorm();
}

/**
 * Cauchy kernel `1 / (1 + d^2)`.
 */
template<typename Float>
Float cauchy(Float d_sq) {
    if (!(d_sq >= 0)) {
        throw std::invalid_argument("cauchy: squared distance must be non-negative");
    }
    return Float(1) / (d_sq + Float(1));
}

/**
 * Derivative of `cauchy` with respect to the squared distance, `-1 / (1 + d^2)^2`.
 */
template<typename Float>
Float cauchy_derivative(Float d_sq) {
    const Float phi = cauchy(d_sq);
    return -phi * phi;
}

/**
 * Unnormalized companion `1 / d^2`, satisfying `u / (u + 1) == cauchy(d^2)`.
 */
template<typename Float>
Float cauchy_unnormalized(Float d_sq) {
    if (!(d_sq > 0)) {
        throw std::invalid_argument("cauchy_unnormalized: squared distance must be positive");
    }
    return Float(1) / d_sq;
}

/**
 * Exponent of the temperature kernel, `-sqrt(d^2) / tau`, i.e. negative
 * Euclidean distance over temperature.
 */
template<typename Float>
Float exp_sim_exponent(Float d_sq, Float tau) {
    return -std::sqrt(d_sq) / tau;
}

/**
 * Derivative of `exp_sim_exponent` with respect to `d^2`. Requires `d^2 > 0`.
 */
template<typename Float>
Float exp_sim_exponent_derivative(Float d_sq, Float tau) {
    return Float(-0.5) / (tau * std::sqrt(d_sq));
}

/**
 * Temperature kernel `exp(-||a - b|| / tau)`.
 */
template<typename DerivedA, typename DerivedB>
typename DerivedA::Scalar exp_sim(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                  typename DerivedA::Scalar tau)
{
    if (!(tau > 0)) {
        throw std::invalid_argument("exp_sim: tau must be positive");
    }
    return std::exp(exp_sim_exponent(sq_dist(a, b), tau));
}

enum class KernelKind { cauchy, cauchy_unnormalized, exp_temperature };

/**
 * Tagged kernel selection. `tau` is only read by `exp_temperature`.
 */
template<typename Float = double>
struct KernelSpec {
    KernelKind kind = KernelKind::cauchy;
    Float tau = 1;

    Float operator()(Float d_sq) const {
        switch (kind) {
            case KernelKind::cauchy:
                return cauchy(d_sq);
            case KernelKind::cauchy_unnormalized:
                return cauchy_unnormalized(d_sq);
            case KernelKind::exp_temperature:
                if (!(tau > 0)) {
                    throw std::invalid_argument("KernelSpec: tau must be positive");
                }
                return std::exp(exp_sim_exponent(d_sq, tau));
        }
        return 0;
    }
};

}

#endif
