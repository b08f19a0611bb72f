#pragma once

// Exponential-family primitives for a complete market over K outcomes with
// one-hot payoffs. The log partition function T is log-sum-exp, its gradient
// is softmax and its conjugate on the simplex is the negative entropy.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pmerr/errors.hpp"
#include "pmerr/types.hpp"

namespace pmerr {

inline constexpr double kCoherenceTol = 1e-12;

template <typename Derived>
bool is_coherent(const Eigen::MatrixBase<Derived>& mu, double tol = kCoherenceTol) {
    using Scalar = typename Derived::Scalar;
    if (mu.size() < 1) return false;
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        if (!(mu(k) >= Scalar(0))) return false;
    }
    return std::abs(static_cast<double>(mu.sum()) - 1.0) <= tol;
}

/// Coherent and strictly positive in every coordinate.
template <typename Derived>
bool is_interior(const Eigen::MatrixBase<Derived>& mu, double tol = kCoherenceTol) {
    using Scalar = typename Derived::Scalar;
    return is_coherent(mu, tol) && (mu.array() > Scalar(0)).all();
}

template <typename Derived>
void require_interior(const Eigen::MatrixBase<Derived>& mu, const char* where) {
    if (!is_interior(mu)) {
        throw NotInterior(std::string(where) + ": price vector is not in the relative interior of the simplex");
    }
}

/// log sum_k exp(theta_k), shifted by the maximum so large entries do not overflow.
template <typename Derived>
typename Derived::Scalar log_partition(const Eigen::MatrixBase<Derived>& theta) {
    using std::exp;
    using std::log;
    const auto shift = theta.maxCoeff();
    return shift + log((theta.array() - shift).exp().sum());
}

/// Gradient of the log partition function (softmax). Normalized by the explicit sum.
template <typename Derived>
VectorX<typename Derived::Scalar> mean_payoff(const Eigen::MatrixBase<Derived>& theta) {
    using Scalar = typename Derived::Scalar;
    VectorX<Scalar> w = (theta.array() - theta.maxCoeff()).exp().matrix();
    w /= w.sum();
    return w;
}

/// diag(mu) - mu mu^T, the Hessian of the log partition function at price mu.
template <typename Derived>
MatrixX<typename Derived::Scalar> payoff_covariance(const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    require_interior(mu, "payoff_covariance");
    MatrixX<Scalar> h = -mu * mu.transpose();
    h.diagonal() += mu;
    return h;
}

/// sum_k mu_k log mu_k with 0 log 0 = 0.
template <typename Derived>
typename Derived::Scalar neg_entropy(const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    using std::log;
    Scalar acc(0);
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        if (mu(k) > Scalar(0)) acc += mu(k) * log(mu(k));
    }
    return acc;
}

/// The log-mu representative of the natural parameters whose softmax is mu.
template <typename Derived>
VectorX<typename Derived::Scalar> inverse_mean(const Eigen::MatrixBase<Derived>& mu) {
    require_interior(mu, "inverse_mean");
    return mu.array().log().matrix();
}

}  // namespace pmerr
