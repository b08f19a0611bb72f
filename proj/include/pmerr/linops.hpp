#pragma once

// Dense symmetric PSD helpers built on a self-adjoint eigendecomposition.

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "pmerr/errors.hpp"
#include "pmerr/types.hpp"

namespace pmerr {

inline constexpr double kRankTol = 1e-10;

namespace detail {

template <typename Derived>
Eigen::SelfAdjointEigenSolver<MatrixX<typename Derived::Scalar>> symmetric_eigen(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    const MatrixX<Scalar> sym = (a + a.transpose()) / Scalar(2);
    return Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>>(sym);
}

template <typename Scalar>
Scalar rank_threshold(const VectorX<Scalar>& eigenvalues, double tol) {
    using std::abs;
    const Scalar top = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : Scalar(0);
    return Scalar(tol) * top;
}

}  // namespace detail

/// Moore-Penrose pseudoinverse of a symmetric matrix. Eigenvalues at or below
/// tol * lambda_max are treated as zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a, double tol = kRankTol) {
    using Scalar = typename Derived::Scalar;
    const auto es = detail::symmetric_eigen(a);
    const VectorX<Scalar>& ev = es.eigenvalues();
    const Scalar cut = detail::rank_threshold(ev, tol);
    VectorX<Scalar> inv = VectorX<Scalar>::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) inv(i) = Scalar(1) / ev(i);
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Symmetric PSD square root. Eigenvalues at or below tol * lambda_max are
/// treated as zero, so numerically null directions stay null.
template <typename Derived>
MatrixX<typename Derived::Scalar> sqrt_psd(const Eigen::MatrixBase<Derived>& a, double tol = kRankTol) {
    using Scalar = typename Derived::Scalar;
    using std::sqrt;
    const auto es = detail::symmetric_eigen(a);
    const VectorX<Scalar>& ev = es.eigenvalues();
    const Scalar cut = detail::rank_threshold(ev, tol);
    VectorX<Scalar> root = VectorX<Scalar>::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) root(i) = sqrt(ev(i));
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// (A^{1/2})^+ taken directly from the spectrum of A.
template <typename Derived>
MatrixX<typename Derived::Scalar> pinv_sqrt_psd(const Eigen::MatrixBase<Derived>& a, double tol = kRankTol) {
    using Scalar = typename Derived::Scalar;
    using std::sqrt;
    const auto es = detail::symmetric_eigen(a);
    const VectorX<Scalar>& ev = es.eigenvalues();
    const Scalar cut = detail::rank_threshold(ev, tol);
    VectorX<Scalar> root = VectorX<Scalar>::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) root(i) = Scalar(1) / sqrt(ev(i));
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// Smallest and largest strictly positive eigenvalue.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> pos_eig_range(const Eigen::MatrixBase<Derived>& a,
                                                                            double tol = kRankTol) {
    using Scalar = typename Derived::Scalar;
    const auto es = detail::symmetric_eigen(a);
    const VectorX<Scalar>& ev = es.eigenvalues();
    const Scalar cut = detail::rank_threshold(ev, tol);
    Scalar lo(0);
    Scalar hi(0);
    bool found = false;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut && ev(i) > Scalar(0)) {
            lo = found ? std::min(lo, ev(i)) : ev(i);
            hi = found ? std::max(hi, ev(i)) : ev(i);
            found = true;
        }
    }
    if (!found) throw ZeroMatrix("pos_eig_range: matrix has no positive eigenvalue");
    return {lo, hi};
}

/// I_N - 11^T / N.
inline Matrix centering_projection(Eigen::Index n) {
    if (n < 1) throw PreconditionViolation("centering_projection needs N >= 1");
    return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

/// Extrema of x^T A x / x^T B x over range(B), computed as the positive
/// spectrum of (B^{1/2})^+ A (B^{1/2})^+.
template <typename DerivedA, typename DerivedB>
std::pair<typename DerivedA::Scalar, typename DerivedA::Scalar> restricted_spectrum(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, double tol = kRankTol) {
    using Scalar = typename DerivedA::Scalar;
    if (b.cwiseAbs().maxCoeff() == Scalar(0)) throw ZeroMatrix("restricted_spectrum: B is zero");
    const MatrixX<Scalar> root_pinv = pinv_sqrt_psd(b, tol);
    const MatrixX<Scalar> m = root_pinv * a * root_pinv;
    return pos_eig_range(m, tol);
}

}  // namespace pmerr
