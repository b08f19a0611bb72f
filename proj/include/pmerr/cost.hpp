#pragma once

// Cost-function market makers: LMSR (log-sum-exp over all securities) and IND
// (a sum of independent binary LMSRs), plus the liquidity-scaled family
// C_b(s) = b C(s / b).

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pmerr/errors.hpp"
#include "pmerr/expfam.hpp"
#include "pmerr/types.hpp"

namespace pmerr {

enum class CostKind { LMSR, IND };

inline std::string_view to_string(CostKind kind) { return kind == CostKind::LMSR ? "LMSR" : "IND"; }

inline CostKind parse_cost_kind(std::string_view name) {
    if (name == "LMSR" || name == "lmsr") return CostKind::LMSR;
    if (name == "IND" || name == "ind") return CostKind::IND;
    throw PreconditionViolation("unknown cost kind '" + std::string(name) + "'");
}

/// A cost function together with its liquidity parameter b > 0.
class LiquidCost {
public:
    LiquidCost(CostKind kind, double b) : kind_(kind), b_(b) {
        if (!(b > 0.0) || !std::isfinite(b)) throw PreconditionViolation("liquidity b must be positive and finite");
    }

    CostKind kind() const { return kind_; }
    double b() const { return b_; }

private:
    CostKind kind_;
    double b_;
};

namespace detail {

template <typename Scalar>
Scalar softplus(Scalar x) {
    using std::exp;
    using std::log1p;
    return (x > Scalar(0) ? x : Scalar(0)) + log1p(exp(-(x > Scalar(0) ? x : -x)));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar logit(Scalar p) {
    using std::log;
    using std::log1p;
    return log(p) - log1p(-p);
}

template <typename Scalar>
Scalar xlogx(Scalar x) {
    using std::log;
    return x > Scalar(0) ? x * log(x) : Scalar(0);
}

template <typename Derived>
void require_open_box(const Eigen::MatrixBase<Derived>& mu, const char* where) {
    using Scalar = typename Derived::Scalar;
    if (!((mu.array() > Scalar(0)).all() && (mu.array() < Scalar(1)).all())) {
        throw NotInterior(std::string(where) + ": IND prices must lie strictly inside (0,1)");
    }
}

template <typename Derived>
void require_price_domain(CostKind kind, const Eigen::MatrixBase<Derived>& mu, const char* where) {
    if (kind == CostKind::LMSR) {
        require_interior(mu, where);
    } else {
        require_open_box(mu, where);
    }
}

}  // namespace detail

template <typename Derived>
typename Derived::Scalar cost_value(CostKind kind, const Eigen::MatrixBase<Derived>& s) {
    using Scalar = typename Derived::Scalar;
    if (kind == CostKind::LMSR) return log_partition(s);
    Scalar acc(0);
    for (Eigen::Index k = 0; k < s.size(); ++k) acc += detail::softplus(s(k));
    return acc;
}

/// Instantaneous prices, i.e. the gradient of the cost at share vector s.
template <typename Derived>
VectorX<typename Derived::Scalar> cost_price(CostKind kind, const Eigen::MatrixBase<Derived>& s) {
    using Scalar = typename Derived::Scalar;
    if (kind == CostKind::LMSR) return mean_payoff(s);
    VectorX<Scalar> p(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) p(k) = detail::sigmoid(s(k));
    return p;
}

/// Hessian of the cost expressed as a function of the price it produces.
/// LMSR accepts interior simplex points, IND accepts any point of (0,1)^K.
template <typename Derived>
MatrixX<typename Derived::Scalar> hessian_at_price(CostKind kind, const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    if (kind == CostKind::LMSR) return payoff_covariance(mu);
    detail::require_open_box(mu, "hessian_at_price");
    MatrixX<Scalar> h = MatrixX<Scalar>::Zero(mu.size(), mu.size());
    h.diagonal() = (mu.array() * (Scalar(1) - mu.array())).matrix();
    return h;
}

template <typename Derived>
typename Derived::Scalar conjugate_value(CostKind kind, const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    if (kind == CostKind::LMSR) return neg_entropy(mu);
    Scalar acc(0);
    for (Eigen::Index k = 0; k < mu.size(); ++k) acc += detail::xlogx(mu(k)) + detail::xlogx(Scalar(1) - mu(k));
    return acc;
}

/// A share vector whose prices equal mu: log mu for LMSR, logit mu for IND.
template <typename Derived>
VectorX<typename Derived::Scalar> state_for_price(CostKind kind, const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    detail::require_price_domain(kind, mu, "state_for_price");
    if (kind == CostKind::LMSR) return mu.array().log().matrix();
    VectorX<Scalar> s(mu.size());
    for (Eigen::Index k = 0; k < mu.size(); ++k) s(k) = detail::logit(mu(k));
    return s;
}

/// Gradient of the conjugate on the interior of its domain. For LMSR this is
/// log mu + 1, which differs from state_for_price by a constant bundle.
template <typename Derived>
VectorX<typename Derived::Scalar> conjugate_gradient(CostKind kind, const Eigen::MatrixBase<Derived>& mu) {
    using Scalar = typename Derived::Scalar;
    VectorX<Scalar> g = state_for_price(kind, mu);
    if (kind == CostKind::LMSR) g.array() += Scalar(1);
    return g;
}

template <typename Derived>
typename Derived::Scalar liquid_value(const LiquidCost& c, const Eigen::MatrixBase<Derived>& s) {
    using Scalar = typename Derived::Scalar;
    const Scalar b(c.b());
    return b * cost_value(c.kind(), (s / b).eval());
}

template <typename Derived>
VectorX<typename Derived::Scalar> liquid_price(const LiquidCost& c, const Eigen::MatrixBase<Derived>& s) {
    using Scalar = typename Derived::Scalar;
    return cost_price(c.kind(), (s / Scalar(c.b())).eval());
}

/// The Hessian of C_b at s is liquid_hessian_factor(c) * hessian_at_price(kind, liquid_price(c, s)).
inline double liquid_hessian_factor(const LiquidCost& c) { return 1.0 / c.b(); }

/// Largest possible market-maker loss: b log K for LMSR, b K log 2 for IND.
inline double worst_case_loss(const LiquidCost& c, int num_securities) {
    if (num_securities < 2) throw PreconditionViolation("worst_case_loss needs K >= 2");
    if (c.kind() == CostKind::LMSR) return c.b() * std::log(static_cast<double>(num_securities));
    return c.b() * num_securities * std::numbers::ln2;
}

}  // namespace pmerr
