#include "pmerr/analysis.hpp"

#include <cmath>
#include <string>

#include "pmerr/expfam.hpp"
#include "pmerr/linops.hpp"

namespace pmerr {

double harmonic_mean(const Vector& risk_aversions) {
    if (risk_aversions.size() < 1 || !(risk_aversions.array() > 0.0).all()) {
        throw PreconditionViolation("risk aversions must be positive");
    }
    return static_cast<double>(risk_aversions.size()) / risk_aversions.cwiseInverse().sum();
}

Vector asymptotic_bias(const Vector& mu_bar, CostKind kind, double b, double a_bar, Eigen::Index num_traders) {
    require_interior(mu_bar, "asymptotic_bias");
    if (num_traders < 1) throw PreconditionViolation("asymptotic_bias needs N >= 1");
    const Matrix h = payoff_covariance(mu_bar);
    return -b * (a_bar / static_cast<double>(num_traders)) * (h * state_for_price(kind, mu_bar));
}

namespace {

struct BiasDirections {
    Matrix h;
    Vector lmsr;
    Vector ind;
};

BiasDirections bias_directions(const Vector& mu_bar) {
    require_interior(mu_bar, "eta");
    return {payoff_covariance(mu_bar), state_for_price(CostKind::LMSR, mu_bar), state_for_price(CostKind::IND, mu_bar)};
}

}  // namespace

double eta(const Vector& mu_bar, bool permissive) {
    const auto d = bias_directions(mu_bar);
    const double denom = (d.h * d.lmsr).norm();
    if (denom < 1e-12) {
        if (permissive) return 1.0;
        throw DegenerateUniform("eta is 0/0 at uniform prices");
    }
    return (d.h * d.ind).norm() / denom;
}

double eta_kl(const Vector& mu_bar, bool permissive) {
    const auto d = bias_directions(mu_bar);
    if ((d.h * d.lmsr).norm() < 1e-12) {
        if (permissive) return 1.0;
        throw DegenerateUniform("eta_kl is 0/0 at uniform prices");
    }
    return std::sqrt(d.ind.dot(d.h * d.ind) / d.lmsr.dot(d.h * d.lmsr));
}

double kl_divergence(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw PreconditionViolation("kl_divergence: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (p(k) <= 0.0) continue;
        if (q(k) <= 0.0) throw PreconditionViolation("kl_divergence: q vanishes where p is positive");
        acc += p(k) * std::log(p(k) / q(k));
    }
    return acc;
}

double match_liquidity(double b, double eta_value) {
    if (!(eta_value >= 1.0)) throw PreconditionViolation("match_liquidity needs eta >= 1");
    return b / eta_value;
}

Matrix convergence_kernel(DynamicsKind kind, CostKind cost, const Vector& mu_bar) {
    const Matrix ht = payoff_covariance(mu_bar);
    const Matrix root = sqrt_psd(ht);
    Matrix hc = hessian_at_price(cost, mu_bar);
    if (kind == DynamicsKind::SSD) hc = Matrix(hc.diagonal().asDiagonal());
    return root * pinv(hc) * root;
}

SigmaBounds sigma_bounds(DynamicsKind kind, CostKind cost, const Vector& mu_bar, const Vector& risk_aversions,
                         double b) {
    require_interior(mu_bar, "sigma_bounds");
    const auto n = risk_aversions.size();
    if (n < 1 || !(risk_aversions.array() > 0.0).all()) throw PreconditionViolation("risk aversions must be positive");
    const double blocks = static_cast<double>(block_count(kind, n, mu_bar.size()));

    SigmaBounds out;
    if (kind == DynamicsKind::ASD) out.sigma_high = 0.0;
    if (n < 2) {
        // PDP vanishes for a single trader; the leading-order bounds are zero.
        if (out.sigma_high) out.kappa_low = 1.0;
        return out;
    }
    const Matrix p = centering_projection(n);
    const Matrix pdp = p * risk_aversions.asDiagonal() * p;
    const auto [pdp_lo, pdp_hi] = pos_eig_range(pdp);
    const auto [k_lo, k_hi] = pos_eig_range(convergence_kernel(kind, cost, mu_bar));

    if (kind == DynamicsKind::ASD) {
        out.sigma_low = 2.0 * b * pdp_lo * k_lo;
        out.sigma_high = 2.0 * b * pdp_hi * k_hi;
        out.kappa_low = 1.0 - *out.sigma_high / blocks;
    } else {
        out.sigma_low = b * pdp_lo * k_lo;
    }
    out.kappa_high = 1.0 - out.sigma_low / blocks;
    return out;
}

double empirical_sigma(const std::vector<GapSample>& gaps, std::size_t t1, std::size_t t2, Eigen::Index n_blocks) {
    if (t2 <= t1) throw PreconditionViolation("empirical_sigma needs t2 > t1");
    std::optional<double> g1;
    std::optional<double> g2;
    for (const auto& g : gaps) {
        if (g.t == t1) g1 = g.gap;
        if (g.t == t2) g2 = g.gap;
    }
    if (!g1 || !g2) throw PreconditionViolation("empirical_sigma: requested trade index not in the gap series");
    if (!(*g1 > 0.0) || !(*g2 > 0.0)) throw NonPositiveGap("empirical_sigma: gaps must be positive");
    const double ratio = std::pow(*g2 / *g1, 1.0 / static_cast<double>(t2 - t1));
    return static_cast<double>(n_blocks) * (1.0 - ratio);
}

double n_eff(const Vector& risk_aversions) {
    if (risk_aversions.size() < 1 || !(risk_aversions.array() > 0.0).all()) {
        throw PreconditionViolation("risk aversions must be positive");
    }
    const Vector inv = risk_aversions.cwiseInverse();
    const double s1 = inv.sum();
    return s1 * s1 / inv.squaredNorm();
}

double sampling_error_bound(double sigma, Eigen::Index num_securities, double n_eff_value, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionViolation("delta must lie in (0,1)");
    if (!(n_eff_value > 0.0) || sigma < 0.0) throw PreconditionViolation("sampling_error_bound: invalid arguments");
    return sigma * std::sqrt(static_cast<double>(num_securities) / (n_eff_value * delta));
}

ErrorDecomposition error_decomposition(const Vector& mu_true, const Vector& mu_bar, const Vector& mu_star,
                                       const Vector& mu_t) {
    const auto k = mu_true.size();
    if (mu_bar.size() != k || mu_star.size() != k || mu_t.size() != k) {
        throw PreconditionViolation("error_decomposition: dimension mismatch");
    }
    return {(mu_true - mu_bar).norm(), (mu_bar - mu_star).norm(), (mu_star - mu_t).norm(), (mu_true - mu_t).norm()};
}

double trade_ratio_rho(const Vector& mu_bar, const Vector& risk_aversions, CostKind from, CostKind to,
                       double eta_used) {
    if (risk_aversions.size() < 1 || (risk_aversions.array() != risk_aversions(0)).any()) {
        throw PreconditionViolation("trade_ratio_rho assumes equal risk aversions");
    }
    const auto from_range = pos_eig_range(convergence_kernel(DynamicsKind::ASD, from, mu_bar));
    const auto to_range = pos_eig_range(convergence_kernel(DynamicsKind::ASD, to, mu_bar));
    return eta_used * from_range.second / to_range.first;
}

std::pair<double, double> lemma_conv_spectrum(const Vector& mu) {
    require_interior(mu, "lemma_conv_spectrum");
    const Matrix h = payoff_covariance(mu);
    const Matrix d = h.diagonal().asDiagonal();
    return restricted_spectrum(h, d);
}

std::pair<double, double> lemma_bias_ratio(const Vector& mu_sorted, const Vector& s, const Vector& v) {
    const auto k = mu_sorted.size();
    if (s.size() != k || v.size() != k) throw PreconditionViolation("lemma_bias_ratio: dimension mismatch");
    require_interior(mu_sorted, "lemma_bias_ratio");
    constexpr double slack = 1e-12;
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
        const double ds = s(i) - s(i + 1);
        const double dv = v(i) - v(i + 1);
        const double scale = slack * (1.0 + std::abs(ds));
        if (mu_sorted(i) < mu_sorted(i + 1)) throw PreconditionViolation("lemma_bias_ratio: mu is not sorted");
        if (ds < -scale || dv < ds - scale || dv > 2.0 * ds + scale) {
            throw PreconditionViolation("lemma_bias_ratio: differences violate d(s) <= d(v) <= 2 d(s) at index " +
                                        std::to_string(i));
        }
    }
    const Matrix h = payoff_covariance(mu_sorted);
    const Vector hs = h * s;
    const Vector hv = h * v;
    const double base = s.dot(hs);
    if (!(base > 0.0)) throw PreconditionViolation("lemma_bias_ratio: s^T H s must be positive");
    return {v.dot(hv) / base, hv.squaredNorm() / hs.squaredNorm()};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionViolation("fit_line needs two or more points");
    const auto n = static_cast<Eigen::Index>(x.size());
    const Eigen::Map<const Vector> xs(x.data(), n);
    const Eigen::Map<const Vector> ys(y.data(), n);
    const Vector xc = (xs.array() - xs.mean()).matrix();
    const Vector yc = (ys.array() - ys.mean()).matrix();
    const double sxx = xc.squaredNorm();
    if (sxx == 0.0) throw PreconditionViolation("fit_line: x values are all equal");
    LineFit fit;
    fit.slope = xc.dot(yc) / sxx;
    fit.intercept = ys.mean() - fit.slope * xs.mean();
    const double syy = yc.squaredNorm();
    const double sse = (yc - fit.slope * xc).squaredNorm();
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace pmerr
