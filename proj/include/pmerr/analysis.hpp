#pragma once

// Closed-form error analysis: asymptotic market-maker bias, the IND/LMSR bias
// ratio eta, local strong-convexity bounds for the trade dynamics, effective
// sample size, and the three-way error decomposition.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "pmerr/cost.hpp"
#include "pmerr/dynamics.hpp"
#include "pmerr/types.hpp"

namespace pmerr {

/// Norms of mu_true - mu_bar, mu_bar - mu_star, mu_star - mu_t and mu_true - mu_t.
struct ErrorDecomposition {
    double sampling = 0.0;
    double bias = 0.0;
    double convergence = 0.0;
    double total = 0.0;
};

/// Leading-order (in b) bounds on local strong convexity and the induced
/// per-trade convergence factors kappa = 1 - sigma / |blocks|.
struct SigmaBounds {
    double sigma_low = 0.0;
    std::optional<double> sigma_high;  ///< not available for SSD
    double kappa_high = 1.0;
    std::optional<double> kappa_low;
};

double harmonic_mean(const Vector& risk_aversions);

/// -b (a_bar / N) H_T(mu_bar) s, with s = state_for_price(kind, mu_bar).
Vector asymptotic_bias(const Vector& mu_bar, CostKind kind, double b, double a_bar, Eigen::Index num_traders);

/// ||H s_IND|| / ||H s_LMSR|| at H = H_T(mu_bar). Uniform mu_bar is a 0/0 case:
/// DegenerateUniform is thrown unless `permissive`, which returns 1.
double eta(const Vector& mu_bar, bool permissive = false);
/// sqrt(s_IND^T H s_IND / s_LMSR^T H s_LMSR), same conventions as eta.
double eta_kl(const Vector& mu_bar, bool permissive = false);

double kl_divergence(const Vector& p, const Vector& q);

/// b / eta: the IND liquidity whose asymptotic bias matches LMSR at liquidity b.
double match_liquidity(double b, double eta_value);

/// H_T^{1/2} M H_T^{1/2} with M = H_C^+ (ASD) or the pseudoinverse of diag(H_C) (SSD).
Matrix convergence_kernel(DynamicsKind kind, CostKind cost, const Vector& mu_bar);

SigmaBounds sigma_bounds(DynamicsKind kind, CostKind cost, const Vector& mu_bar, const Vector& risk_aversions,
                         double b);

struct GapSample {
    std::size_t t = 0;
    double gap = 0.0;
};

/// |blocks| (1 - (gap(t2) / gap(t1))^{1/(t2 - t1)}).
double empirical_sigma(const std::vector<GapSample>& gaps, std::size_t t1, std::size_t t2, Eigen::Index n_blocks);

/// (sum 1/a_i)^2 / sum 1/a_i^2.
double n_eff(const Vector& risk_aversions);

/// sigma sqrt(K / (n_eff delta)).
double sampling_error_bound(double sigma, Eigen::Index num_securities, double n_eff_value, double delta);

ErrorDecomposition error_decomposition(const Vector& mu_true, const Vector& mu_bar, const Vector& mu_star,
                                       const Vector& mu_t);

/// eta * lambda_max(kernel of `from`) / lambda_min(kernel of `to`), for equal risk aversions.
double trade_ratio_rho(const Vector& mu_bar, const Vector& risk_aversions, CostKind from, CostKind to,
                       double eta_used);

/// Positive spectrum extrema of D^{-1/2} H D^{-1/2} with H = diag(mu) - mu mu^T and D = diag(H).
std::pair<double, double> lemma_conv_spectrum(const Vector& mu);

/// (v^T H v / s^T H s, v^T H^2 v / s^T H^2 s) for sorted mu and vectors whose
/// consecutive differences satisfy d_k(s) <= d_k(v) <= 2 d_k(s).
std::pair<double, double> lemma_bias_ratio(const Vector& mu_sorted, const Vector& s, const Vector& v);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pmerr
