#pragma once

// Market-clearing and market-maker equilibria of a population of exponential
// traders. Both are computed as minimizers of a convex dual objective over the
// probability simplex:
//
//   clearing:      mu_bar  = argmin sum_i F_i^*(mu)
//   market maker:  mu_star = argmin sum_i F_i^*(mu) + b C^*(mu)
//
// and the minimum of the primal potential F equals minus the dual optimum.

#include <optional>

#include "pmerr/cost.hpp"
#include "pmerr/market.hpp"

namespace pmerr {

struct EquilibriumResult {
    Vector mu_star;
    double f_star = 0.0;     ///< minimum of the potential F
    double grad_norm = 0.0;  ///< projected dual gradient norm at mu_star
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-10;
    int max_iterations = 200;
    std::optional<Vector> initial_price;  ///< interior starting point; defaults to the clearing price
};

struct DualValue {
    double value = 0.0;
    Vector gradient;  ///< Euclidean gradient projected onto {u : 1^T u = 0}
};

/// Softmax of the risk-aversion-weighted average belief sum(theta_i / a_i) / sum(1 / a_i).
Vector market_clearing_price(const Population& pop);

/// sum_i F_i^*(mu) + b C^*(mu).
DualValue dual_objective(const Population& pop, const LiquidCost& c, const Vector& mu);
/// sum_i F_i^*(mu), the b = 0 limit.
DualValue clearing_dual_objective(const Population& pop, const Vector& mu);

/// Damped Newton on the dual in the parametrization mu = softmax(z), z_K = 0.
/// Throws MaxIterations when the projected gradient does not reach opts.tol.
EquilibriumResult solve_equilibrium(const Population& pop, const LiquidCost& c, const SolverOptions& opts = {});
EquilibriumResult solve_clearing(const Population& pop, const SolverOptions& opts = {});

/// LMSR market maker as a pseudo-trader with belief 0 and risk aversion 1/b:
/// mu_star = softmax(sum(theta_i / a_i) / (sum(1 / a_i) + b)).
Vector lmsr_closed_form(const Population& pop, const LiquidCost& c);

/// Zero-mean allocations r_i = P (theta_i - log mu) / a_i that support price mu.
Matrix canonical_allocations(const Population& pop, const Vector& mu);

/// Max over traders of the price mismatch plus the tangent-space mismatch
/// between sum_i r_i and the market maker's inventory b * state_for_price(mu).
double verify_equilibrium(const Population& pop, const LiquidCost& c, const Vector& mu_star);
double verify_clearing(const Population& pop, const Vector& mu_bar);

}  // namespace pmerr
