#pragma once

// Trade simulation as randomized block-coordinate descent on the potential F.
// Under the all-securities dynamics (ASD) a uniformly chosen trader buys the
// utility-maximizing bundle; under the single-security dynamics (SSD) a
// uniformly chosen (trader, security) pair trades that one security.

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "pmerr/cost.hpp"
#include "pmerr/market.hpp"

namespace pmerr {

enum class DynamicsKind { ASD, SSD };

inline std::string_view to_string(DynamicsKind kind) { return kind == DynamicsKind::ASD ? "ASD" : "SSD"; }
DynamicsKind parse_dynamics_kind(std::string_view name);

/// N blocks for ASD, N K blocks for SSD.
Eigen::Index block_count(DynamicsKind kind, Eigen::Index num_traders, Eigen::Index num_securities);

inline constexpr double kBestResponseTol = 1e-12;

/// Bundle delta minimizing F_i(-r_i - delta) + C_b(s + delta). LMSR uses the
/// closed form with 1^T delta = 0; IND uses damped Newton.
Vector best_response_all(const TraderParams& t, const Vector& r_i, const Vector& s, const LiquidCost& c,
                         double tol = kBestResponseTol);

/// The damped-Newton path of best_response_all, for any cost kind.
Vector best_response_newton(const TraderParams& t, const Vector& r_i, const Vector& s, const LiquidCost& c,
                            double tol = kBestResponseTol, int max_iterations = 100);

/// Quantity of security k minimizing the one-dimensional restriction of the
/// same objective. Safeguarded Newton inside a sign-change bracket.
double best_response_single(const TraderParams& t, const Vector& r_i, const Vector& s, Eigen::Index k,
                            const LiquidCost& c, double tol = kBestResponseTol);

/// Derivative of the single-security objective at delta.
double single_security_slope(const TraderParams& t, const Vector& r_i, const Vector& s, Eigen::Index k,
                             const LiquidCost& c, double delta);

struct StepRecord {
    Eigen::Index trader = 0;
    std::optional<Eigen::Index> security;  ///< set under SSD
    Vector delta;
    double potential_change = 0.0;  ///< exact change of F caused by this trade
};

/// Buys delta for trader i at the market maker: r_i += delta, s += delta and
/// the trader pays C_b(s + delta) - C_b(s). Returns the change of F.
double apply_trade(MarketState& state, const Population& pop, const LiquidCost& c, Eigen::Index trader,
                   const Vector& delta);

StepRecord step(MarketState& state, const Population& pop, const LiquidCost& c, DynamicsKind kind,
                std::mt19937_64& rng, double tol = kBestResponseTol);

/// Throws InvariantViolation unless s = sum_i r_i and sum_i c_i = C_b(0) - C_b(s), both to tol.
void check_invariants(const MarketState& state, const LiquidCost& c, double tol = 1e-9);

struct TrajectoryPoint {
    std::size_t t = 0;
    Vector price;      ///< liquid_price at the current shares
    double potential;  ///< F(r^t)
    double gap;        ///< F(r^t) - F*
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::uint64_t seed = 0;
    DynamicsKind kind = DynamicsKind::ASD;
    CostKind cost = CostKind::LMSR;
    double b = 0.0;
    bool provisional_gap = false;  ///< gaps measured against the best F seen, not F*
};

struct RunOptions {
    bool check_invariants = true;
    double conservation_tol = 1e-9;
    double monotonicity_tol = 1e-12;
    double tol = kBestResponseTol;
};

/// Simulates `trades` trades from the empty market. F is tracked by summing
/// the exact per-trade changes onto F(0).
Trajectory run(const Population& pop, const LiquidCost& c, DynamicsKind kind, std::size_t trades, std::uint64_t seed,
               std::optional<double> f_star, const RunOptions& opts = {});

}  // namespace pmerr
