#pragma once

// Exponential-utility traders and the potential function whose block
// minimization reproduces their trading.

#include <cstdint>
#include <vector>

#include "pmerr/cost.hpp"
#include "pmerr/types.hpp"

namespace pmerr {

/// Belief (natural parameter) and risk aversion of one trader.
struct TraderParams {
    TraderParams(Vector belief, double risk_aversion);

    Vector theta;
    double a;
};

class Population {
public:
    explicit Population(std::vector<TraderParams> traders);

    Eigen::Index num_traders() const { return static_cast<Eigen::Index>(traders_.size()); }
    Eigen::Index num_securities() const { return traders_.front().theta.size(); }
    const TraderParams& operator[](Eigen::Index i) const { return traders_[static_cast<std::size_t>(i)]; }
    const std::vector<TraderParams>& traders() const { return traders_; }

    Vector risk_aversions() const;

private:
    std::vector<TraderParams> traders_;
};

/// Allocations are stored row-wise: allocations.row(i) is trader i's bundle.
struct MarketState {
    MarketState(Eigen::Index num_traders, Eigen::Index num_securities);

    Matrix allocations;
    Vector cash;
    Vector shares;

    Eigen::Index num_traders() const { return allocations.rows(); }
    Eigen::Index num_securities() const { return allocations.cols(); }
};

enum class BeliefMode { Uniform, SinglePeaked, Explicit };

struct GroundTruth {
    Vector theta_true;
    double sigma = 0.0;
    BeliefMode mode = BeliefMode::Uniform;
    double nu = 0.0;
};

/// Ground truths used in the experiments: uniform (theta = 0, sigma = 1) or
/// single-peaked with one likely outcome and K-1 outcomes of probability nu
/// (sigma = 5).
GroundTruth ground_truth(BeliefMode mode, Eigen::Index num_securities, double nu = 0.02);

/// N independent beliefs theta_i ~ Normal(theta_true, sigma^2 I), all with the
/// given risk aversion. Deterministic for a fixed seed within one build.
Population sample_beliefs(const GroundTruth& gt, Eigen::Index num_traders, std::uint64_t seed,
                          double risk_aversion = 1.0);
Population sample_beliefs(const GroundTruth& gt, const Vector& risk_aversions, std::uint64_t seed);

/// F_i(x) = (1/a) T(theta + a x).
double trader_potential(const TraderParams& t, const Vector& x);
Vector trader_potential_gradient(const TraderParams& t, const Vector& x);

/// F_i^*(mu) = (1/a) (T^*(mu) - theta . mu).
double trader_conjugate(const TraderParams& t, const Vector& mu);

/// Expected exponential utility of holding bundle r and cash c under the
/// trader's belief: -(1/a) exp(T(theta - a r) - T(theta) - a c).
double expected_utility(const TraderParams& t, const Vector& r, double c);

/// F(r) = sum_i F_i(-r_i) + C_b(sum_i r_i).
double total_potential(const Population& pop, const LiquidCost& c, const Matrix& allocations);
double total_potential(const Population& pop, const LiquidCost& c, const MarketState& state);

}  // namespace pmerr
