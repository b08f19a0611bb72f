#include "pmerr/market.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pmerr/expfam.hpp"

namespace pmerr {

TraderParams::TraderParams(Vector belief, double risk_aversion) : theta(std::move(belief)), a(risk_aversion) {
    if (!(a > 0.0) || !std::isfinite(a)) throw PreconditionViolation("risk aversion must be positive and finite");
    if (theta.size() < 1 || !theta.allFinite()) throw PreconditionViolation("trader belief must be finite");
}

Population::Population(std::vector<TraderParams> traders) : traders_(std::move(traders)) {
    if (traders_.empty()) throw PreconditionViolation("population needs at least one trader");
    const auto k = traders_.front().theta.size();
    for (const auto& t : traders_) {
        if (t.theta.size() != k) throw PreconditionViolation("all traders must share the number of securities");
    }
}

Vector Population::risk_aversions() const {
    Vector a(num_traders());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = (*this)[i].a;
    return a;
}

MarketState::MarketState(Eigen::Index num_traders, Eigen::Index num_securities)
    : allocations(Matrix::Zero(num_traders, num_securities)),
      cash(Vector::Zero(num_traders)),
      shares(Vector::Zero(num_securities)) {}

GroundTruth ground_truth(BeliefMode mode, Eigen::Index num_securities, double nu) {
    if (num_securities < 2) throw PreconditionViolation("ground truth needs K >= 2");
    GroundTruth gt;
    gt.mode = mode;
    switch (mode) {
        case BeliefMode::Uniform:
            gt.theta_true = Vector::Zero(num_securities);
            gt.sigma = 1.0;
            break;
        case BeliefMode::SinglePeaked: {
            const double rest = nu * static_cast<double>(num_securities - 1);
            if (!(nu > 0.0) || !(rest < 1.0)) {
                throw PreconditionViolation("single-peaked ground truth needs 0 < nu (K-1) < 1");
            }
            gt.nu = nu;
            gt.sigma = 5.0;
            gt.theta_true = Vector::Constant(num_securities, std::log(nu));
            gt.theta_true(0) = std::log(1.0 - rest);
            break;
        }
        case BeliefMode::Explicit:
            throw PreconditionViolation("explicit ground truths are built directly from a theta vector");
    }
    return gt;
}

Population sample_beliefs(const GroundTruth& gt, const Vector& risk_aversions, std::uint64_t seed) {
    if (risk_aversions.size() < 1) throw PreconditionViolation("sample_beliefs needs N >= 1");
    if (gt.sigma < 0.0) throw PreconditionViolation("belief noise must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<TraderParams> traders;
    traders.reserve(static_cast<std::size_t>(risk_aversions.size()));
    for (Eigen::Index i = 0; i < risk_aversions.size(); ++i) {
        Vector theta = gt.theta_true;
        for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) += gt.sigma * normal(rng);
        traders.emplace_back(std::move(theta), risk_aversions(i));
    }
    return Population(std::move(traders));
}

Population sample_beliefs(const GroundTruth& gt, Eigen::Index num_traders, std::uint64_t seed, double risk_aversion) {
    if (num_traders < 1) throw PreconditionViolation("sample_beliefs needs N >= 1");
    return sample_beliefs(gt, Vector::Constant(num_traders, risk_aversion), seed);
}

double trader_potential(const TraderParams& t, const Vector& x) {
    return log_partition((t.theta + t.a * x).eval()) / t.a;
}

Vector trader_potential_gradient(const TraderParams& t, const Vector& x) {
    return mean_payoff((t.theta + t.a * x).eval());
}

double trader_conjugate(const TraderParams& t, const Vector& mu) {
    return (neg_entropy(mu) - t.theta.dot(mu)) / t.a;
}

double expected_utility(const TraderParams& t, const Vector& r, double c) {
    const double exponent = log_partition((t.theta - t.a * r).eval()) - log_partition(t.theta) - t.a * c;
    return -std::exp(exponent) / t.a;
}

double total_potential(const Population& pop, const LiquidCost& c, const Matrix& allocations) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pop.num_traders(); ++i) {
        acc += trader_potential(pop[i], (-allocations.row(i).transpose()).eval());
    }
    const Vector shares = allocations.colwise().sum().transpose();
    return acc + liquid_value(c, shares);
}

double total_potential(const Population& pop, const LiquidCost& c, const MarketState& state) {
    return total_potential(pop, c, state.allocations);
}

}  // namespace pmerr
