#include "pmerr/dynamics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pmerr/expfam.hpp"

namespace pmerr {

DynamicsKind parse_dynamics_kind(std::string_view name) {
    if (name == "ASD" || name == "asd") return DynamicsKind::ASD;
    if (name == "SSD" || name == "ssd") return DynamicsKind::SSD;
    throw PreconditionViolation("unknown dynamics '" + std::string(name) + "'");
}

Eigen::Index block_count(DynamicsKind kind, Eigen::Index num_traders, Eigen::Index num_securities) {
    if (num_traders < 1 || num_securities < 1) throw PreconditionViolation("block_count needs N, K >= 1");
    return kind == DynamicsKind::ASD ? num_traders : num_traders * num_securities;
}

namespace {

// Objective of a trader's best response as a function of the bundle delta.
struct ResponseObjective {
    const TraderParams& trader;
    const Vector& r;
    const Vector& s;
    const LiquidCost& cost;

    Vector trader_param(const Vector& delta) const { return trader.theta - trader.a * (r + delta); }

    double value(const Vector& delta) const {
        return log_partition(trader_param(delta)) / trader.a + liquid_value(cost, (s + delta).eval());
    }

    Vector gradient(const Vector& delta) const {
        return liquid_price(cost, (s + delta).eval()) - mean_payoff(trader_param(delta));
    }

    Matrix hessian(const Vector& delta) const {
        const Vector own = mean_payoff(trader_param(delta));
        Matrix h = trader.a * (own.asDiagonal().toDenseMatrix() - own * own.transpose());
        const Vector p = liquid_price(cost, (s + delta).eval());
        const double scale = liquid_hessian_factor(cost);
        if (cost.kind() == CostKind::LMSR) {
            h += scale * (p.asDiagonal().toDenseMatrix() - p * p.transpose());
        } else {
            h.diagonal() += scale * (p.array() * (1.0 - p.array())).matrix();
        }
        return h;
    }
};

}  // namespace

Vector best_response_newton(const TraderParams& t, const Vector& r_i, const Vector& s, const LiquidCost& c, double tol,
                            int max_iterations) {
    const ResponseObjective obj{t, r_i, s, c};
    const auto k = s.size();
    Vector delta = Vector::Zero(k);
    double value = obj.value(delta);
    Vector grad = obj.gradient(delta);
    for (int iter = 0; iter < max_iterations; ++iter) {
        const double gnorm = grad.norm();
        if (gnorm <= tol) return delta;
        Matrix h = obj.hessian(delta);
        // LMSR is flat along the all-ones bundle and its gradient is orthogonal
        // to it, so adding 11^T/K selects the step with 1^T dir = 0.
        if (c.kind() == CostKind::LMSR) h.array() += 1.0 / static_cast<double>(k);
        Vector dir = h.ldlt().solve(-grad);
        if (!dir.allFinite() || dir.dot(grad) >= 0.0) dir = -grad;
        const double slope = dir.dot(grad);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector trial = delta + step * dir;
            const double v = obj.value(trial);
            const Vector g = obj.gradient(trial);
            const bool armijo = v <= value + 1e-4 * step * slope;
            const bool flat = g.norm() < 0.5 * gnorm && v <= value + 1e-13 * (1.0 + std::abs(value));
            if (std::isfinite(v) && (armijo || flat)) {
                delta = trial;
                value = v;
                grad = g;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    if (grad.norm() <= tol) return delta;
    throw MaxIterations("best_response_newton: stationarity residual " + std::to_string(grad.norm()));
}

Vector best_response_all(const TraderParams& t, const Vector& r_i, const Vector& s, const LiquidCost& c, double tol) {
    const ResponseObjective obj{t, r_i, s, c};
    if (obj.gradient(Vector::Zero(s.size())).norm() <= tol) return Vector::Zero(s.size());
    if (c.kind() == CostKind::LMSR) {
        // Match the trader's natural parameter to the market's up to a constant.
        const Vector gap = t.theta - t.a * r_i - s / c.b();
        Vector delta = (gap.array() - gap.mean()).matrix() / (t.a + 1.0 / c.b());
        if (obj.gradient(delta).norm() <= tol) return delta;
        return delta + best_response_newton(t, (r_i + delta).eval(), (s + delta).eval(), c, tol);
    }
    return best_response_newton(t, r_i, s, c, tol);
}

double single_security_slope(const TraderParams& t, const Vector& r_i, const Vector& s, Eigen::Index k,
                             const LiquidCost& c, double delta) {
    Vector x = t.theta - t.a * r_i;
    x(k) -= t.a * delta;
    Vector shifted = s;
    shifted(k) += delta;
    const double own = std::exp(x(k) - log_partition(x));
    const double market = liquid_price(c, shifted)(k);
    return market - own;
}

double best_response_single(const TraderParams& t, const Vector& r_i, const Vector& s, Eigen::Index k,
                            const LiquidCost& c, double tol) {
    if (k < 0 || k >= s.size()) throw PreconditionViolation("best_response_single: security index out of range");
    auto slope = [&](double d) { return single_security_slope(t, r_i, s, k, c, d); };
    auto curvature = [&](double d) {
        Vector x = t.theta - t.a * r_i;
        x(k) -= t.a * d;
        const double own = std::exp(x(k) - log_partition(x));
        Vector shifted = s;
        shifted(k) += d;
        const double p = liquid_price(c, shifted)(k);
        return t.a * own * (1.0 - own) + p * (1.0 - p) / c.b();
    };

    const double g0 = slope(0.0);
    if (std::abs(g0) <= tol) return 0.0;

    // Expand away from zero in the descent direction until the slope changes sign.
    const double limit = 1e3 * (1.0 + t.theta.norm());
    double lo = 0.0;
    double hi = 0.0;
    double reach = 1.0;
    const double dir = g0 < 0.0 ? 1.0 : -1.0;
    for (;;) {
        const double probe = dir * std::min(reach, limit);
        const double g = slope(probe);
        if (std::abs(g) <= tol) return probe;
        if (g * dir > 0.0) {
            (dir > 0.0 ? hi : lo) = probe;
            break;
        }
        (dir > 0.0 ? lo : hi) = probe;
        if (reach >= limit) throw BracketFailure("best_response_single: no sign change within the search limit");
        reach *= 4.0;
    }

    double x = dir > 0.0 ? lo : hi;
    for (int iter = 0; iter < 200; ++iter) {
        const double g = slope(x);
        if (std::abs(g) <= tol) return x;
        if (g < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double next = x - g / curvature(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) return x;
        x = next;
    }
    return x;
}

double apply_trade(MarketState& state, const Population& pop, const LiquidCost& c, Eigen::Index trader,
                   const Vector& delta) {
    const TraderParams& t = pop[trader];
    const Vector r_old = state.allocations.row(trader).transpose();
    const Vector r_new = r_old + delta;
    const Vector s_new = state.shares + delta;
    const double cost_before = liquid_value(c, state.shares);
    const double cost_after = liquid_value(c, s_new);
    const double trader_change =
        (log_partition((t.theta - t.a * r_new).eval()) - log_partition((t.theta - t.a * r_old).eval())) / t.a;

    state.allocations.row(trader) = r_new.transpose();
    state.shares = s_new;
    state.cash(trader) -= cost_after - cost_before;
    return trader_change + (cost_after - cost_before);
}

StepRecord step(MarketState& state, const Population& pop, const LiquidCost& c, DynamicsKind kind, std::mt19937_64& rng,
                double tol) {
    const auto n = pop.num_traders();
    const auto k = pop.num_securities();
    std::uniform_int_distribution<Eigen::Index> pick(0, block_count(kind, n, k) - 1);
    const Eigen::Index block = pick(rng);

    StepRecord rec;
    const Vector r_i = state.allocations.row(kind == DynamicsKind::ASD ? block : block / k).transpose();
    if (kind == DynamicsKind::ASD) {
        rec.trader = block;
        rec.delta = best_response_all(pop[block], r_i, state.shares, c, tol);
    } else {
        rec.trader = block / k;
        rec.security = block % k;
        rec.delta = Vector::Zero(k);
        rec.delta(*rec.security) = best_response_single(pop[rec.trader], r_i, state.shares, *rec.security, c, tol);
    }
    if (rec.delta.isZero(0.0)) return rec;
    rec.potential_change = apply_trade(state, pop, c, rec.trader, rec.delta);
    return rec;
}

void check_invariants(const MarketState& state, const LiquidCost& c, double tol) {
    const Vector total = state.allocations.colwise().sum().transpose();
    const double share_err = (total - state.shares).cwiseAbs().maxCoeff();
    if (share_err > tol) {
        throw InvariantViolation("shares differ from the sum of allocations by " + std::to_string(share_err));
    }
    const double expected_cash =
        liquid_value(c, Vector::Zero(state.shares.size()).eval()) - liquid_value(c, state.shares);
    const double cash_err = std::abs(state.cash.sum() - expected_cash);
    if (cash_err > tol) throw InvariantViolation("cash is not conserved, error " + std::to_string(cash_err));
}

Trajectory run(const Population& pop, const LiquidCost& c, DynamicsKind kind, std::size_t trades, std::uint64_t seed,
               std::optional<double> f_star, const RunOptions& opts) {
    Trajectory traj;
    traj.seed = seed;
    traj.kind = kind;
    traj.cost = c.kind();
    traj.b = c.b();
    traj.points.reserve(trades + 1);

    MarketState state(pop.num_traders(), pop.num_securities());
    std::mt19937_64 rng(seed);
    double potential = total_potential(pop, c, state);
    traj.points.push_back({0, liquid_price(c, state.shares), potential, 0.0});

    for (std::size_t t = 1; t <= trades; ++t) {
        const StepRecord rec = step(state, pop, c, kind, rng, opts.tol);
        if (opts.check_invariants) {
            if (rec.potential_change > opts.monotonicity_tol) {
                throw InvariantViolation("potential increased by " + std::to_string(rec.potential_change) +
                                         " at trade " + std::to_string(t));
            }
            check_invariants(state, c, opts.conservation_tol);
        }
        potential += rec.potential_change;
        traj.points.push_back({t, liquid_price(c, state.shares), potential, 0.0});
    }

    double reference = 0.0;
    if (f_star) {
        reference = *f_star;
    } else {
        traj.provisional_gap = true;
        reference = traj.points.back().potential;
        for (const auto& p : traj.points) reference = std::min(reference, p.potential);
    }
    for (auto& p : traj.points) p.gap = p.potential - reference;
    return traj;
}

}  // namespace pmerr
