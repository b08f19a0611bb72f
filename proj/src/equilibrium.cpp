#include "pmerr/equilibrium.hpp"

#include <cmath>
#include <string>

#include "pmerr/expfam.hpp"

namespace pmerr {

namespace {

/// Dual objective with an optional market maker (b = 0 means none).
struct Dual {
    Dual(const Population& pop, std::optional<LiquidCost> cost) : maker(cost) {
        const auto k = pop.num_securities();
        weighted_theta = Vector::Zero(k);
        for (const auto& t : pop.traders()) {
            tolerance_weight += 1.0 / t.a;
            weighted_theta += t.theta / t.a;
        }
    }

    double value(const Vector& mu) const {
        double v = tolerance_weight * neg_entropy(mu) - weighted_theta.dot(mu);
        if (maker) v += maker->b() * conjugate_value(maker->kind(), mu);
        return v;
    }

    Vector euclidean_gradient(const Vector& mu) const {
        Vector g = tolerance_weight * (mu.array().log() + 1.0).matrix() - weighted_theta;
        if (maker) g += maker->b() * conjugate_gradient(maker->kind(), mu);
        return g;
    }

    Vector hessian_diagonal(const Vector& mu) const {
        Vector d = tolerance_weight * mu.cwiseInverse();
        if (maker) {
            if (maker->kind() == CostKind::LMSR) {
                d += maker->b() * mu.cwiseInverse();
            } else {
                d += maker->b() * (mu.array() * (1.0 - mu.array())).inverse().matrix();
            }
        }
        return d;
    }

    std::optional<LiquidCost> maker;
    double tolerance_weight = 0.0;  // sum_i 1 / a_i
    Vector weighted_theta;          // sum_i theta_i / a_i
};

Vector project_tangent(const Vector& v) { return (v.array() - v.mean()).matrix(); }

Vector softmax_pinned(const Vector& z_free) {
    Vector z(z_free.size() + 1);
    z << z_free, 0.0;
    return mean_payoff(z);
}

DualValue evaluate(const Dual& dual, const Vector& mu) {
    require_interior(mu, "dual_objective");
    if (dual.maker && dual.maker->kind() == CostKind::IND) detail::require_open_box(mu, "dual_objective");
    return {dual.value(mu), project_tangent(dual.euclidean_gradient(mu))};
}

EquilibriumResult solve(const Population& pop, const Dual& dual, const SolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw PreconditionViolation("solver tolerance must be positive");
    const auto k = pop.num_securities();
    Vector start = opts.initial_price ? *opts.initial_price : market_clearing_price(pop);
    require_interior(start, "solve_equilibrium initial price");
    const Vector log_start = start.array().log().matrix();
    Vector z = (log_start.head(k - 1).array() - log_start(k - 1)).matrix();

    Vector mu = softmax_pinned(z);
    double phi = dual.value(mu);
    Vector gp = project_tangent(dual.euclidean_gradient(mu));

    for (int iter = 0; iter <= opts.max_iterations; ++iter) {
        if (!gp.allFinite()) break;
        const double gnorm = gp.norm();
        if (gnorm <= opts.tol) return {mu, -phi, gnorm, iter};
        if (iter == opts.max_iterations) break;

        // Chain rule through the softmax: J = diag(mu) - mu mu^T.
        Matrix jac = -mu * mu.transpose();
        jac.diagonal() += mu;
        const Vector grad_z = (jac * gp).head(k - 1);

        const Vector gm = gp.cwiseProduct(mu);
        const double gdot = gp.dot(mu);
        Matrix hess = jac * dual.hessian_diagonal(mu).asDiagonal() * jac;
        hess.diagonal() += gm;
        hess -= gm * mu.transpose() + mu * gm.transpose();
        hess += gdot * (mu * mu.transpose());
        hess -= gdot * jac;
        const Matrix hess_z = hess.topLeftCorner(k - 1, k - 1);

        Vector dir;
        double shift = 0.0;
        for (int attempt = 0; attempt < 60; ++attempt) {
            Matrix reg = hess_z;
            reg.diagonal().array() += shift;
            Eigen::LLT<Matrix> llt(reg);
            if (llt.info() == Eigen::Success) {
                dir = -llt.solve(grad_z);
                if (dir.allFinite() && dir.dot(grad_z) < 0.0) break;
            }
            shift = shift == 0.0 ? 1e-10 * (1.0 + hess_z.diagonal().cwiseAbs().maxCoeff()) : shift * 10.0;
            dir.resize(0);
        }
        if (dir.size() == 0) dir = -grad_z;

        // Armijo backtracking. Near the optimum the objective stops resolving
        // decreases, so a step that halves the gradient without raising the
        // value beyond roundoff is also accepted.
        const double slope = dir.dot(grad_z);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector z_try = z + step * dir;
            const Vector mu_try = softmax_pinned(z_try);
            if ((mu_try.array() > 0.0).all() && (dual.maker ? (mu_try.array() < 1.0).all() : true)) {
                const double phi_try = dual.value(mu_try);
                const Vector gp_try = project_tangent(dual.euclidean_gradient(mu_try));
                if (std::isfinite(phi_try) &&
                    (phi_try <= phi + 1e-4 * step * slope ||
                     (gp_try.norm() < 0.5 * gnorm && phi_try <= phi + 1e-13 * (1.0 + std::abs(phi))))) {
                    z = z_try;
                    mu = mu_try;
                    phi = phi_try;
                    gp = gp_try;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    throw MaxIterations("solve_equilibrium: projected gradient " + std::to_string(gp.norm()) +
                        " did not reach tolerance " + std::to_string(opts.tol));
}

}  // namespace

Vector market_clearing_price(const Population& pop) {
    double weight = 0.0;
    Vector avg = Vector::Zero(pop.num_securities());
    for (const auto& t : pop.traders()) {
        weight += 1.0 / t.a;
        avg += t.theta / t.a;
    }
    return mean_payoff((avg / weight).eval());
}

DualValue dual_objective(const Population& pop, const LiquidCost& c, const Vector& mu) {
    return evaluate(Dual(pop, c), mu);
}

DualValue clearing_dual_objective(const Population& pop, const Vector& mu) {
    return evaluate(Dual(pop, std::nullopt), mu);
}

EquilibriumResult solve_equilibrium(const Population& pop, const LiquidCost& c, const SolverOptions& opts) {
    return solve(pop, Dual(pop, c), opts);
}

EquilibriumResult solve_clearing(const Population& pop, const SolverOptions& opts) {
    return solve(pop, Dual(pop, std::nullopt), opts);
}

Vector lmsr_closed_form(const Population& pop, const LiquidCost& c) {
    if (c.kind() != CostKind::LMSR) throw PreconditionViolation("lmsr_closed_form applies to LMSR only");
    double weight = 0.0;
    Vector sum = Vector::Zero(pop.num_securities());
    for (const auto& t : pop.traders()) {
        weight += 1.0 / t.a;
        sum += t.theta / t.a;
    }
    return mean_payoff((sum / (weight + c.b())).eval());
}

Matrix canonical_allocations(const Population& pop, const Vector& mu) {
    const Vector log_mu = inverse_mean(mu);
    Matrix r(pop.num_traders(), pop.num_securities());
    for (Eigen::Index i = 0; i < pop.num_traders(); ++i) {
        r.row(i) = project_tangent((pop[i].theta - log_mu) / pop[i].a).transpose();
    }
    return r;
}

namespace {

double residual(const Population& pop, const std::optional<LiquidCost>& c, const Vector& mu) {
    const Matrix r = canonical_allocations(pop, mu);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < pop.num_traders(); ++i) {
        const Vector own = mean_payoff((pop[i].theta - pop[i].a * r.row(i).transpose()).eval());
        worst = std::max(worst, (own - mu).norm());
    }
    Vector inventory = r.colwise().sum().transpose();
    if (c) inventory -= c->b() * state_for_price(c->kind(), mu);
    return worst + project_tangent(inventory).norm();
}

}  // namespace

double verify_equilibrium(const Population& pop, const LiquidCost& c, const Vector& mu_star) {
    return residual(pop, c, mu_star);
}

double verify_clearing(const Population& pop, const Vector& mu_bar) { return residual(pop, std::nullopt, mu_bar); }

}  // namespace pmerr
