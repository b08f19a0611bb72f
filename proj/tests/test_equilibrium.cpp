#include <cmath>
#include <random>

#include "doctest.h"
#include "pmerr/equilibrium.hpp"
#include "support.hpp"

using namespace pmerr;
using namespace testsupport;

namespace {

Population desk_population(std::uint64_t seed, Eigen::Index n = 10) {
    return sample_beliefs(ground_truth(BeliefMode::SinglePeaked, 5), n, seed);
}

Population random_population(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
    std::vector<TraderParams> ts;
    std::uniform_real_distribution<double> a(0.3, 3.0);
    for (Eigen::Index i = 0; i < n; ++i) ts.emplace_back(random_normal(k, rng, 2.0), a(rng));
    return Population(ts);
}

Vec weighted_belief(const Population& pop) {
    Vec num = Vec::Zero(pop.num_securities());
    double den = 0;
    for (const auto& t : pop.traders()) {
        num += t.theta / t.a;
        den += 1 / t.a;
    }
    return num / den;
}

// Allocations supporting mu whose total equals the maker's inventory b * s_C(mu).
Mat equilibrium_allocations(const Population& pop, const LiquidCost& c, const Vec& mu) {
    Mat r = canonical_allocations(pop, mu);
    const Vec target = c.b() * state_for_price(c.kind(), mu);
    r.row(0) += (target - r.colwise().sum().transpose()).transpose();
    return r;
}

}  // namespace

TEST_SUITE("equilibrium") {

TEST_CASE("market_clearing_price values") {
    Vec th(3);
    th << 0.3, -1.0, 2.0;
    const Population same({TraderParams(th, 1.0), TraderParams(th, 4.0), TraderParams(th, 0.5)});
    CHECK((market_clearing_price(same) - softmax(th)).norm() < 1e-15);

    std::mt19937_64 rng(61);
    std::vector<TraderParams> eq;
    Vec mean = Vec::Zero(4);
    for (int i = 0; i < 6; ++i) {
        eq.emplace_back(random_normal(4, rng), 2.0);
        mean += eq.back().theta / 6.0;
    }
    CHECK((market_clearing_price(Population(eq)) - softmax(mean)).norm() < 1e-15);

    const Vec t1 = random_normal(4, rng), t2 = random_normal(4, rng);
    const Population two({TraderParams(t1, 1.0), TraderParams(t2, 3.0)});
    CHECK((market_clearing_price(two) - softmax(0.75 * t1 + 0.25 * t2)).norm() < 1e-15);
}

TEST_CASE("dual objective at b = 0 is minimized at the clearing price") {
    std::mt19937_64 rng(62);
    for (int rep = 0; rep < 20; ++rep) {
        const Population pop = random_population(rng, 5, 4);
        const Vec mu_bar = market_clearing_price(pop);
        const DualValue at = clearing_dual_objective(pop, mu_bar);
        CHECK(at.gradient.norm() < 1e-8);
        for (int j = 0; j < 20; ++j) {
            const Vec other = random_interior(4, rng);
            CHECK(at.value <= clearing_dual_objective(pop, other).value + 1e-12);
        }
    }
    Vec edge(3);
    edge << 1, 0, 0;
    const Population pop = random_population(rng, 2, 3);
    CHECK_THROWS_AS(dual_objective(pop, LiquidCost(CostKind::LMSR, 1), edge), NotInterior);
}

TEST_CASE("dual gradient matches central differences along tangent directions") {
    std::mt19937_64 rng(63);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 40; ++rep) {
            const Population pop = random_population(rng, 4, 5);
            const LiquidCost c(kind, 0.1 + 0.05 * rep);
            const Vec mu = random_interior(5, rng, 0.05);
            Vec d = random_normal(5, rng);
            d.array() -= d.mean();
            const double h = 1e-6;
            const double fd = (dual_objective(pop, c, (mu + h * d).eval()).value -
                               dual_objective(pop, c, (mu - h * d).eval()).value) /
                              (2 * h);
            const DualValue dv = dual_objective(pop, c, mu);
            CHECK(std::abs(dv.gradient.sum()) < 1e-12);
            CHECK(rel_err(fd, dv.gradient.dot(d)) < 1e-6);
        }
    }
}

TEST_CASE("LMSR solver matches the pseudo-trader closed form") {
    std::mt19937_64 rng(64);
    for (int rep = 0; rep < 30; ++rep) {
        const Population pop = rep % 2 ? random_population(rng, 8, 5) : desk_population(100 + rep);
        for (double b : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
            const LiquidCost c(CostKind::LMSR, b);
            const EquilibriumResult res = solve_equilibrium(pop, c);
            CHECK((res.mu_star - lmsr_closed_form(pop, c)).norm() < 1e-8);
            CHECK(res.grad_norm <= 1e-10);
            CHECK(is_interior(res.mu_star));
        }
    }
}

TEST_CASE("lmsr_closed_form values") {
    std::mt19937_64 rng(65);
    const Population pop = random_population(rng, 4, 3);
    CHECK((lmsr_closed_form(pop, LiquidCost(CostKind::LMSR, 1e-12)) - market_clearing_price(pop)).norm() < 1e-10);
    CHECK((lmsr_closed_form(pop, LiquidCost(CostKind::LMSR, 1e12)) - Vec::Constant(3, 1.0 / 3)).norm() < 1e-9);
    const Vec t1 = random_normal(3, rng), t2 = random_normal(3, rng);
    const Population two({TraderParams(t1, 1.0), TraderParams(t2, 1.0)});
    CHECK((lmsr_closed_form(two, LiquidCost(CostKind::LMSR, 1.0)) - softmax((t1 + t2) / 3)).norm() < 1e-15);
    CHECK_THROWS_AS(lmsr_closed_form(two, LiquidCost(CostKind::IND, 1.0)), PreconditionViolation);
}

TEST_CASE("small liquidity approaches the clearing price") {
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        const Population pop = desk_population(7);
        const EquilibriumResult res = solve_equilibrium(pop, LiquidCost(kind, 1e-6));
        CHECK((res.mu_star - market_clearing_price(pop)).norm() < 1e-4);
    }
}

TEST_CASE("single IND trader: stationarity recovers the equilibrium price") {
    std::mt19937_64 rng(66);
    for (int rep = 0; rep < 20; ++rep) {
        const TraderParams t(random_normal(4, rng, 2.0), 1.0);
        const Population pop({t});
        const LiquidCost c(CostKind::IND, 0.05 + 0.1 * rep);
        const EquilibriumResult res = solve_equilibrium(pop, c);
        Vec r(4);
        for (int k = 0; k < 4; ++k) r(k) = c.b() * std::log(res.mu_star(k) / (1 - res.mu_star(k)));
        CHECK((softmax(t.theta - t.a * r) - res.mu_star).norm() < 1e-6);
        CHECK((liquid_price(c, r) - res.mu_star).norm() < 1e-12);
    }
}

TEST_CASE("F star equals the potential at equilibrium allocations") {
    std::mt19937_64 rng(67);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 20; ++rep) {
            const Population pop = random_population(rng, 6, 4);
            const LiquidCost c(kind, 0.05 + 0.1 * rep);
            const EquilibriumResult res = solve_equilibrium(pop, c);
            const Mat r = equilibrium_allocations(pop, c, res.mu_star);
            CHECK(std::abs(total_potential(pop, c, r) - res.f_star) < 1e-8);
            // local optimality of those allocations
            for (int j = 0; j < 5; ++j) {
                const Mat pert = r + 1e-3 * Mat::Random(6, 4);
                CHECK(total_potential(pop, c, pert) >= res.f_star - 1e-10);
            }
        }
    }
}

TEST_CASE("solutions do not depend on the starting point") {
    std::mt19937_64 rng(68);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        const Population pop = desk_population(3);
        const LiquidCost c(kind, 0.1);
        SolverOptions o1, o2;
        o1.initial_price = Vec::Constant(5, 0.2);
        o2.initial_price = random_interior(5, rng);
        const Vec m1 = solve_equilibrium(pop, c, o1).mu_star;
        const Vec m2 = solve_equilibrium(pop, c, o2).mu_star;
        CHECK((m1 - m2).norm() <= 2e-10);
    }
}

TEST_CASE("solver reports non-convergence") {
    const Population pop = desk_population(5);
    SolverOptions o;
    o.max_iterations = 1;
    o.tol = 1e-15;
    o.initial_price = Vec::Constant(5, 0.2);
    CHECK_THROWS_AS(solve_equilibrium(pop, LiquidCost(CostKind::IND, 0.1), o), MaxIterations);
    o.tol = 0;
    CHECK_THROWS_AS(solve_equilibrium(pop, LiquidCost(CostKind::IND, 0.1), o), PreconditionViolation);
}

TEST_CASE("verify_equilibrium") {
    const Population pop = desk_population(11);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        const LiquidCost c(kind, 0.1);
        const EquilibriumResult res = solve_equilibrium(pop, c);
        CHECK(verify_equilibrium(pop, c, res.mu_star) <= 1e-9);
        Vec pert = res.mu_star;
        pert(0) += 0.01;
        pert(1) -= 0.01;
        CHECK(verify_equilibrium(pop, c, pert) > 1e-10);
    }
    const Vec mu_bar = market_clearing_price(pop);
    CHECK(verify_clearing(pop, mu_bar) < 1e-12);
    const Mat r = canonical_allocations(pop, mu_bar);
    const Vec total = r.colwise().sum().transpose();
    CHECK((total.array() - total.mean()).matrix().norm() < 1e-12);
    const EquilibriumResult cl = solve_clearing(pop);
    CHECK((cl.mu_star - mu_bar).norm() < 1e-10);
    CHECK((softmax(weighted_belief(pop)) - mu_bar).norm() < 1e-15);
}

TEST_CASE("bias grows with liquidity and is O(b)") {
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        const Population pop = desk_population(21);
        const Vec mu_bar = market_clearing_price(pop);
        double prev = 0;
        double lo = 1e300, hi = 0;
        for (int e = 10; e >= 1; --e) {
            const double b = std::ldexp(1.0, -e);
            const double bias = (solve_equilibrium(pop, LiquidCost(kind, b)).mu_star - mu_bar).norm();
            CHECK(bias >= prev - 1e-9);
            prev = bias;
            lo = std::min(lo, bias / b);
            hi = std::max(hi, bias / b);
        }
        CHECK(hi / lo < 3.0);
    }
}

}
