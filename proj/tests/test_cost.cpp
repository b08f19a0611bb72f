#include <cmath>
#include <random>

#include "doctest.h"
#include "pmerr/cost.hpp"
#include "support.hpp"

using namespace pmerr;
using namespace testsupport;

namespace {

double logit_ref(double p) { return std::log(p / (1 - p)); }

}  // namespace

TEST_SUITE("cost") {

TEST_CASE("cost_value values") {
    CHECK(cost_value(CostKind::LMSR, Vec::Zero(2)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(cost_value(CostKind::IND, Vec::Zero(3)) == doctest::Approx(3 * std::log(2.0)).epsilon(1e-15));
    CHECK(cost_value(CostKind::LMSR, Vec::Ones(2)) == doctest::Approx(1 + std::log(2.0)).epsilon(1e-15));
    Vec big(2);
    big << 800, -800;
    CHECK(cost_value(CostKind::IND, big) == doctest::Approx(800.0).epsilon(1e-15));
    CHECK(cost_value(CostKind::LMSR, big) == doctest::Approx(800.0).epsilon(1e-15));
}

TEST_CASE("cost_price values") {
    const Vec u = cost_price(CostKind::LMSR, Vec::Zero(5));
    CHECK((u - Vec::Constant(5, 0.2)).norm() < 1e-15);
    const Vec h = cost_price(CostKind::IND, Vec::Zero(4));
    CHECK((h - Vec::Constant(4, 0.5)).norm() < 1e-15);
    Vec s = Vec::Zero(3);
    s(0) = logit_ref(0.9);
    CHECK(cost_price(CostKind::IND, s)(0) == doctest::Approx(0.9).epsilon(1e-14));

    std::mt19937_64 rng(5);
    const Vec r = random_normal(6, rng, 4.0);
    const Vec pi = cost_price(CostKind::IND, r);
    CHECK((pi.array() > 0).all());
    CHECK((pi.array() < 1).all());
    CHECK(std::abs(cost_price(CostKind::LMSR, r).sum() - 1) < 1e-15);
}

TEST_CASE("hessian_at_price values") {
    const Mat h = hessian_at_price(CostKind::IND, Vec::Constant(2, 0.5));
    CHECK((h - Mat(Vec::Constant(2, 0.25).asDiagonal())).norm() < 1e-15);
    std::mt19937_64 rng(6);
    const Vec mu = random_interior(5, rng);
    CHECK((hessian_at_price(CostKind::LMSR, mu) - payoff_covariance(mu)).norm() == 0.0);
    Vec edge(2);
    edge << 1.0, 0.0;
    CHECK_THROWS_AS(hessian_at_price(CostKind::LMSR, edge), NotInterior);
    CHECK_THROWS_AS(hessian_at_price(CostKind::IND, edge), NotInterior);
}

TEST_CASE("hessian_at_price is the Jacobian of cost_price") {
    std::mt19937_64 rng(31);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 100; ++rep) {
            const Vec s = random_normal(2 + rep % 6, rng, 2.0);
            const Mat fd = fd_jacobian([kind](const Vec& x) { return Vec(cost_price(kind, x)); }, s);
            CHECK(rel_err(fd, hessian_at_price(kind, cost_price(kind, s))) < 1e-5);
        }
    }
}

TEST_CASE("cost_price is the gradient of cost_value") {
    std::mt19937_64 rng(32);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 100; ++rep) {
            const Vec s = random_normal(2 + rep % 6, rng, 2.0);
            const Vec fd = fd_gradient([kind](const Vec& x) { return cost_value(kind, x); }, s);
            CHECK(rel_err(fd, cost_price(kind, s)) < 1e-6);
        }
    }
}

TEST_CASE("conjugate_value values") {
    CHECK(conjugate_value(CostKind::LMSR, Vec::Constant(5, 0.2)) == doctest::Approx(-std::log(5.0)).epsilon(1e-14));
    CHECK(conjugate_value(CostKind::IND, Vec::Constant(2, 0.5)) == doctest::Approx(-2 * std::log(2.0)).epsilon(1e-15));
    Vec onehot = Vec::Zero(3);
    onehot(0) = 1;
    CHECK(conjugate_value(CostKind::LMSR, onehot) == 0.0);
    CHECK(conjugate_value(CostKind::IND, onehot) == 0.0);
}

TEST_CASE("state_for_price values") {
    const Vec l = state_for_price(CostKind::LMSR, Vec::Constant(2, 0.5));
    CHECK((l - Vec::Constant(2, std::log(0.5))).norm() < 1e-15);
    const Vec i = state_for_price(CostKind::IND, Vec::Constant(2, 0.5));
    CHECK(i.norm() == 0.0);
    Vec mu(2);
    mu << 0.9, 0.1;
    const Vec j = state_for_price(CostKind::IND, mu);
    CHECK(j(0) == doctest::Approx(std::log(9.0)).epsilon(1e-14));
    CHECK(j(1) == doctest::Approx(-std::log(9.0)).epsilon(1e-14));
}

TEST_CASE("state_for_price inverts cost_price") {
    std::mt19937_64 rng(33);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 100; ++rep) {
            const Vec mu = random_interior(2 + rep % 7, rng, 1e-4);
            CHECK((cost_price(kind, state_for_price(kind, mu)) - mu).norm() < 1e-12);
        }
    }
}

TEST_CASE("conjugacy through state_for_price") {
    std::mt19937_64 rng(34);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 100; ++rep) {
            const Vec mu = random_interior(2 + rep % 7, rng, 1e-3);
            const Vec s = state_for_price(kind, mu);
            CHECK(std::abs(mu.dot(s) - cost_value(kind, s) - conjugate_value(kind, mu)) < 1e-10);
        }
    }
}

TEST_CASE("conjugate_gradient matches central differences along the simplex") {
    std::mt19937_64 rng(35);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 50; ++rep) {
            const Vec mu = random_interior(4, rng, 0.05);
            Vec d = random_normal(4, rng);
            d.array() -= d.mean();
            const double h = 1e-6;
            const double fd =
                (conjugate_value(kind, (mu + h * d).eval()) - conjugate_value(kind, (mu - h * d).eval())) / (2 * h);
            CHECK(rel_err(fd, conjugate_gradient(kind, mu).dot(d)) < 1e-6);
        }
    }
}

TEST_CASE("liquidity scaling") {
    const LiquidCost l(CostKind::LMSR, 0.3);
    const LiquidCost i(CostKind::IND, 0.3);
    CHECK(liquid_value(l, Vec::Zero(4)) == doctest::Approx(0.3 * std::log(4.0)).epsilon(1e-15));
    CHECK(liquid_value(i, Vec::Zero(4)) == doctest::Approx(0.3 * 4 * std::log(2.0)).epsilon(1e-15));
    CHECK((liquid_price(l, Vec::Zero(4)) - cost_price(CostKind::LMSR, Vec::Zero(4))).norm() == 0.0);

    std::mt19937_64 rng(36);
    const Vec s = random_normal(4, rng);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        const LiquidCost one(kind, 1.0);
        CHECK(liquid_value(one, s) == cost_value(kind, s));
        CHECK((liquid_price(one, s) - cost_price(kind, s)).norm() == 0.0);

        const LiquidCost c(kind, 0.7);
        const Mat fd = fd_jacobian([&c](const Vec& x) { return Vec(liquid_price(c, x)); }, s);
        const Mat an = liquid_hessian_factor(c) * hessian_at_price(kind, liquid_price(c, s));
        CHECK(rel_err(fd, an) < 1e-5);
        const Vec g = fd_gradient([&c](const Vec& x) { return liquid_value(c, x); }, s);
        CHECK(rel_err(g, liquid_price(c, s)) < 1e-6);
    }
    CHECK_THROWS_AS(LiquidCost(CostKind::LMSR, 0.0), PreconditionViolation);
    CHECK_THROWS_AS(LiquidCost(CostKind::IND, -1.0), PreconditionViolation);
}

TEST_CASE("worst_case_loss values") {
    CHECK(worst_case_loss(LiquidCost(CostKind::LMSR, 1), 5) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    CHECK(worst_case_loss(LiquidCost(CostKind::IND, 1), 5) == doctest::Approx(5 * std::log(2.0)).epsilon(1e-15));
    CHECK(worst_case_loss(LiquidCost(CostKind::LMSR, 2), 2) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(worst_case_loss(LiquidCost(CostKind::LMSR, 1), 1), PreconditionViolation);
}

TEST_CASE("cost functions are convex along random segments") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (CostKind kind : {CostKind::LMSR, CostKind::IND}) {
        for (int rep = 0; rep < 500; ++rep) {
            const Vec s = random_normal(5, rng, 3.0);
            const Vec t = random_normal(5, rng, 3.0);
            const double lam = u(rng);
            const double mid = cost_value(kind, (lam * s + (1 - lam) * t).eval());
            CHECK(mid <= lam * cost_value(kind, s) + (1 - lam) * cost_value(kind, t) + 1e-12);
        }
    }
}

TEST_CASE("LMSR is translation invariant") {
    std::mt19937_64 rng(38);
    for (int rep = 0; rep < 100; ++rep) {
        const Vec s = random_normal(5, rng, 3.0);
        const double c = random_normal(1, rng, 10.0)(0);
        CHECK(std::abs(cost_value(CostKind::LMSR, (s.array() + c).matrix().eval()) - cost_value(CostKind::LMSR, s) - c) <
              1e-12);
    }
}

TEST_CASE("cost kind names") {
    CHECK(parse_cost_kind("LMSR") == CostKind::LMSR);
    CHECK(parse_cost_kind("ind") == CostKind::IND);
    CHECK(to_string(CostKind::IND) == "IND");
    CHECK_THROWS_AS(parse_cost_kind("quadratic"), PreconditionViolation);
}

}
