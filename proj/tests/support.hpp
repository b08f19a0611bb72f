#pragma once

// Test-side oracles and random generators. Nothing here calls into the
// library's solvers, so results can be compared against it independently.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace testsupport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

inline double rel_err(const Vec& got, const Vec& want) { return (got - want).norm() / std::max(1.0, want.norm()); }

inline double rel_err(const Mat& got, const Mat& want) { return (got - want).norm() / std::max(1.0, want.norm()); }

inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
    Vec g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        g(k) = (f(xp) - f(xm)) / (2 * h);
    }
    return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h = 1e-5) {
    const Eigen::Index m = g(x).size();
    Mat j(m, x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        j.col(k) = (g(xp) - g(xm)) / (2 * h);
    }
    return j;
}

/// Minimizer of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > tol * (1 + std::abs(lo) + std::abs(hi))) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    return (lo + hi) / 2;
}

/// Golden-section search on an extended-precision objective.
inline double golden_section_ld(const std::function<long double(double)>& f, double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    long double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1 + std::abs(lo) + std::abs(hi)); ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    return (lo + hi) / 2;
}

inline double lse(const Vec& x) {
    const double m = x.maxCoeff();
    return m + std::log((x.array() - m).exp().sum());
}

inline Vec softmax(const Vec& x) {
    Vec e = (x.array() - x.maxCoeff()).exp().matrix();
    return e / e.sum();
}

/// max over theta of mu . theta - lse(theta), by plain Newton with theta_K = 0.
inline double lse_conjugate(const Vec& mu) {
    const Eigen::Index k = mu.size();
    Vec z = Vec::Zero(k - 1);
    auto full = [&](const Vec& zz) {
        Vec t = Vec::Zero(k);
        t.head(k - 1) = zz;
        return t;
    };
    for (int it = 0; it < 100; ++it) {
        const Vec p = softmax(full(z));
        const Vec g = (mu - p).head(k - 1);
        if (g.norm() < 1e-14) break;
        Mat h = -(Mat(p.asDiagonal()) - p * p.transpose()).topLeftCorner(k - 1, k - 1);
        z -= h.ldlt().solve(g);
    }
    const Vec t = full(z);
    return mu.dot(t) - lse(t);
}

inline Vec random_interior(Eigen::Index k, std::mt19937_64& rng, double floor = 1e-3) {
    std::uniform_real_distribution<double> u(floor, 1.0);
    Vec v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = u(rng);
    return v / v.sum();
}

/// Sorted nonincreasing interior probability vector with log-spread entries.
inline Vec random_sorted_interior(Eigen::Index k, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.5);
    Vec v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = n(rng);
    Vec p = softmax(v);
    std::sort(p.data(), p.data() + k, std::greater<double>());
    return p;
}

inline Vec random_normal(Eigen::Index k, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> n(0.0, sd);
    Vec v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = n(rng);
    return v;
}

/// Random PSD matrix of the given rank.
inline Mat random_psd(Eigen::Index n, Eigen::Index rank, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat f(n, rank);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < rank; ++j) f(i, j) = g(rng);
    return f * f.transpose();
}

}  // namespace testsupport
