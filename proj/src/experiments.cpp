#include "pmerr/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <typeinfo>

#include "pmerr/analysis.hpp"
#include "pmerr/expfam.hpp"

namespace pmerr {

std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string metadata(const ExperimentConfig& cfg, const char* command) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.canonical())));
    std::ostringstream os;
    os << "# " << kToolVersion << ' ' << command << '\n'
       << "# config_hash=" << hash << '\n'
       << "# belief_seed=" << cfg.belief_seed << " sequence_seed_base=" << cfg.sequence_seed_base
       << " n_sequences=" << cfg.n_sequences << '\n';
    return os.str();
}

std::string error_name(const std::exception& e) {
    if (dynamic_cast<const MaxIterations*>(&e)) return "MaxIterations";
    if (dynamic_cast<const BracketFailure*>(&e)) return "BracketFailure";
    if (dynamic_cast<const NotInterior*>(&e)) return "NotInterior";
    if (dynamic_cast<const NonPositiveGap*>(&e)) return "NonPositiveGap";
    return "Error";
}

void require_trades(const ExperimentConfig& cfg) {
    if (cfg.trades < 1) throw ConfigError("field 'trades': must be at least 1 for this command");
}

}  // namespace

std::vector<CellRuns> simulate_cells(const Population& pop, const ExperimentConfig& cfg, const RunContext& ctx) {
    std::vector<CellRuns> cells;
    for (CostKind cost : cfg.costs) {
        for (double b : cfg.b_grid) {
            cells.push_back({cost, b, {}, std::vector<Trajectory>(cfg.n_sequences)});
        }
    }
    SolverOptions opts;
    opts.tol = cfg.tol;
    parallel_for(cells.size(), ctx.threads, [&](std::size_t i) {
        cells[i].equilibrium = solve_equilibrium(pop, LiquidCost(cells[i].cost, cells[i].b), opts);
    });
    const std::size_t per_cell = cfg.n_sequences;
    parallel_for(cells.size() * per_cell, ctx.threads, [&](std::size_t task) {
        CellRuns& cell = cells[task / per_cell];
        const std::size_t seq = task % per_cell;
        cell.runs[seq] = run(pop, LiquidCost(cell.cost, cell.b), cfg.dynamics, cfg.trades, cfg.sequence_seed_base + seq,
                             cell.equilibrium.f_star);
    });
    return cells;
}

std::vector<double> mean_gaps(const CellRuns& cell) {
    const std::size_t len = cell.runs.front().points.size();
    std::vector<double> out(len, 0.0);
    for (const auto& traj : cell.runs) {
        for (std::size_t t = 0; t < len; ++t) out[t] += traj.points[t].gap;
    }
    for (double& g : out) g /= static_cast<double>(cell.runs.size());
    return out;
}

std::string cmd_clearing(const ExperimentConfig& cfg, const RunContext&) {
    const Population pop = cfg.population();
    const GroundTruth gt = cfg.truth();
    const Vector mu_bar = market_clearing_price(pop);
    const Vector mu_true = mean_payoff(gt.theta_true);
    const double neff = n_eff(pop.risk_aversions());
    std::ostringstream os;
    os << metadata(cfg, "clearing") << "# n_eff=" << format_g12(neff) << '\n'
       << "# sampling_bound=" << format_g12(sampling_error_bound(gt.sigma, pop.num_securities(), neff, cfg.delta))
       << " delta=" << format_g12(cfg.delta) << '\n'
       << "k,mu_bar,mu_true\n";
    for (Eigen::Index k = 0; k < mu_bar.size(); ++k) {
        os << k + 1 << ',' << format_g12(mu_bar(k)) << ',' << format_g12(mu_true(k)) << '\n';
    }
    return os.str();
}

std::string cmd_bias_sweep(const ExperimentConfig& cfg, const RunContext& ctx) {
    const Population pop = cfg.population();
    const Vector mu_bar = market_clearing_price(pop);
    const Vector a = pop.risk_aversions();
    const double a_bar = harmonic_mean(a);

    struct Row {
        CostKind cost;
        double b;
        double bias = std::nan("");
        double asymptotic = std::nan("");
        std::string status = "ok";
    };
    std::vector<Row> rows;
    for (CostKind cost : cfg.costs) {
        for (double b : cfg.b_grid) rows.push_back({cost, b});
    }
    SolverOptions opts;
    opts.tol = cfg.tol;
    parallel_for(rows.size(), ctx.threads, [&](std::size_t i) {
        Row& row = rows[i];
        row.asymptotic = asymptotic_bias(mu_bar, row.cost, row.b, a_bar, pop.num_traders()).norm();
        try {
            const auto eq = solve_equilibrium(pop, LiquidCost(row.cost, row.b), opts);
            row.bias = (eq.mu_star - mu_bar).norm();
        } catch (const Error& e) {
            row.status = error_name(e);
        }
    });

    std::ostringstream os;
    os << metadata(cfg, "bias-sweep") << "cost,b,bias_norm,asymptotic_bias_norm,status\n";
    for (const auto& row : rows) {
        os << to_string(row.cost) << ',' << format_g12(row.b) << ',' << format_g12(row.bias) << ','
           << format_g12(row.asymptotic) << ',' << row.status << '\n';
    }
    return os.str();
}

std::string cmd_simulate(const ExperimentConfig& cfg, const RunContext& ctx) {
    require_trades(cfg);
    const Population pop = cfg.population();
    const auto cells = simulate_cells(pop, cfg, ctx);

    std::ostringstream os;
    os << metadata(cfg, "simulate") << "cost,b,t,mean_gap,mean_price_error,ci95\n";
    const double n = static_cast<double>(cfg.n_sequences);
    for (const auto& cell : cells) {
        const auto gaps = mean_gaps(cell);
        for (std::size_t t = 0; t < gaps.size(); ++t) {
            if (t % cfg.stride != 0 && t + 1 != gaps.size()) continue;
            double price_err = 0.0;
            double log_sum = 0.0;
            double log_sq = 0.0;
            bool log_ok = true;
            for (const auto& traj : cell.runs) {
                const auto& p = traj.points[t];
                price_err += (p.price - cell.equilibrium.mu_star).norm();
                if (p.gap > 0.0) {
                    const double lg = std::log10(p.gap);
                    log_sum += lg;
                    log_sq += lg * lg;
                } else {
                    log_ok = false;
                }
            }
            double ci = std::nan("");
            if (log_ok) {
                if (cfg.n_sequences < 2) {
                    ci = 0.0;
                } else {
                    const double mean = log_sum / n;
                    const double var = std::max(0.0, (log_sq - n * mean * mean) / (n - 1.0));
                    ci = 1.96 * std::sqrt(var / n);
                }
            }
            os << to_string(cell.cost) << ',' << format_g12(cell.b) << ',' << t << ',' << format_g12(gaps[t]) << ','
               << format_g12(price_err / n) << ',' << format_g12(ci) << '\n';
        }
    }
    return os.str();
}

std::string cmd_sigma(const ExperimentConfig& cfg, const RunContext& ctx) {
    require_trades(cfg);
    auto pairs = cfg.sigma_pairs;
    if (pairs.empty()) pairs.emplace_back(cfg.trades / 2, cfg.trades);
    for (const auto& [t1, t2] : pairs) {
        if (t2 > cfg.trades || t1 >= t2) throw ConfigError("field 'sigma_pairs': pairs must satisfy t1 < t2 <= trades");
    }
    const Population pop = cfg.population();
    const Vector mu_bar = market_clearing_price(pop);
    const Vector a = pop.risk_aversions();
    const auto blocks = block_count(cfg.dynamics, pop.num_traders(), pop.num_securities());
    const auto cells = simulate_cells(pop, cfg, ctx);

    std::ostringstream rows;
    std::ostringstream warnings;
    for (const auto& cell : cells) {
        const auto gaps = mean_gaps(cell);
        std::vector<GapSample> series;
        series.reserve(gaps.size());
        for (std::size_t t = 0; t < gaps.size(); ++t) series.push_back({t, gaps[t]});
        const SigmaBounds bounds = sigma_bounds(cfg.dynamics, cell.cost, mu_bar, a, cell.b);
        for (const auto& [t1, t2] : pairs) {
            double sigma_hat = std::nan("");
            try {
                sigma_hat = empirical_sigma(series, t1, t2, blocks);
            } catch (const NonPositiveGap&) {
                warnings << "# NonPositiveGap cost=" << to_string(cell.cost) << " b=" << format_g12(cell.b)
                         << " t1=" << t1 << " t2=" << t2 << '\n';
            }
            rows << to_string(cell.cost) << ',' << to_string(cfg.dynamics) << ',' << format_g12(cell.b) << ',' << t1
                 << ',' << t2 << ',' << format_g12(sigma_hat) << ',' << format_g12(bounds.sigma_low) << ','
                 << (bounds.sigma_high ? format_g12(*bounds.sigma_high) : std::string()) << '\n';
        }
    }
    std::ostringstream os;
    os << metadata(cfg, "sigma") << warnings.str() << "cost,dynamics,b,t1,t2,sigma_hat,sigma_low,sigma_high\n"
       << rows.str();
    return os.str();
}

std::string cmd_decompose(const ExperimentConfig& cfg, const RunContext& ctx) {
    std::set<std::size_t> snaps(cfg.snapshots.begin(), cfg.snapshots.end());
    if (snaps.empty()) snaps = {0, cfg.trades / 4, cfg.trades / 2, cfg.trades};
    if (*snaps.rbegin() > cfg.trades) throw ConfigError("field 'snapshots': values must not exceed trades");

    const Population pop = cfg.population();
    const Vector mu_true = mean_payoff(cfg.truth().theta_true);
    const Vector mu_bar = market_clearing_price(pop);
    const auto cells = simulate_cells(pop, cfg, ctx);
    const double n = static_cast<double>(cfg.n_sequences);

    std::ostringstream os;
    os << metadata(cfg, "decompose") << "cost,b,t,sampling,bias,convergence,total\n";
    for (const auto& cell : cells) {
        const Vector& mu_star = cell.equilibrium.mu_star;
        for (std::size_t t : snaps) {
            ErrorDecomposition avg;
            for (const auto& traj : cell.runs) {
                const auto d = error_decomposition(mu_true, mu_bar, mu_star, traj.points[t].price);
                avg.sampling = d.sampling;
                avg.bias = d.bias;
                avg.convergence += d.convergence / n;
                avg.total += d.total / n;
            }
            os << to_string(cell.cost) << ',' << format_g12(cell.b) << ',' << t << ',' << format_g12(avg.sampling)
               << ',' << format_g12(avg.bias) << ',' << format_g12(avg.convergence) << ',' << format_g12(avg.total)
               << '\n';
        }
    }
    return os.str();
}

}  // namespace pmerr
