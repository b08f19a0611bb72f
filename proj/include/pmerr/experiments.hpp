#pragma once

// Batch experiments behind the command-line tool. Each command is a pure
// function of the configuration and returns the full CSV text: `#` metadata
// lines (tool version, config hash, seeds) followed by a header and rows.
// Floats are printed with 12 significant digits.

#include <cstddef>
#include <string>
#include <vector>

#include "pmerr/config.hpp"
#include "pmerr/dynamics.hpp"
#include "pmerr/equilibrium.hpp"

namespace pmerr {

inline constexpr const char* kToolVersion = "pmerr 0.1.0";

struct RunContext {
    unsigned threads = 1;
};

std::string cmd_clearing(const ExperimentConfig& cfg, const RunContext& ctx = {});
std::string cmd_bias_sweep(const ExperimentConfig& cfg, const RunContext& ctx = {});
std::string cmd_simulate(const ExperimentConfig& cfg, const RunContext& ctx = {});
std::string cmd_sigma(const ExperimentConfig& cfg, const RunContext& ctx = {});
std::string cmd_decompose(const ExperimentConfig& cfg, const RunContext& ctx = {});

/// Trajectories of one (cost, b) cell, one per trade sequence, with the
/// market-maker equilibrium they converge to.
struct CellRuns {
    CostKind cost;
    double b;
    EquilibriumResult equilibrium;
    std::vector<Trajectory> runs;
};

/// Runs n_sequences trade sequences (seeds base, base + 1, ...) for every
/// cost x b cell. Cells are ordered cost-major, then by b in grid order.
std::vector<CellRuns> simulate_cells(const Population& pop, const ExperimentConfig& cfg, const RunContext& ctx);

/// Mean suboptimality gap across the runs of a cell, per trade index.
std::vector<double> mean_gaps(const CellRuns& cell);

/// Runs fn(0), ..., fn(count - 1) on up to `threads` worker threads.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn);

/// printf("%.12g").
std::string format_g12(double v);

}  // namespace pmerr

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace pmerr {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace pmerr
