#pragma once

// Experiment configuration: flat `key = value` text, one entry per line,
// `#` starts a comment, lists are comma separated.
//
//   K = 5
//   N = 10
//   risk_aversion = 1            # scalar, or a list of N values
//   ground_truth = single_peaked # uniform | single_peaked | explicit
//   nu = 0.02
//   theta = 0.1, -0.2, ...       # explicit ground truth only
//   sigma = 5                    # defaults: uniform 1, single_peaked 5
//   belief_seed = 1
//   costs = LMSR, IND
//   b_grid = 0.05, 0.1, 0.2
//   dynamics = ASD               # ASD | SSD
//   trades = 1000
//   n_sequences = 20
//   sequence_seed_base = 1
//   output = out.csv
//   delta = 0.05                 # confidence level of the sampling bound
//   snapshots = 0, 250, 1000     # decompose: trade counts to report
//   sigma_pairs = 500:1000       # sigma: (t1, t2) pairs
//   stride = 1                   # simulate: emit every stride-th trade
//   tol = 1e-10                  # equilibrium solver tolerance

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmerr/cost.hpp"
#include "pmerr/dynamics.hpp"
#include "pmerr/market.hpp"

namespace pmerr {

struct ExperimentConfig {
    Eigen::Index num_securities = 5;
    Eigen::Index num_traders = 10;
    std::vector<double> risk_aversions{1.0};
    BeliefMode mode = BeliefMode::SinglePeaked;
    double nu = 0.02;
    std::vector<double> theta;
    std::optional<double> sigma;
    std::uint64_t belief_seed = 1;
    std::vector<CostKind> costs{CostKind::LMSR, CostKind::IND};
    std::vector<double> b_grid{0.05, 0.1, 0.2};
    DynamicsKind dynamics = DynamicsKind::ASD;
    std::size_t trades = 1000;
    std::size_t n_sequences = 20;
    std::uint64_t sequence_seed_base = 1;
    std::string output;
    double delta = 0.05;
    std::vector<std::size_t> snapshots;
    std::vector<std::pair<std::size_t, std::size_t>> sigma_pairs;
    std::size_t stride = 1;
    double tol = 1e-10;

    /// Risk aversions broadcast to length N.
    Vector risk_aversion_vector() const;
    GroundTruth truth() const;
    /// Beliefs sampled once from belief_seed.
    Population population() const;

    /// Cross-field checks; throws ConfigError naming the offending field.
    void validate() const;
    /// Normalized `key = value` listing of every field, used for hashing.
    std::string canonical() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a, printed in CSV metadata as the config fingerprint.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace pmerr
