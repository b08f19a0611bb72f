#include "pmerr/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pmerr/expfam.hpp"

namespace pmerr {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start));
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

class FieldError {
public:
    FieldError(int line, std::string key) : line_(line), key_(std::move(key)) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line_) + ": field '" + key_ + "': " + what);
    }

    double real(const std::string& token) const {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0' || errno == ERANGE) fail("expected a number, got '" + token + "'");
        return v;
    }

    std::uint64_t unsigned_int(const std::string& token) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            fail("expected a nonnegative integer, got '" + token + "'");
        }
        return v;
    }

    std::vector<double> reals(const std::string& value) const {
        std::vector<double> out;
        for (const auto& tok : split_list(value)) out.push_back(real(tok));
        if (out.empty()) fail("expected at least one number");
        return out;
    }

private:
    int line_;
    std::string key_;
};

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += fmt(xs[i]);
    }
    return out;
}

}  // namespace

Vector ExperimentConfig::risk_aversion_vector() const {
    if (risk_aversions.size() == 1) return Vector::Constant(num_traders, risk_aversions.front());
    return Eigen::Map<const Vector>(risk_aversions.data(), static_cast<Eigen::Index>(risk_aversions.size()));
}

GroundTruth ExperimentConfig::truth() const {
    GroundTruth gt;
    if (mode == BeliefMode::Explicit) {
        gt.mode = BeliefMode::Explicit;
        gt.theta_true = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
        gt.sigma = 0.0;
    } else {
        gt = ground_truth(mode, num_securities, nu);
    }
    if (sigma) gt.sigma = *sigma;
    return gt;
}

Population ExperimentConfig::population() const { return sample_beliefs(truth(), risk_aversion_vector(), belief_seed); }

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& what) {
        throw ConfigError("field '" + key + "': " + what);
    };
    if (num_securities < 2) fail("K", "must be at least 2");
    if (num_traders < 1) fail("N", "must be at least 1");
    if (risk_aversions.size() != 1 && static_cast<Eigen::Index>(risk_aversions.size()) != num_traders) {
        fail("risk_aversion", "must be a scalar or a list of N values");
    }
    for (double a : risk_aversions) {
        if (!(a > 0.0)) fail("risk_aversion", "values must be positive");
    }
    if (mode == BeliefMode::SinglePeaked && !(nu > 0.0 && nu * static_cast<double>(num_securities - 1) < 1.0)) {
        fail("nu", "single_peaked needs 0 < nu (K-1) < 1");
    }
    if (mode == BeliefMode::Explicit && static_cast<Eigen::Index>(theta.size()) != num_securities) {
        fail("theta", "explicit ground truth needs K values");
    }
    if (sigma && !(*sigma >= 0.0)) fail("sigma", "must be nonnegative");
    if (costs.empty()) fail("costs", "must list at least one cost");
    if (b_grid.empty()) fail("b_grid", "must not be empty");
    for (double b : b_grid) {
        if (!(b > 0.0)) fail("b_grid", "values must be positive");
    }
    if (n_sequences < 1) fail("n_sequences", "must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta", "must lie in (0,1)");
    if (stride < 1) fail("stride", "must be at least 1");
    if (!(tol > 0.0)) fail("tol", "must be positive");
    for (const auto& [t1, t2] : sigma_pairs) {
        if (t2 <= t1) fail("sigma_pairs", "each pair needs t1 < t2");
    }
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    const char* mode_name = mode == BeliefMode::Uniform ? "uniform"
                            : mode == BeliefMode::SinglePeaked ? "single_peaked"
                                                               : "explicit";
    os << "K = " << num_securities << '\n'
       << "N = " << num_traders << '\n'
       << "risk_aversion = " << join(risk_aversions, format_real) << '\n'
       << "ground_truth = " << mode_name << '\n'
       << "nu = " << format_real(nu) << '\n'
       << "theta = " << join(theta, format_real) << '\n'
       << "sigma = " << (sigma ? format_real(*sigma) : std::string("default")) << '\n'
       << "belief_seed = " << belief_seed << '\n'
       << "costs = " << join(costs, [](CostKind k) { return std::string(to_string(k)); }) << '\n'
       << "b_grid = " << join(b_grid, format_real) << '\n'
       << "dynamics = " << to_string(dynamics) << '\n'
       << "trades = " << trades << '\n'
       << "n_sequences = " << n_sequences << '\n'
       << "sequence_seed_base = " << sequence_seed_base << '\n'
       << "delta = " << format_real(delta) << '\n'
       << "snapshots = " << join(snapshots, [](std::size_t t) { return std::to_string(t); }) << '\n'
       << "sigma_pairs = "
       << join(sigma_pairs, [](const auto& p) { return std::to_string(p.first) + ":" + std::to_string(p.second); })
       << '\n'
       << "stride = " << stride << '\n'
       << "tol = " << format_real(tol) << '\n';
    return os.str();
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const FieldError f(line_no, key);
        if (value.empty()) f.fail("missing value");

        if (key == "K") {
            cfg.num_securities = static_cast<Eigen::Index>(f.unsigned_int(value));
        } else if (key == "N") {
            cfg.num_traders = static_cast<Eigen::Index>(f.unsigned_int(value));
        } else if (key == "risk_aversion" || key == "risk_aversions") {
            cfg.risk_aversions = f.reals(value);
        } else if (key == "ground_truth") {
            if (value == "uniform") {
                cfg.mode = BeliefMode::Uniform;
            } else if (value == "single_peaked") {
                cfg.mode = BeliefMode::SinglePeaked;
            } else if (value == "explicit") {
                cfg.mode = BeliefMode::Explicit;
            } else {
                f.fail("expected uniform, single_peaked or explicit");
            }
        } else if (key == "nu") {
            cfg.nu = f.real(value);
        } else if (key == "theta") {
            cfg.theta = f.reals(value);
        } else if (key == "sigma") {
            cfg.sigma = f.real(value);
        } else if (key == "belief_seed") {
            cfg.belief_seed = f.unsigned_int(value);
        } else if (key == "costs" || key == "cost") {
            cfg.costs.clear();
            for (const auto& tok : split_list(value)) {
                try {
                    cfg.costs.push_back(parse_cost_kind(tok));
                } catch (const PreconditionViolation&) {
                    f.fail("unknown cost '" + tok + "'");
                }
            }
        } else if (key == "b_grid" || key == "b") {
            cfg.b_grid = f.reals(value);
        } else if (key == "dynamics") {
            try {
                cfg.dynamics = parse_dynamics_kind(value);
            } catch (const PreconditionViolation&) {
                f.fail("expected ASD or SSD");
            }
        } else if (key == "trades") {
            cfg.trades = f.unsigned_int(value);
        } else if (key == "n_sequences") {
            cfg.n_sequences = f.unsigned_int(value);
        } else if (key == "sequence_seed_base") {
            cfg.sequence_seed_base = f.unsigned_int(value);
        } else if (key == "output") {
            cfg.output = value;
        } else if (key == "delta") {
            cfg.delta = f.real(value);
        } else if (key == "snapshots") {
            cfg.snapshots.clear();
            for (const auto& tok : split_list(value)) cfg.snapshots.push_back(f.unsigned_int(tok));
        } else if (key == "sigma_pairs") {
            cfg.sigma_pairs.clear();
            for (const auto& tok : split_list(value)) {
                const auto colon = tok.find(':');
                if (colon == std::string::npos) f.fail("pairs are written t1:t2");
                cfg.sigma_pairs.emplace_back(f.unsigned_int(trim(tok.substr(0, colon))),
                                             f.unsigned_int(trim(tok.substr(colon + 1))));
            }
        } else if (key == "stride") {
            cfg.stride = f.unsigned_int(value);
        } else if (key == "tol") {
            cfg.tol = f.real(value);
        } else {
            f.fail("unknown key");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace pmerr
