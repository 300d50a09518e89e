#ifndef DRMCMC_CONFIG_HPP
#define DRMCMC_CONFIG_HPP

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chain_io.hpp"
#include "sampler.hpp"

namespace drmcmc {

// Config schema violation carrying the offending keys for machine-readable
// error output.
struct ConfigError : std::runtime_error {
    std::vector<std::string> keys;
    ConfigError(const std::string& msg, std::vector<std::string> offending = {})
        : std::runtime_error(msg), keys(std::move(offending)) {}
};

struct ExperimentConfig {
    ChainConfig chain;
    std::string out_chain = "chain.csv";
    std::string out_summary = "summary.json";
    nlohmann::json raw;  // canonical parsed form, for hashing
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
    std::vector<std::string> bad;
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) bad.push_back(where + "." + it.key());
    if (!bad.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : bad) msg += " " + k;
        throw ConfigError(msg, bad);
    }
}

template <class T>
T require(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key))
        throw ConfigError("missing config key " + where + "." + key, {where + "." + key});
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for " + where + "." + key + ": " + e.what(),
                          {where + "." + key});
    }
}

template <class T>
T get_or(const nlohmann::json& obj, const std::string& key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    return require<T>(obj, key, where);
}

inline TargetSpec parse_target(const nlohmann::json& t) {
    std::string type = require<std::string>(t, "type", "target");
    TargetSpec spec;
    if (type == "gaussian_mixture") {
        check_keys(t, {"type", "weights", "centers", "widths"}, "target");
        GaussianMixture1D g;
        g.weights = require<std::vector<double>>(t, "weights", "target");
        g.centers = require<std::vector<double>>(t, "centers", "target");
        g.widths = require<std::vector<double>>(t, "widths", "target");
        spec.variant = g;
    } else if (type == "island_comb") {
        check_keys(t,
                   {"type", "n_modes", "spacing", "mode_width", "weight_decay", "dims",
                    "nuisance_width"},
                   "target");
        IslandComb c;
        c.n_modes = require<int>(t, "n_modes", "target");
        c.spacing = require<double>(t, "spacing", "target");
        c.mode_width = require<double>(t, "mode_width", "target");
        c.weight_decay = get_or<double>(t, "weight_decay", "target", 0.5);
        c.dims = get_or<int>(t, "dims", "target", 1);
        c.nuisance_width = get_or<double>(t, "nuisance_width", "target", 1.0);
        spec.variant = c;
    } else if (type == "discrete_lattice") {
        check_keys(t, {"type", "points", "probs"}, "target");
        DiscreteLattice l;
        l.points = require<std::vector<double>>(t, "points", "target");
        l.probs = require<std::vector<double>>(t, "probs", "target");
        spec.variant = l;
    } else {
        throw ConfigError("unknown target.type '" + type + "'", {"target.type"});
    }
    spec.validate();
    return spec;
}

inline ProposalSpec parse_proposal_dims(const nlohmann::json& dims) {
    if (!dims.is_array() || dims.empty())
        throw ConfigError("proposal.dims must be a non-empty array", {"proposal.dims"});
    ProposalSpec spec;
    for (const auto& d : dims) {
        std::string type = require<std::string>(d, "type", "proposal.dims[]");
        if (type == "three_gaussian") {
            check_keys(d, {"type", "sigma1", "sigma2", "mu", "na", "nb"}, "proposal.dims[]");
            spec.dims.push_back(ThreeGaussianPair(
                require<double>(d, "sigma1", "proposal.dims[]"),
                require<double>(d, "sigma2", "proposal.dims[]"),
                require<double>(d, "mu", "proposal.dims[]"),
                require<double>(d, "na", "proposal.dims[]"),
                require<double>(d, "nb", "proposal.dims[]")));
        } else if (type == "gaussian") {
            check_keys(d, {"type", "sigma"}, "proposal.dims[]");
            spec.dims.push_back(SingleGaussian{require<double>(d, "sigma", "proposal.dims[]")});
        } else {
            throw ConfigError("unknown proposal dim type '" + type + "'",
                              {"proposal.dims[].type"});
        }
    }
    spec.validate();
    return spec;
}

inline ChainMode parse_mode(const std::string& m) {
    if (m == "baseline_rare_jump" || m == "A" || m == "a") return ChainMode::baseline_rare_jump;
    if (m == "baseline_frequent_jump" || m == "B" || m == "b")
        return ChainMode::baseline_frequent_jump;
    if (m == "delayed_rejection" || m == "C" || m == "c") return ChainMode::delayed_rejection;
    throw ConfigError("unknown run.mode '" + m + "'", {"run.mode"});
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::get_or;
    using detail::require;

    check_keys(j, {"schema_version", "target", "proposal", "run", "output"}, "");
    int sv = require<int>(j, "schema_version", "");
    if (sv != 1) throw ConfigError("unsupported schema_version", {"schema_version"});

    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.chain.target = detail::parse_target(require<nlohmann::json>(j, "target", ""));

    nlohmann::json p = require<nlohmann::json>(j, "proposal", "");
    check_keys(p, {"dims", "base_widths"}, "proposal");
    cfg.chain.spec = detail::parse_proposal_dims(require<nlohmann::json>(p, "dims", "proposal"));
    cfg.chain.base_widths = require<std::vector<double>>(p, "base_widths", "proposal");

    nlohmann::json r = require<nlohmann::json>(j, "run", "");
    check_keys(r,
               {"mode", "n_iterations", "p_dr", "p_bj", "n_dr", "seed", "initial", "init_lo",
                "init_hi"},
               "run");
    cfg.chain.mode = detail::parse_mode(require<std::string>(r, "mode", "run"));
    cfg.chain.n_iterations = require<long>(r, "n_iterations", "run");
    cfg.chain.p_dr = get_or<double>(r, "p_dr", "run", 0.0);
    cfg.chain.p_bj = get_or<double>(r, "p_bj", "run", 0.0);
    cfg.chain.n_dr = get_or<int>(r, "n_dr", "run", 1);
    cfg.chain.seed = require<std::uint64_t>(r, "seed", "run");
    if (r.contains("initial"))
        cfg.chain.initial = require<std::vector<double>>(r, "initial", "run");
    if (r.contains("init_lo")) cfg.chain.init_lo = require<std::vector<double>>(r, "init_lo", "run");
    if (r.contains("init_hi")) cfg.chain.init_hi = require<std::vector<double>>(r, "init_hi", "run");

    if (j.contains("output")) {
        nlohmann::json o = j.at("output");
        check_keys(o, {"chain_csv", "summary_json"}, "output");
        cfg.out_chain = get_or<std::string>(o, "chain_csv", "output", cfg.out_chain);
        cfg.out_summary = get_or<std::string>(o, "summary_json", "output", cfg.out_summary);
    }

    cfg.chain.validate();
    return cfg;
}

// Content hash of the canonical (key-sorted) JSON dump; recorded in outputs.
inline std::uint64_t config_hash(const nlohmann::json& j) { return fnv1a(j.dump()); }

}  // namespace drmcmc

#endif
