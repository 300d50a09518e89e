#ifndef DRMCMC_CLI_HPP
#define DRMCMC_CLI_HPP

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibration.hpp"
#include "chain_io.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "sampler.hpp"

namespace drmcmc {
namespace cli {

// Exit codes: 0 ok, 1 validation failure, 2 runtime failure.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kRuntimeError = 2;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;  // overrides config
    std::string out_dir = ".";
    int threads = 1;
    std::string cache_dir;  // empty = no cache
};

namespace detail {

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    atomic_write(path, j.dump(2) + "\n");
}

inline void report_config_error(const ConfigError& e) {
    nlohmann::json err{{"error", e.what()}, {"keys", e.keys}};
    std::cerr << err.dump() << "\n";
}

// File-backed cell cache: one JSON file per cell, named by the key hash.
inline CellCache file_cache(const std::string& dir) {
    std::filesystem::create_directories(dir);
    CellCache c;
    c.load = [dir](const std::string& key) -> std::optional<McEstimate> {
        std::filesystem::path p =
            std::filesystem::path(dir) / (std::to_string(fnv1a(key)) + ".json");
        std::ifstream in(p);
        if (!in) return std::nullopt;
        nlohmann::json j;
        in >> j;
        if (j.value("key", "") != key) return std::nullopt;  // hash collision
        return McEstimate{j.at("mean").get<double>(), j.at("se").get<double>(),
                          j.at("n").get<long>()};
    };
    c.store = [dir](const std::string& key, const McEstimate& e) {
        std::filesystem::path p =
            std::filesystem::path(dir) / (std::to_string(fnv1a(key)) + ".json");
        nlohmann::json j{{"key", key}, {"mean", e.mean}, {"se", e.se}, {"n", e.n}};
        atomic_write(p, j.dump());
    };
    return c;
}

inline nlohmann::json summarize(const Chain& chain, const ExperimentConfig& cfg) {
    long dr_iters = 0, dr_accepted = 0, mh_iters = 0, mh_accepted = 0;
    for (const auto& r : chain.records) {
        bool is_dr = r.target_evals > 1 || r.dr_stage.has_value();
        if (is_dr) {
            ++dr_iters;
            if (r.accepted) ++dr_accepted;
        } else {
            ++mh_iters;
            if (r.accepted) ++mh_accepted;
        }
    }
    nlohmann::json s;
    s["schema_version"] = 1;
    s["config_hash"] = config_hash(cfg.raw);
    s["seed"] = cfg.chain.seed;
    s["n_iterations"] = chain.records.size();
    s["total_target_evals"] = chain.total_target_evals;
    s["dr_iterations"] = dr_iters;
    s["dr_acceptance_rate"] = dr_iters ? double(dr_accepted) / double(dr_iters) : 0.0;
    s["mh_iterations"] = mh_iters;
    s["mh_acceptance_rate"] = mh_iters ? double(mh_accepted) / double(mh_iters) : 0.0;
    return s;
}

inline std::string grid_to_csv(const LossGrid& g) {
    std::ostringstream out;
    out << "# drmcmc-grid v1 kind=" << g.kind << " mc_samples=" << g.mc_samples << "\n";
    for (const auto& a : g.axes) out << a.name << ",";
    out << "value,stderr\n";
    std::vector<std::size_t> idx(g.axes.size(), 0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = g.axes.size(); i-- > 0;) {
            idx[i] = rem % g.axes[i].values.size();
            rem /= g.axes[i].values.size();
        }
        for (std::size_t i = 0; i < g.axes.size(); ++i)
            out << format_double(g.axes[i].values[idx[i]]) << ",";
        out << format_double(g.values[flat]) << ","
            << format_double(g.errors.empty() ? 0.0 : g.errors[flat]) << "\n";
    }
    return out.str();
}

}  // namespace detail

inline int cmd_sample(const Options& opts) {
    try {
        nlohmann::json j = detail::load_json(opts.config_path);
        ExperimentConfig cfg = parse_experiment_config(j);
        if (opts.seed) cfg.chain.seed = *opts.seed;
        Chain chain = run_chain(cfg.chain);
        std::filesystem::path out(opts.out_dir);
        std::filesystem::create_directories(out);
        write_chain_csv(out / cfg.out_chain, chain);
        detail::write_json(out / cfg.out_summary, detail::summarize(chain, cfg));
        std::cout << "wrote " << (out / cfg.out_chain).string() << " ("
                  << chain.records.size() << " iterations, " << chain.total_target_evals
                  << " target evals)\n";
        return kOk;
    } catch (const ConfigError& e) {
        detail::report_config_error(e);
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

// Calibration sweep config lives under a top-level "calibrate" object:
// { "calibrate": { "kind": "ap"|"cpe"|"validity", "s1": [...], "s2": [...],
//   "na": [...], "nb": [...], "n_dr": [...], "n_samples": N, "seed": S,
//   "out": "grid.csv" } }
inline int cmd_calibrate(const Options& opts) {
    try {
        nlohmann::json root = detail::load_json(opts.config_path);
        nlohmann::json j = root.contains("calibrate") ? root.at("calibrate") : root;
        drmcmc::detail::check_keys(
            j, {"kind", "s1", "s2", "na", "nb", "n_dr", "n_samples", "seed", "out"},
            "calibrate");
        std::string kind = drmcmc::detail::require<std::string>(j, "kind", "calibrate");
        auto s1 = drmcmc::detail::get_or<std::vector<double>>(j, "s1", "calibrate",
                                                              default_sigma_ladder());
        auto s2 = drmcmc::detail::get_or<std::vector<double>>(j, "s2", "calibrate",
                                                              default_sigma_ladder());
        long n_samples = drmcmc::detail::require<long>(j, "n_samples", "calibrate");
        std::uint64_t seed = drmcmc::detail::get_or<std::uint64_t>(j, "seed", "calibrate", 1);
        if (opts.seed) seed = *opts.seed;
        std::string out_name =
            drmcmc::detail::get_or<std::string>(j, "out", "calibrate", "grid.csv");

        CellCache cache;
        const CellCache* cache_ptr = nullptr;
        if (!opts.cache_dir.empty()) {
            cache = detail::file_cache(opts.cache_dir);
            cache_ptr = &cache;
        }

        LossGrid g;
        if (kind == "ap") {
            auto na = drmcmc::detail::require<std::vector<double>>(j, "na", "calibrate");
            auto nb = drmcmc::detail::require<std::vector<double>>(j, "nb", "calibrate");
            g = ap_loss_grid(s1, s2, na, nb, n_samples, seed, opts.threads, cache_ptr);
        } else if (kind == "cpe") {
            auto nb = drmcmc::detail::require<std::vector<double>>(j, "nb", "calibrate");
            auto ndr = drmcmc::detail::require<std::vector<int>>(j, "n_dr", "calibrate");
            g = cpe_loss_grid(s1, s2, nb, ndr, n_samples, seed, opts.threads, cache_ptr);
        } else if (kind == "validity") {
            auto na = drmcmc::detail::require<std::vector<double>>(j, "na", "calibrate");
            auto nb = drmcmc::detail::require<std::vector<double>>(j, "nb", "calibrate");
            g = validity_grid(s1, s2, na, nb, n_samples, seed, opts.threads, cache_ptr);
        } else {
            throw ConfigError("unknown calibrate.kind '" + kind + "'", {"calibrate.kind"});
        }
        std::filesystem::path out(opts.out_dir);
        std::filesystem::create_directories(out);
        atomic_write(out / out_name, detail::grid_to_csv(g));
        std::cout << "wrote " << (out / out_name).string() << " (" << g.size() << " cells, "
                  << g.cells_computed << " computed)\n";
        return kOk;
    } catch (const ConfigError& e) {
        detail::report_config_error(e);
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

inline int cmd_diagnose(const std::string& chain_path, long discard, const Options& opts,
                        const std::string& out_name = "diagnostics.json") {
    try {
        Chain chain = read_chain_csv(chain_path);
        if (discard < 0 || discard >= static_cast<long>(chain.states.size()))
            throw std::invalid_argument("diagnose: discard must lie in [0, chain length)");
        const std::size_t d = chain.states[0].size();
        const std::size_t n = chain.states.size() - discard;
        if (n < 10) throw std::invalid_argument("diagnose: too few samples after discard");

        nlohmann::json out;
        out["schema_version"] = 1;
        out["discard"] = discard;
        out["n_samples"] = n;
        out["dimensions"] = nlohmann::json::array();
        for (std::size_t dim = 0; dim < d; ++dim) {
            std::vector<double> series(n);
            for (std::size_t i = 0; i < n; ++i) series[i] = chain.states[discard + i][dim];
            int max_lag = static_cast<int>(std::min<std::size_t>(n / 3, 2000));
            AcfResult acf = autocorrelation(series, max_lag);
            nlohmann::json dj;
            dj["dim"] = dim;
            dj["c0"] = acf.c0;
            dj["c0_valid"] = acf.c0_valid;
            if (acf.c0_valid) {
                integrated_time(acf);
                fit_tau_exp(acf);
                dj["tau_int"] = acf.tau_int;
                dj["window"] = acf.window;
                dj["window_converged"] = acf.window_converged;
                dj["variance_of_mean"] = estimate_variance(n, acf);
                if (acf.tau_exp) dj["tau_exp"] = *acf.tau_exp;
            }
            out["dimensions"].push_back(dj);
        }
        std::filesystem::path dir(opts.out_dir);
        std::filesystem::create_directories(dir);
        detail::write_json(dir / out_name, out);
        std::cout << "wrote " << (dir / out_name).string() << "\n";
        return kOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

// Equal-budget three-mode comparison. Extra config section:
// { "compare": { "budget": N, "p_bj_a": ..., "p_bj_b": ..., "p_dr": ...,
//   "n_dr": ..., "seeds": [...], "discard": D, "out": "compare.json" } }
// The base experiment config supplies target / proposal / base widths /
// initial state; mode-specific fields come from this section.
inline int cmd_compare(const Options& opts) {
    try {
        nlohmann::json root = detail::load_json(opts.config_path);
        ExperimentConfig base = parse_experiment_config([&] {
            nlohmann::json j = root;
            j.erase("compare");
            return j;
        }());
        if (!root.contains("compare"))
            throw ConfigError("missing compare section", {"compare"});
        nlohmann::json c = root.at("compare");
        drmcmc::detail::check_keys(
            c, {"budget", "p_bj_a", "p_bj_b", "p_dr", "n_dr", "seeds", "discard", "out"},
            "compare");
        long budget = drmcmc::detail::require<long>(c, "budget", "compare");
        double p_bj_a = drmcmc::detail::get_or<double>(c, "p_bj_a", "compare", 1e-3);
        double p_bj_b = drmcmc::detail::get_or<double>(c, "p_bj_b", "compare", 2.0 / 3.0);
        double p_dr = drmcmc::detail::get_or<double>(c, "p_dr", "compare", 1e-3);
        int n_dr = drmcmc::detail::get_or<int>(c, "n_dr", "compare", 2000);
        auto seeds = drmcmc::detail::require<std::vector<std::uint64_t>>(c, "seeds", "compare");
        long discard = drmcmc::detail::get_or<long>(c, "discard", "compare", 0);
        std::string out_name =
            drmcmc::detail::get_or<std::string>(c, "out", "compare", "compare.json");
        if (seeds.empty()) throw ConfigError("compare.seeds must be non-empty", {"compare.seeds"});

        double spacing = 1.0;
        if (const auto* ic = std::get_if<IslandComb>(&base.chain.target.variant))
            spacing = ic->spacing;

        nlohmann::json table = nlohmann::json::array();
        for (std::uint64_t seed : seeds) {
            for (auto [name, mode, pbj, pdr] :
                 {std::tuple{"A", ChainMode::baseline_rare_jump, p_bj_a, 0.0},
                  std::tuple{"B", ChainMode::baseline_frequent_jump, p_bj_b, 0.0},
                  std::tuple{"C", ChainMode::delayed_rejection, 0.0, p_dr}}) {
                ChainConfig cfg = base.chain;
                cfg.mode = mode;
                cfg.p_bj = pbj;
                cfg.p_dr = pdr;
                cfg.n_dr = n_dr;
                cfg.seed = seed;
                Chain chain = run_chain_budget(cfg, budget);
                nlohmann::json row;
                row["mode"] = name;
                row["seed"] = seed;
                row["iterations"] = chain.records.size();
                row["target_evals"] = chain.total_target_evals;

                long cut = std::min<long>(discard, static_cast<long>(chain.states.size()) - 10);
                cut = std::max<long>(cut, 0);
                std::vector<double> series(chain.states.size() - cut);
                for (std::size_t i = 0; i < series.size(); ++i)
                    series[i] = chain.states[cut + i][0];
                int max_lag = static_cast<int>(std::min<std::size_t>(series.size() / 3, 5000));
                AcfResult acf = autocorrelation(series, max_lag);
                if (acf.c0_valid) {
                    integrated_time(acf);
                    row["tau_int"] = acf.tau_int;
                    row["window_converged"] = acf.window_converged;
                }
                long transitions = 0;
                for (std::size_t i = cut + 1; i < chain.states.size(); ++i)
                    if (std::abs(chain.states[i][0] - chain.states[i - 1][0]) > spacing / 2.0)
                        ++transitions;
                row["mode_transitions"] = transitions;
                table.push_back(row);
            }
        }
        nlohmann::json out{{"schema_version", 1},
                           {"budget", budget},
                           {"config_hash", config_hash(root)},
                           {"rows", table}};
        std::filesystem::path dir(opts.out_dir);
        std::filesystem::create_directories(dir);
        detail::write_json(dir / out_name, out);
        std::cout << "wrote " << (dir / out_name).string() << "\n";
        return kOk;
    } catch (const ConfigError& e) {
        detail::report_config_error(e);
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

}  // namespace cli
}  // namespace drmcmc

#endif
