#ifndef DRMCMC_SAMPLER_HPP
#define DRMCMC_SAMPLER_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "dr_engine.hpp"
#include "point.hpp"
#include "proposal.hpp"
#include "rng.hpp"
#include "targets.hpp"

namespace drmcmc {

enum class ChainMode {
    baseline_rare_jump,      // A: ordinary MH, big-jump proposal with prob p_bj
    baseline_frequent_jump,  // B: same, larger p_bj
    delayed_rejection        // C: DR excursion with prob p_dr, else ordinary MH
};

struct ChainConfig {
    TargetSpec target;
    ProposalSpec spec;                // big-jump / small-step pair per dimension
    std::vector<double> base_widths;  // per-dimension sigma for ordinary MH steps
    double p_dr = 0.0;
    double p_bj = 0.0;
    int n_dr = 1;
    long n_iterations = 1;
    std::uint64_t seed = 0;
    ChainMode mode = ChainMode::delayed_rejection;
    std::optional<Point> initial;     // else drawn uniformly from [init_lo, init_hi]
    Point init_lo, init_hi;

    void validate() const {
        const std::size_t d = target.dim();
        spec.validate();
        if (spec.dims.size() != d)
            throw std::invalid_argument("ChainConfig: proposal/target dimension mismatch");
        if (base_widths.size() != d)
            throw std::invalid_argument("ChainConfig: base_widths dimension mismatch");
        for (double w : base_widths)
            if (!(w > 0.0)) throw std::invalid_argument("ChainConfig: base width must be > 0");
        if (!(p_dr >= 0.0 && p_dr <= 1.0) || !(p_bj >= 0.0 && p_bj <= 1.0))
            throw std::invalid_argument("ChainConfig: p_dr, p_bj must lie in [0, 1]");
        if (n_dr < 1 || n_iterations < 1)
            throw std::invalid_argument("ChainConfig: n_dr and n_iterations must be >= 1");
        if (initial) {
            check_dims(*initial, d, "ChainConfig: initial");
        } else {
            if (init_lo.size() != d || init_hi.size() != d)
                throw std::invalid_argument("ChainConfig: init box dimension mismatch");
            for (std::size_t i = 0; i < d; ++i)
                if (!(init_lo[i] < init_hi[i]))
                    throw std::invalid_argument("ChainConfig: init box must have lo < hi");
        }
    }
};

struct IterationRecord {
    bool accepted = false;
    std::optional<int> dr_stage;  // set iff the iteration ran a DR excursion and accepted
    int target_evals = 0;
};

struct Chain {
    std::vector<Point> states;  // n_iterations + 1 entries, initial state first
    std::vector<IterationRecord> records;
    long total_target_evals = 0;
};

// One Metropolis-Hastings update. The proposal-density ratio is included even
// for the symmetric proposals used here, so asymmetric kernels remain correct.
template <class LogTarget, class SampleFn, class LogqFn>
bool mh_step(Rng& rng, Point& current, double& log_pi_current, LogTarget&& log_target,
             SampleFn&& sample, LogqFn&& logq) {
    Point prop = sample(rng, current);
    double lpi = log_target(prop);
    double log_alpha = lpi - log_pi_current + logq(prop, current) - logq(current, prop);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (log_alpha >= 0.0 || unif(rng) < std::exp(log_alpha)) {
        current = std::move(prop);
        log_pi_current = lpi;
        return true;
    }
    return false;
}

namespace detail {

inline Point gaussian_sample(Rng& rng, const Point& anchor, const std::vector<double>& w) {
    Point x(anchor.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::normal_distribution<double>(anchor[i], w[i])(rng);
    return x;
}

inline double gaussian_logq(const Point& anchor, const Point& x, const std::vector<double>& w) {
    double l = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) l += normal_logpdf(x[i], anchor[i], w[i]);
    return l;
}

// Runs iterations until `stop(chain)` is true; shared by the fixed-iteration
// and fixed-budget drivers.
template <class Stop>
Chain run_chain_until(const ChainConfig& cfg, Stop&& stop) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Point current;
    if (cfg.initial) {
        current = *cfg.initial;
    } else {
        current.resize(cfg.init_lo.size());
        for (std::size_t i = 0; i < current.size(); ++i)
            current[i] = std::uniform_real_distribution<double>(cfg.init_lo[i],
                                                                cfg.init_hi[i])(rng);
    }
    auto log_target = [&](const Point& x) { return log_density(cfg.target, x); };
    double lpi = log_target(current);
    ProposalModel model = make_proposal_model(cfg.spec);

    Chain chain;
    chain.states.push_back(current);

    while (!stop(chain)) {
        IterationRecord rec;
        double gate = unif(rng);
        if (cfg.mode == ChainMode::delayed_rejection && gate < cfg.p_dr) {
            DrOutcome out = dr_step(rng, current, lpi, log_target, model, cfg.n_dr);
            rec.target_evals = out.n_target_evals;
            if (out.accepted_state) {
                current = *out.accepted_state;
                lpi = out.accepted_log_target;
                rec.accepted = true;
                rec.dr_stage = out.accepted_stage;
            }
        } else {
            bool big = cfg.mode != ChainMode::delayed_rejection && gate < cfg.p_bj;
            rec.target_evals = 1;
            if (big) {
                rec.accepted = mh_step(
                    rng, current, lpi, log_target,
                    [&](Rng& r, const Point& a) { return dr_proposal_sample(r, 1, a, cfg.spec); },
                    [&](const Point& a, const Point& x) {
                        return dr_proposal_logpdf(1, a, x, cfg.spec);
                    });
            } else {
                rec.accepted = mh_step(
                    rng, current, lpi, log_target,
                    [&](Rng& r, const Point& a) { return gaussian_sample(r, a, cfg.base_widths); },
                    [&](const Point& a, const Point& x) {
                        return gaussian_logq(a, x, cfg.base_widths);
                    });
            }
        }
        chain.states.push_back(current);
        chain.total_target_evals += rec.target_evals;
        chain.records.push_back(rec);
    }
    return chain;
}

}  // namespace detail

inline Chain run_chain(const ChainConfig& cfg) {
    return detail::run_chain_until(cfg, [&](const Chain& c) {
        return static_cast<long>(c.records.size()) >= cfg.n_iterations;
    });
}

// Runs until the target-evaluation budget is met or exceeded (n_iterations is
// ignored); used for equal-cost comparisons across modes.
inline Chain run_chain_budget(const ChainConfig& cfg, long max_target_evals) {
    if (max_target_evals < 1)
        throw std::invalid_argument("run_chain_budget: budget must be >= 1");
    return detail::run_chain_until(
        cfg, [&](const Chain& c) { return c.total_target_evals >= max_target_evals; });
}

}  // namespace drmcmc

#endif
