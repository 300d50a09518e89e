#ifndef DRMCMC_DR_ENGINE_HPP
#define DRMCMC_DR_ENGINE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "logspace.hpp"
#include "point.hpp"
#include "proposal.hpp"
#include "rng.hpp"

namespace drmcmc {

// Proposal kernel abstraction used by the DR engine and the brute-force
// oracle. `first_stage` selects the big-jump kernel (q_a); later stages use
// the small-step kernel (q_b) anchored at a running mean. `snap` maps a raw
// mean onto the anchor actually used (identity for continuous problems,
// nearest lattice point for discrete ones). `symmetric` declares
// logq(a, x) == logq(x, a) for single-state anchors, enabling cache reuse.
struct ProposalModel {
    std::function<double(bool first_stage, const Point& anchor, const Point& x)> logq;
    std::function<Point(Rng& rng, bool first_stage, const Point& anchor)> sample;
    std::function<Point(const Point& mean)> snap = [](const Point& m) { return m; };
    bool symmetric = true;
};

inline ProposalModel make_proposal_model(const ProposalSpec& spec) {
    spec.validate();
    ProposalModel m;
    m.logq = [spec](bool first, const Point& anchor, const Point& x) {
        return dr_proposal_logpdf(first ? 1 : 2, anchor, x, spec);
    };
    m.sample = [spec](Rng& rng, bool first, const Point& anchor) {
        return dr_proposal_sample(rng, first ? 1 : 2, anchor, spec);
    };
    m.symmetric = true;
    return m;
}

struct TableEntry {
    ZeroAwareLog num;       // N of the sub-chain (reverse-order product)
    ZeroAwareLog den;       // D of the sub-chain (forward-order product)
    AlphaValue alpha;       // min(1, N/D)
    AlphaValue alpha_rev;   // min(1, D/N), the reverse-order acceptance
};

// Triangular table of stage acceptance quantities. Row k holds the k
// sub-chain entries ending at the k-th proposed state; entry (k, j) is the
// sub-chain starting at state j-1 (0-based index) and ending at state k. The
// leftmost entry (k, 1) is the true stage-k acceptance probability.
//
// Rows are built right to left: each entry reuses the denominator of the
// entry directly above and the reverse-order quantities of the entries to
// its right, so only the k quantities of the new row are computed per stage.
class AlphaTable {
public:
    AlphaTable(const ProposalModel& model, Point initial, double log_target_initial)
        : model_(&model) {
        states_.push_back(std::move(initial));
        log_pi_.push_back(check_log_target(log_target_initial));
        prefix_.push_back(states_[0]);
    }

    // Appends state beta_k and builds row k; returns the stage-k acceptance.
    AlphaValue extend(Point new_state, double log_target_new) {
        check_dims(new_state, states_[0].size(), "AlphaTable::extend");
        states_.push_back(std::move(new_state));
        log_pi_.push_back(check_log_target(log_target_new));
        push_prefix();

        const std::size_t k = states_.size() - 1;  // stage number
        evals_new_candidate_last_ = 0;
        std::vector<TableEntry> row(k);

        // Rightmost entry: plain Metropolis-Hastings on (beta_{k-1}, beta_k).
        {
            TableEntry& e = row[k - 1];
            double fwd = q_state_anchor(true, k - 1, k);
            double rev = q_state_anchor(true, k, k - 1);
            e.den = ZeroAwareLog::from_log(log_pi_[k - 1]) * ZeroAwareLog::from_log(fwd);
            e.num = ZeroAwareLog::from_log(log_pi_[k]) * ZeroAwareLog::from_log(rev);
            e.alpha = acceptance_alpha(e.num, e.den);
            e.alpha_rev = acceptance_alpha(e.den, e.num);
        }

        for (std::size_t j = k - 1; j >= 1; --j) {
            TableEntry& e = row[j - 1];
            // Forward and reverse sub-chains share the anchor: the mean of
            // states j..k-1 (all interior elements of the slice).
            double fwd, rev;
            if (j == k - 1) {
                fwd = q_state_anchor(false, j, k);
                rev = q_state_anchor(false, j, j - 1);
            } else {
                // Slice-anchored densities are keyed by (j, k-1), so no later
                // row ever asks for them again; evaluate directly instead of
                // growing the cache by O(k^2) dead entries.
                Point anchor = slice_anchor(j, k - 1);
                fwd = q_slice_direct(anchor, k);
                rev = q_slice_direct(anchor, j - 1);
            }
            const TableEntry& above = rows_[k - 2][j - 1];
            const TableEntry& right = row[j];
            e.den = above.den * ZeroAwareLog::from_log(fwd) * one_minus_alpha(above.alpha);
            e.num = right.num * ZeroAwareLog::from_log(rev) * one_minus_alpha(right.alpha_rev);
            e.alpha = acceptance_alpha(e.num, e.den);
            e.alpha_rev = acceptance_alpha(e.den, e.num);
        }

        rows_.push_back(std::move(row));
        return rows_.back().front().alpha;
    }

    std::size_t n_rows() const { return rows_.size(); }
    // 1-based (row, column) addressing matching the construction above.
    const TableEntry& entry(std::size_t row, std::size_t col) const {
        return rows_.at(row - 1).at(col - 1);
    }
    const std::vector<Point>& states() const { return states_; }
    double log_target(std::size_t i) const { return log_pi_.at(i); }

    // Proposal-density evaluations at the newly proposed state during the
    // last extend(): exactly k at stage k (the Fig.-7 efficiency property).
    long evals_new_candidate_last() const { return evals_new_candidate_last_; }
    // All proposal-density evaluations performed so far (cache misses,
    // including reverse-path re-evaluations of earlier states).
    long evals_total() const { return evals_total_; }

private:
    static double check_log_target(double l) {
        if (std::isnan(l) || l == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("AlphaTable: log target must be finite or -inf");
        return l;
    }

    void push_prefix() {
        Point s = prefix_.back();
        const Point& x = states_.back();
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += x[i];
        prefix_.push_back(std::move(s));
    }

    // mean of states [lo, hi] inclusive, snapped by the model.
    Point slice_anchor(std::size_t lo, std::size_t hi) const {
        Point m(states_[0].size());
        double n = static_cast<double>(hi - lo + 1);
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = (prefix_[hi][i] - (lo ? prefix_[lo - 1][i] : 0.0)) / n;
        return model_->snap(m);
    }

    double q_state_anchor(bool first, std::size_t anchor_idx, std::size_t point_idx) {
        std::uint64_t a = anchor_idx, p = point_idx;
        if (model_->symmetric && a > p) std::swap(a, p);
        std::uint64_t key = (first ? 1ULL : 2ULL) << 60 | a << 30 | p;
        return lookup(key, point_idx, [&] {
            return model_->logq(first, states_[anchor_idx], states_[point_idx]);
        });
    }

    double q_slice_direct(const Point& anchor, std::size_t point_idx) {
        double v = model_->logq(false, anchor, states_[point_idx]);
        ++evals_total_;
        if (point_idx == states_.size() - 1) ++evals_new_candidate_last_;
        return v;
    }

    template <class F>
    double lookup(std::uint64_t key, std::size_t point_idx, F&& compute) {
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        double v = compute();
        cache_.emplace(key, v);
        ++evals_total_;
        if (point_idx == states_.size() - 1) ++evals_new_candidate_last_;
        return v;
    }

    const ProposalModel* model_;
    std::vector<Point> states_;
    std::vector<double> log_pi_;
    std::vector<Point> prefix_;  // componentwise prefix sums of states
    std::vector<std::vector<TableEntry>> rows_;
    std::unordered_map<std::uint64_t, double> cache_;
    long evals_total_ = 0;
    long evals_new_candidate_last_ = 0;
};

// N/D of the leftmost entry of `row` under zero-count semantics; the two
// sides of the forward/reverse identity alpha_f / alpha_r = N/D.
inline double forward_reverse_ratio(const AlphaTable& table, std::size_t row) {
    const TableEntry& e = table.entry(row, 1);
    if (e.num.zero_count > e.den.zero_count) return 0.0;
    if (e.den.zero_count > e.num.zero_count)
        return std::numeric_limits<double>::infinity();
    return std::exp(e.num.log_mag - e.den.log_mag);
}

struct DrOutcome {
    std::optional<Point> accepted_state;
    std::optional<int> accepted_stage;
    double accepted_log_target = 0.0;  // valid iff accepted_state
    int n_target_evals = 0;
    long n_proposal_evals = 0;
};

// One full Delayed Rejection excursion of up to n_dr stages. Stage 1 proposes
// a big jump from the current state; stages >= 2 propose small steps anchored
// at the running mean of all excursion elements after the first (rejected
// elements included). RNG order per stage: sample the candidate, build the
// table row, then draw the acceptance uniform.
template <class LogTarget>
DrOutcome dr_step(Rng& rng, const Point& current, double log_target_current,
                  LogTarget&& log_target, const ProposalModel& model, int n_dr) {
    if (n_dr < 1) throw std::invalid_argument("dr_step: n_dr must be >= 1");
    DrOutcome out;
    AlphaTable table(model, current, log_target_current);
    CentralTracker tracker;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (int stage = 1; stage <= n_dr; ++stage) {
        const Point& anchor = (stage == 1) ? current : model.snap(tracker.running_mean);
        Point beta = model.sample(rng, stage == 1, anchor);
        double lpi = log_target(beta);
        ++out.n_target_evals;
        AlphaValue alpha = table.extend(std::move(beta), lpi);
        double u = unif(rng);
        if (alpha.is_one || u < alpha.alpha) {
            out.accepted_state = table.states().back();
            out.accepted_stage = stage;
            out.accepted_log_target = lpi;
            break;
        }
        tracker.push(table.states().back());
    }
    out.n_proposal_evals = table.evals_total();
    return out;
}

}  // namespace drmcmc

#endif
