#ifndef DRMCMC_ORACLE_HPP
#define DRMCMC_ORACLE_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dr_engine.hpp"
#include "logspace.hpp"
#include "point.hpp"

namespace drmcmc {
namespace oracle {

// From-scratch D of a DR path (x_0, x_1, ..., x_n): the product of the target
// at the start point, every generation density along the path, and every
// rejection complement of the prefix sub-chains. Exponential in path length by
// construction; intended only as an independent cross-check of AlphaTable.
template <class LogTarget>
ZeroAwareLog direct_denominator(const std::vector<Point>& path, LogTarget&& log_target,
                                const ProposalModel& model);

template <class LogTarget>
AlphaValue direct_alpha(const std::vector<Point>& path, LogTarget&& log_target,
                        const ProposalModel& model) {
    if (path.size() < 2) throw std::invalid_argument("direct_alpha: path too short");
    if (path.size() > 7)
        throw std::invalid_argument("direct_alpha: path length capped at 7 (exponential cost)");
    ZeroAwareLog den = direct_denominator(path, log_target, model);
    std::vector<Point> rev(path.rbegin(), path.rend());
    ZeroAwareLog num = direct_denominator(rev, log_target, model);
    return acceptance_alpha(num, den);
}

template <class LogTarget>
ZeroAwareLog direct_denominator(const std::vector<Point>& path, LogTarget&& log_target,
                                const ProposalModel& model) {
    const std::size_t n = path.size() - 1;  // number of proposed states
    ZeroAwareLog d = ZeroAwareLog::from_log(log_target(path[0]));
    for (std::size_t m = 1; m <= n; ++m) {
        Point anchor;
        if (m == 1) {
            anchor = path[0];
        } else {
            Point mean(path[0].size(), 0.0);
            for (std::size_t i = 1; i < m; ++i)
                for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += path[i][c];
            for (double& v : mean) v /= static_cast<double>(m - 1);
            anchor = model.snap(mean);
        }
        d = d * ZeroAwareLog::from_log(model.logq(m == 1, anchor, path[m]));
    }
    for (std::size_t m = 1; m < n; ++m) {
        std::vector<Point> prefix(path.begin(), path.begin() + m + 1);
        AlphaValue a = direct_alpha(prefix, log_target, model);
        d = d * one_minus_alpha(a);
    }
    return d;
}

// Explicit transition matrix of one DR update restricted to a finite state
// space, built by enumerating every excursion path. Proposal densities are
// renormalized over the lattice per anchor so each stage is a proper discrete
// kernel; rejected probability mass at every truncation goes to staying put.
struct DiscreteKernel {
    std::vector<Point> points;
    std::vector<double> pi;              // normalized target mass
    std::vector<std::vector<double>> P;  // row-stochastic transition matrix
};

namespace detail {

struct LatticeProposal {
    const std::vector<Point>* points;
    const ProposalModel* model;

    std::vector<double> row(bool first, const Point& anchor) const {
        std::vector<double> w(points->size());
        double tot = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = std::exp(model->logq(first, anchor, (*points)[i]));
            tot += w[i];
        }
        if (!(tot > 0.0))
            throw std::invalid_argument("discrete kernel: proposal mass vanishes on lattice");
        for (double& v : w) v /= tot;
        return w;
    }
};

}  // namespace detail

inline Point snap_to_lattice(const Point& mean, const std::vector<Point>& points) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < mean.size(); ++c) {
            double t = mean[c] - points[i][c];
            d += t * t;
        }
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return points[best];
}

inline DiscreteKernel build_discrete_kernel(const std::vector<Point>& points,
                                            const std::vector<double>& target_mass,
                                            const ProposalModel& base_model, int n_dr) {
    if (points.size() != target_mass.size() || points.empty())
        throw std::invalid_argument("build_discrete_kernel: size mismatch");
    if (points.size() > 31 || n_dr > 3)
        throw std::invalid_argument("build_discrete_kernel: capped at 31 points, n_dr <= 3");

    DiscreteKernel k;
    k.points = points;
    double tot = 0.0;
    for (double m : target_mass) {
        if (!(m >= 0.0)) throw std::invalid_argument("build_discrete_kernel: negative mass");
        tot += m;
    }
    k.pi.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) k.pi[i] = target_mass[i] / tot;

    // Lattice-renormalized proposal model. Densities are normalized over the
    // point set for the given anchor; means snap to the nearest lattice point
    // so logq stays a pure function of (anchor, x) and reversibility holds
    // exactly on the lattice. Renormalization breaks anchor/point symmetry.
    detail::LatticeProposal lat{&points, &base_model};
    ProposalModel model;
    model.symmetric = false;
    model.snap = [points](const Point& m) { return snap_to_lattice(m, points); };
    model.logq = [lat](bool first, const Point& anchor, const Point& x) {
        std::vector<double> w = lat.row(first, anchor);
        for (std::size_t i = 0; i < lat.points->size(); ++i)
            if ((*lat.points)[i] == x) return std::log(w[i]);
        throw std::invalid_argument("lattice proposal queried off-lattice");
    };
    model.sample = [](Rng&, bool, const Point&) -> Point {
        throw std::logic_error("lattice kernel enumeration does not sample");
    };

    auto log_target = [&](const Point& x) {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i] == x) return std::log(k.pi[i]);
        throw std::invalid_argument("lattice target queried off-lattice");
    };

    const std::size_t n = points.size();
    k.P.assign(n, std::vector<double>(n, 0.0));

    for (std::size_t s = 0; s < n; ++s) {
        // Depth-first enumeration over excursion paths from points[s].
        std::function<void(std::vector<Point>&, double)> walk =
            [&](std::vector<Point>& path, double prob_reach) {
                const std::size_t stage = path.size();  // next stage number
                Point anchor;
                if (stage == 1) {
                    anchor = path[0];
                } else {
                    Point mean(path[0].size(), 0.0);
                    for (std::size_t i = 1; i < stage; ++i)
                        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += path[i][c];
                    for (double& v : mean) v /= static_cast<double>(stage - 1);
                    anchor = model.snap(mean);
                }
                std::vector<double> gen = lat.row(stage == 1, anchor);
                for (std::size_t j = 0; j < n; ++j) {
                    if (gen[j] == 0.0) continue;
                    path.push_back(points[j]);
                    AlphaValue a = direct_alpha(path, log_target, model);
                    double p_here = prob_reach * gen[j];
                    k.P[s][j] += p_here * a.alpha;
                    double p_rej = p_here * (1.0 - a.alpha);
                    if (p_rej > 0.0) {
                        if (static_cast<int>(stage) < n_dr)
                            walk(path, p_rej);
                        else
                            k.P[s][s] += p_rej;
                    }
                    path.pop_back();
                }
            };
        std::vector<Point> path{points[s]};
        walk(path, 1.0);
    }
    return k;
}

// max_i |(pi P)_i - pi_i|
inline double stationarity_residual(const DiscreteKernel& k) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k.points.size(); ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < k.points.size(); ++i) v += k.pi[i] * k.P[i][j];
        worst = std::max(worst, std::abs(v - k.pi[j]));
    }
    return worst;
}

// max_{i != j} |pi_i P_ij - pi_j P_ji|
inline double detailed_balance_residual(const DiscreteKernel& k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < k.points.size(); ++i)
        for (std::size_t j = i + 1; j < k.points.size(); ++j)
            worst = std::max(worst, std::abs(k.pi[i] * k.P[i][j] - k.pi[j] * k.P[j][i]));
    return worst;
}

}  // namespace oracle
}  // namespace drmcmc

#endif
