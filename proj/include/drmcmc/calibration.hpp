#ifndef DRMCMC_CALIBRATION_HPP
#define DRMCMC_CALIBRATION_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "proposal.hpp"
#include "rng.hpp"

namespace drmcmc {

inline constexpr double kSqrt2Pi = 2.5066282746310002;  // sqrt(2*pi)

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    long n = 0;
};

namespace detail {

// Welford accumulator -> (mean, standard error).
struct Accumulator {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    McEstimate estimate() const {
        McEstimate e;
        e.mean = mean;
        e.n = n;
        e.se = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        return e;
    }
};

inline std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double xlog(double w, double arg) { return w == 0.0 ? 0.0 : w * std::log(arg); }

}  // namespace detail

// Expected log proposal-ratio penalty of using a big-jump mixture weight na
// against a small-step weight nb, valid when the mixture modes are well
// separated: (na - nb) * log(((1/na) - 1) / ((1/nb) - 1)). Diverges at the
// weight endpoints.
inline double analytic_ap_loss(double na, double nb) {
    if (!(na > 0.0 && na < 1.0 && nb > 0.0 && nb < 1.0))
        throw std::invalid_argument("analytic_ap_loss: weights must lie strictly in (0,1)");
    return (na - nb) * std::log((1.0 / na - 1.0) / (1.0 / nb - 1.0));
}

// Monte Carlo estimate of the asymmetric-proposal loss: the expected log of
// the two boundary ratios of the stage acceptance, i.e.
// E_{y~q_b}[log q_a(y)/q_b(y)] + E_{z~q_a}[log q_b(z)/q_a(z)], all kernels
// centred at the same location. This is -KL(q_b||q_a) - KL(q_a||q_b), hence
// always <= 0, and reduces to the closed form when sigma_i << mu. Widths are
// expressed in units of the mode offset (mu = 1).
inline McEstimate mc_ap_loss(Rng& rng, double s1_over_mu, double s2_over_mu, double na,
                             double nb, long n_samples) {
    if (n_samples < 1) throw std::invalid_argument("mc_ap_loss: n_samples must be >= 1");
    ThreeGaussianParams qa{s1_over_mu, s2_over_mu, 1.0, na};
    ThreeGaussianParams qb{s1_over_mu, s2_over_mu, 1.0, nb};
    qa.validate();
    qb.validate();
    detail::Accumulator acc;
    for (long i = 0; i < n_samples; ++i) {
        double y = three_gaussian_sample(rng, 0.0, qb);
        double t1 = three_gaussian_logpdf(0.0, y, qa) - three_gaussian_logpdf(0.0, y, qb);
        double z = three_gaussian_sample(rng, 0.0, qa);
        double t2 = three_gaussian_logpdf(0.0, z, qb) - three_gaussian_logpdf(0.0, z, qa);
        acc.push(t1 + t2);
    }
    return acc.estimate();
}

// RMS deviation between the Monte Carlo loss and the closed form over a
// weight grid; large values flag the regime where the closed form breaks.
inline double ap_validity_rms(Rng& rng, double s1_over_mu, double s2_over_mu,
                              const std::vector<double>& na_grid,
                              const std::vector<double>& nb_grid, long n_samples) {
    if (na_grid.empty() || nb_grid.empty())
        throw std::invalid_argument("ap_validity_rms: empty grid");
    double ss = 0.0;
    for (double na : na_grid)
        for (double nb : nb_grid) {
            double d = mc_ap_loss(rng, s1_over_mu, s2_over_mu, na, nb, n_samples).mean -
                       analytic_ap_loss(na, nb);
            ss += d * d;
        }
    return std::sqrt(ss / static_cast<double>(na_grid.size() * nb_grid.size()));
}

// Monte Carlo estimate of the central-proposal-evolution loss: simulates a
// small-step excursion beta_1..beta_{n_dr-1} anchored at running means
// (beta_1 = 0 by translation invariance) and averages the log of the
// reverse-order over forward-order generation-density product. Only the
// interior small-step factors enter; there is no closed form because the
// anchor drift is emergent.
inline McEstimate mc_cpe_loss(Rng& rng, double s1_over_mu, double s2_over_mu, double nb,
                              int n_dr, long n_samples) {
    if (n_dr < 3) throw std::invalid_argument("mc_cpe_loss: n_dr must be >= 3");
    if (n_samples < 1) throw std::invalid_argument("mc_cpe_loss: n_samples must be >= 1");
    ThreeGaussianParams qb{s1_over_mu, s2_over_mu, 1.0, nb};
    qb.validate();
    const int ne = n_dr - 1;  // number of excursion elements
    std::vector<double> beta(ne), pre(ne), suf(ne);
    detail::Accumulator acc;
    for (long s = 0; s < n_samples; ++s) {
        beta[0] = 0.0;
        pre[0] = 0.0;
        for (int j = 1; j < ne; ++j) {
            double anchor = pre[j - 1] / static_cast<double>(j);
            beta[j] = three_gaussian_sample(rng, anchor, qb);
            pre[j] = pre[j - 1] + beta[j];
        }
        suf[ne - 1] = beta[ne - 1];
        for (int j = ne - 2; j >= 0; --j) suf[j] = suf[j + 1] + beta[j];
        double loss = 0.0;
        // reverse order: element j evaluated about the mean of beta_{j+1}..
        for (int j = 0; j + 1 < ne; ++j) {
            double anchor = suf[j + 1] / static_cast<double>(ne - 1 - j);
            loss += three_gaussian_logpdf(anchor, beta[j], qb);
        }
        // forward order: element j generated about the mean of beta_0..beta_{j-1}
        for (int j = 1; j < ne; ++j)
            loss -= three_gaussian_logpdf(pre[j - 1] / static_cast<double>(j), beta[j], qb);
        acc.push(loss);
    }
    return acc.estimate();
}

// Expected log proposal ratio for a single small-step factor whose evaluation
// kernel is shifted by delta relative to the generating kernel.
inline double analytic_cpe_shift(double delta, double nb, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("analytic_cpe_shift: widths must be positive");
    return -(delta * delta / 2.0) * (nb / (sigma1 * sigma1) + (1.0 - nb) / (sigma2 * sigma2));
}

// --- log-ratio factor distributions (well-separated-mode limit) -----------
//
// Density and mean of L = log q(x) for x drawn from a 3-Gaussian mixture and
// evaluated with a 3-Gaussian kernel sharing the same geometry. Three cases:
// identical kernels; kernels differing only in the central weight (generator
// weight n, evaluator weight m); kernels offset by delta.

namespace detail {

// One mixture component's contribution: coeff * e^L / sqrt(-2a) where
// a = L + log(sqrt(2 pi) * width / weight), zero outside a < 0; the shifted
// variant multiplies by exp(-d2h) * cosh(ds * sqrt(-2a)).
inline double density_term(double logf, double coeff, double log_scale, double d2h, double ds) {
    double a = logf + log_scale;
    if (!(a < 0.0)) return 0.0;
    double root = std::sqrt(-2.0 * a);
    double t = coeff * std::exp(logf) / root;
    if (ds != 0.0) t *= std::exp(-d2h) * std::cosh(ds * root);
    return t;
}

}  // namespace detail

inline double logratio_density_same(double logf, double n, double sigma1, double sigma2) {
    double d = 0.0;
    if (n > 0.0)
        d += detail::density_term(logf, 2.0 * sigma1, std::log(kSqrt2Pi * sigma1 / n),
                                  0.0, 0.0);
    if (n < 1.0)
        d += detail::density_term(
            logf, 4.0 * sigma2, std::log(kSqrt2Pi * 2.0 * sigma2 / (1.0 - n)), 0.0,
            0.0);
    return d;
}

inline double mean_same(double n, double sigma1, double sigma2) {
    return -0.5 - detail::xlog(n, kSqrt2Pi * sigma1 / n) -
           detail::xlog(1.0 - n, kSqrt2Pi * 2.0 * sigma2 / (1.0 - n));
}

// Generator central weight n, evaluator central weight m.
inline double logratio_density_reweighted(double logf, double n, double m, double sigma1,
                                          double sigma2) {
    double d = 0.0;
    if (n > 0.0 && m > 0.0)
        d += detail::density_term(logf, 2.0 * sigma1 * n / m,
                                  std::log(kSqrt2Pi * sigma1 / m), 0.0, 0.0);
    if (n < 1.0 && m < 1.0)
        d += detail::density_term(logf, 4.0 * sigma2 * (1.0 - n) / (1.0 - m),
                                  std::log(kSqrt2Pi * 2.0 * sigma2 / (1.0 - m)), 0.0,
                                  0.0);
    return d;
}

inline double mean_reweighted(double n, double m, double sigma1, double sigma2) {
    return -0.5 - detail::xlog(n, kSqrt2Pi * sigma1 / m) -
           detail::xlog(1.0 - n, kSqrt2Pi * 2.0 * sigma2 / (1.0 - m));
}

// Evaluator offset by delta from the generator; cosh-weighted density.
inline double logratio_density_shifted(double logf, double delta, double n, double sigma1,
                                       double sigma2) {
    double d = 0.0;
    if (n > 0.0)
        d += detail::density_term(logf, 2.0 * sigma1, std::log(kSqrt2Pi * sigma1 / n),
                                  delta * delta / (2.0 * sigma1 * sigma1), delta / sigma1);
    if (n < 1.0)
        d += detail::density_term(
            logf, 4.0 * sigma2, std::log(kSqrt2Pi * 2.0 * sigma2 / (1.0 - n)),
            delta * delta / (2.0 * sigma2 * sigma2), delta / sigma2);
    return d;
}

inline double mean_shifted(double delta, double n, double sigma1, double sigma2) {
    return mean_same(n, sigma1, sigma2) + analytic_cpe_shift(delta, n, sigma1, sigma2);
}

// --- loss-map grids --------------------------------------------------------

struct GridAxis {
    std::string name;
    std::vector<double> values;
};

struct LossGrid {
    std::string kind;  // "ap", "cpe", or "validity"
    std::vector<GridAxis> axes;
    std::vector<double> values;  // row-major, last axis fastest
    std::vector<double> errors;
    long mc_samples = 0;
    long cells_computed = 0;  // cells actually simulated (cache misses)

    std::size_t size() const {
        std::size_t s = 1;
        for (const auto& a : axes) s *= a.values.size();
        return s;
    }
    std::size_t flat_index(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < axes.size(); ++i) f = f * axes[i].values.size() + idx[i];
        return f;
    }
};

// Optional persistence hooks for resumable sweeps; keys are human-readable
// parameter strings, content-addressing is the caller's concern.
struct CellCache {
    std::function<std::optional<McEstimate>(const std::string&)> load;
    std::function<void(const std::string&, const McEstimate&)> store;
};

// The ladder of width-over-spacing values used as default grid rows/columns.
inline std::vector<double> default_sigma_ladder() { return {2.00, 0.54, 0.15, 0.04}; }

namespace detail {

// Runs `cell(flat_index)` over all cells of `grid`, optionally in parallel.
template <class Cell>
void sweep(LossGrid& grid, int n_threads, Cell&& cell) {
    const std::size_t total = grid.size();
    grid.values.assign(total, 0.0);
    grid.errors.assign(total, 0.0);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < total; ++i) cell(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) cell(i);
        });
    for (auto& th : pool) th.join();
}

inline std::vector<std::size_t> unflatten(const LossGrid& g, std::size_t flat) {
    std::vector<std::size_t> idx(g.axes.size());
    for (std::size_t i = g.axes.size(); i-- > 0;) {
        idx[i] = flat % g.axes[i].values.size();
        flat /= g.axes[i].values.size();
    }
    return idx;
}

}  // namespace detail

inline LossGrid ap_loss_grid(const std::vector<double>& s1, const std::vector<double>& s2,
                             const std::vector<double>& na, const std::vector<double>& nb,
                             long n_samples, std::uint64_t seed, int n_threads = 1,
                             const CellCache* cache = nullptr) {
    LossGrid g;
    g.kind = "ap";
    g.axes = {{"s1_over_mu", s1}, {"s2_over_mu", s2}, {"na", na}, {"nb", nb}};
    g.mc_samples = n_samples;
    std::atomic<long> computed{0};
    detail::sweep(g, n_threads, [&](std::size_t i) {
        auto idx = detail::unflatten(g, i);
        double vs1 = s1[idx[0]], vs2 = s2[idx[1]], vna = na[idx[2]], vnb = nb[idx[3]];
        std::string key = "ap|" + detail::fmt(vs1) + "|" + detail::fmt(vs2) + "|" +
                          detail::fmt(vna) + "|" + detail::fmt(vnb) + "|" +
                          std::to_string(n_samples) + "|" + std::to_string(seed);
        McEstimate e;
        if (cache && cache->load) {
            if (auto hit = cache->load(key)) {
                g.values[i] = hit->mean;
                g.errors[i] = hit->se;
                return;
            }
        }
        Rng rng(derive_seed(seed, i));
        e = mc_ap_loss(rng, vs1, vs2, vna, vnb, n_samples);
        computed.fetch_add(1);
        g.values[i] = e.mean;
        g.errors[i] = e.se;
        if (cache && cache->store) cache->store(key, e);
    });
    g.cells_computed = computed.load();
    return g;
}

inline LossGrid cpe_loss_grid(const std::vector<double>& s1, const std::vector<double>& s2,
                              const std::vector<double>& nb, const std::vector<int>& n_dr,
                              long n_samples, std::uint64_t seed, int n_threads = 1,
                              const CellCache* cache = nullptr) {
    LossGrid g;
    g.kind = "cpe";
    std::vector<double> ndr_axis(n_dr.begin(), n_dr.end());
    g.axes = {{"s1_over_mu", s1}, {"s2_over_mu", s2}, {"nb", nb}, {"n_dr", ndr_axis}};
    g.mc_samples = n_samples;
    std::atomic<long> computed{0};
    detail::sweep(g, n_threads, [&](std::size_t i) {
        auto idx = detail::unflatten(g, i);
        double vs1 = s1[idx[0]], vs2 = s2[idx[1]], vnb = nb[idx[2]];
        int vndr = n_dr[idx[3]];
        std::string key = "cpe|" + detail::fmt(vs1) + "|" + detail::fmt(vs2) + "|" +
                          detail::fmt(vnb) + "|" + std::to_string(vndr) + "|" +
                          std::to_string(n_samples) + "|" + std::to_string(seed);
        if (cache && cache->load) {
            if (auto hit = cache->load(key)) {
                g.values[i] = hit->mean;
                g.errors[i] = hit->se;
                return;
            }
        }
        Rng rng(derive_seed(seed, i));
        McEstimate e = mc_cpe_loss(rng, vs1, vs2, vnb, vndr, n_samples);
        computed.fetch_add(1);
        g.values[i] = e.mean;
        g.errors[i] = e.se;
        if (cache && cache->store) cache->store(key, e);
    });
    g.cells_computed = computed.load();
    return g;
}

inline LossGrid validity_grid(const std::vector<double>& s1, const std::vector<double>& s2,
                              const std::vector<double>& na, const std::vector<double>& nb,
                              long n_samples, std::uint64_t seed, int n_threads = 1,
                              const CellCache* cache = nullptr) {
    LossGrid g;
    g.kind = "validity";
    g.axes = {{"s1_over_mu", s1}, {"s2_over_mu", s2}};
    g.mc_samples = n_samples;
    std::atomic<long> computed{0};
    detail::sweep(g, n_threads, [&](std::size_t i) {
        auto idx = detail::unflatten(g, i);
        double vs1 = s1[idx[0]], vs2 = s2[idx[1]];
        std::string key = "validity|" + detail::fmt(vs1) + "|" + detail::fmt(vs2) + "|" +
                          std::to_string(na.size()) + "x" + std::to_string(nb.size()) + "|" +
                          std::to_string(n_samples) + "|" + std::to_string(seed);
        if (cache && cache->load) {
            if (auto hit = cache->load(key)) {
                g.values[i] = hit->mean;
                return;
            }
        }
        Rng rng(derive_seed(seed, i));
        McEstimate e;
        e.mean = ap_validity_rms(rng, vs1, vs2, na, nb, n_samples);
        computed.fetch_add(1);
        g.values[i] = e.mean;
        if (cache && cache->store) cache->store(key, e);
    });
    g.cells_computed = computed.load();
    return g;
}

// --- parameter recommendation ----------------------------------------------

struct TargetStructure {
    double mode_spacing = 1.0;  // becomes mu
    double width_wide = 0.45;   // becomes sigma1
    double width_narrow = 0.2;  // becomes sigma2
};

struct Recommendation {
    bool feasible = false;
    std::string message;
    double sigma1 = 0.0, sigma2 = 0.0, mu = 0.0;
    double na = 0.0, nb = 0.0;
    int n_dr = 0;
};

namespace detail {

inline std::size_t nearest_index(const std::vector<double>& axis, double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (std::abs(axis[i] - x) < std::abs(axis[best] - x)) best = i;
    return best;
}

// Linear interpolation weight: axis values need not be sorted uniformly, but
// must be monotone.
inline double interp1(const std::vector<double>& axis, const std::vector<double>& vals,
                      double x) {
    if (axis.size() == 1) return vals[0];
    bool asc = axis.back() > axis.front();
    std::size_t i = 0;
    while (i + 2 < axis.size() && (asc ? axis[i + 1] < x : axis[i + 1] > x)) ++i;
    double t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    t = std::clamp(t, 0.0, 1.0);
    return vals[i] * (1.0 - t) + vals[i + 1] * t;
}

}  // namespace detail

// Four-step proposal calibration: widths and spacing come straight from the
// target structure; nb is the smallest grid value whose interpolated CPE loss
// (at the smallest tabulated n_dr >= 100) clears the CPE tolerance; na is the
// smallest value whose interpolated AP loss at that nb clears the AP
// tolerance; n_dr passes through from the compute budget.
inline Recommendation recommend_parameters(const TargetStructure& structure,
                                           double loss_tolerance_ap, double loss_tolerance_cpe,
                                           const LossGrid& ap, const LossGrid& cpe,
                                           int n_dr_budget) {
    if (ap.kind != "ap" || cpe.kind != "cpe")
        throw std::invalid_argument("recommend_parameters: wrong grid kinds");
    Recommendation r;
    r.mu = structure.mode_spacing;
    r.sigma1 = structure.width_wide;
    r.sigma2 = structure.width_narrow;
    r.n_dr = n_dr_budget;
    const double s1 = r.sigma1 / r.mu, s2 = r.sigma2 / r.mu;

    // CPE grid: nearest sigma cell, n_dr cell = smallest tabulated >= 100.
    const auto& cnb = cpe.axes[2].values;
    const auto& cndr = cpe.axes[3].values;
    std::size_t i1 = detail::nearest_index(cpe.axes[0].values, s1);
    std::size_t i2 = detail::nearest_index(cpe.axes[1].values, s2);
    std::size_t indr = 0;
    bool found_ndr = false;
    for (std::size_t i = 0; i < cndr.size(); ++i)
        if (cndr[i] >= 100.0 && (!found_ndr || cndr[i] < cndr[indr])) {
            indr = i;
            found_ndr = true;
        }
    if (!found_ndr) indr = cndr.size() - 1;

    bool have_nb = false;
    for (std::size_t i = 0; i < cnb.size(); ++i) {
        double v = cpe.values[cpe.flat_index({i1, i2, i, indr})];
        if (v >= loss_tolerance_cpe) {
            r.nb = cnb[i];
            have_nb = true;
            break;
        }
    }
    if (!have_nb) {
        r.message = "no nb grid value meets the CPE loss tolerance";
        return r;
    }

    // AP grid: nearest sigma cell, linear in nb, scan na ascending.
    const auto& ana = ap.axes[2].values;
    const auto& anb = ap.axes[3].values;
    std::size_t j1 = detail::nearest_index(ap.axes[0].values, s1);
    std::size_t j2 = detail::nearest_index(ap.axes[1].values, s2);
    bool have_na = false;
    for (std::size_t i = 0; i < ana.size(); ++i) {
        std::vector<double> row(anb.size());
        for (std::size_t j = 0; j < anb.size(); ++j)
            row[j] = ap.values[ap.flat_index({j1, j2, i, j})];
        double v = detail::interp1(anb, row, r.nb);
        if (v >= loss_tolerance_ap) {
            r.na = ana[i];
            have_na = true;
            break;
        }
    }
    if (!have_na) {
        r.message = "no na grid value meets the AP loss tolerance at the chosen nb";
        return r;
    }
    r.feasible = true;
    r.message = "ok";
    return r;
}

}  // namespace drmcmc

#endif
