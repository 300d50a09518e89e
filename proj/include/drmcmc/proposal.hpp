#ifndef DRMCMC_PROPOSAL_HPP
#define DRMCMC_PROPOSAL_HPP

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "logspace.hpp"
#include "point.hpp"
#include "rng.hpp"

namespace drmcmc {

inline constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log sqrt(2*pi)

inline double normal_logpdf(double x, double mean, double sigma) {
    double z = (x - mean) / sigma;
    return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

// Symmetric 3-Gaussian mixture: a central Gaussian of width sigma1 and weight
// weight_center, flanked by two Gaussians of width sigma2 at +-mu sharing the
// remaining weight equally.
struct ThreeGaussianParams {
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double mu = 0.0;
    double weight_center = 1.0;

    void validate() const {
        if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
            throw std::invalid_argument("ThreeGaussianParams: sigma must be positive");
        if (!(mu >= 0.0))
            throw std::invalid_argument("ThreeGaussianParams: mu must be non-negative");
        if (!(weight_center >= 0.0 && weight_center <= 1.0))
            throw std::invalid_argument("ThreeGaussianParams: weight_center outside [0,1]");
    }
};

// Log-density of the 3-Gaussian mixture centred at `center`, evaluated at x.
// Degenerate weights (0 or 1) skip the vanished component entirely.
inline double three_gaussian_logpdf(double center, double x, const ThreeGaussianParams& p) {
    p.validate();
    const double n = p.weight_center;
    double terms[3];
    std::size_t k = 0;
    if (n > 0.0)
        terms[k++] = std::log(n) + normal_logpdf(x, center, p.sigma1);
    if (n < 1.0) {
        double lw = std::log((1.0 - n) / 2.0);
        terms[k++] = lw + normal_logpdf(x, center - p.mu, p.sigma2);
        terms[k++] = lw + normal_logpdf(x, center + p.mu, p.sigma2);
    }
    return log_sum_exp(std::span<const double>(terms, k));
}

// Draw from the mixture: pick a component, then a Gaussian deviate. The side
// is chosen uniformly at random (both sides carry equal weight).
inline double three_gaussian_sample(Rng& rng, double center, const ThreeGaussianParams& p) {
    p.validate();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double u = unif(rng);
    const double side = (1.0 - p.weight_center) / 2.0;
    if (u < side) return center - p.mu + p.sigma2 * gauss(rng);
    if (u < 2.0 * side) return center + p.mu + p.sigma2 * gauss(rng);
    return center + p.sigma1 * gauss(rng);
}

// The stage-1 ("big jump") and later-stage ("small step") instances differ
// only in the central weight; widths and offset are shared.
struct ThreeGaussianPair {
    ThreeGaussianParams q_a;
    ThreeGaussianParams q_b;

    ThreeGaussianPair() = default;
    ThreeGaussianPair(double sigma1, double sigma2, double mu, double na, double nb)
        : q_a{sigma1, sigma2, mu, na}, q_b{sigma1, sigma2, mu, nb} {}

    void validate() const {
        q_a.validate();
        q_b.validate();
        if (q_a.sigma1 != q_b.sigma1 || q_a.sigma2 != q_b.sigma2 || q_a.mu != q_b.mu)
            throw std::invalid_argument("ThreeGaussianPair: q_a and q_b must share sigma1, sigma2, mu");
    }
};

struct SingleGaussian {
    double sigma = 1.0;
    void validate() const {
        if (!(sigma > 0.0)) throw std::invalid_argument("SingleGaussian: sigma must be positive");
    }
};

using DimensionProposal = std::variant<ThreeGaussianPair, SingleGaussian>;

// Per-dimension proposal layout for a DR excursion. Product form: dimensions
// are updated independently.
struct ProposalSpec {
    std::vector<DimensionProposal> dims;

    std::size_t dim() const { return dims.size(); }
    void validate() const {
        if (dims.empty()) throw std::invalid_argument("ProposalSpec: no dimensions");
        for (const auto& d : dims)
            std::visit([](const auto& v) { v.validate(); }, d);
    }
};

// Running mean of the DR excursion elements after the big jump (the central
// location of all stage >= 2 proposals).
struct CentralTracker {
    std::size_t count = 0;
    Point running_mean;

    void push(const Point& v) {
        if (count == 0) {
            running_mean = v;
            count = 1;
            return;
        }
        ++count;
        for (std::size_t i = 0; i < v.size(); ++i)
            running_mean[i] += (v[i] - running_mean[i]) / static_cast<double>(count);
    }
};

inline CentralTracker central_push(CentralTracker tracker, const Point& value) {
    tracker.push(value);
    return tracker;
}

// Log-density of proposing `candidate` from `anchor` at the given stage.
// ThreeGaussian dimensions use q_a at stage 1 and q_b afterwards; single
// Gaussian dimensions keep the same kernel at every stage. The anchor is the
// previous state at stage 1 and the tracker mean at later stages -- the
// caller supplies it.
inline double dr_proposal_logpdf(int stage, const Point& anchor, const Point& candidate,
                                 const ProposalSpec& spec) {
    if (stage < 1) throw std::invalid_argument("dr_proposal_logpdf: stage must be >= 1");
    check_dims(anchor, spec.dim(), "dr_proposal_logpdf");
    check_dims(candidate, spec.dim(), "dr_proposal_logpdf");
    double lp = 0.0;
    for (std::size_t i = 0; i < spec.dims.size(); ++i) {
        if (const auto* tg = std::get_if<ThreeGaussianPair>(&spec.dims[i])) {
            const ThreeGaussianParams& p = (stage == 1) ? tg->q_a : tg->q_b;
            lp += three_gaussian_logpdf(anchor[i], candidate[i], p);
        } else {
            const auto& sg = std::get<SingleGaussian>(spec.dims[i]);
            lp += normal_logpdf(candidate[i], anchor[i], sg.sigma);
        }
    }
    return lp;
}

inline Point dr_proposal_sample(Rng& rng, int stage, const Point& anchor,
                                const ProposalSpec& spec) {
    if (stage < 1) throw std::invalid_argument("dr_proposal_sample: stage must be >= 1");
    check_dims(anchor, spec.dim(), "dr_proposal_sample");
    Point x(spec.dim());
    for (std::size_t i = 0; i < spec.dims.size(); ++i) {
        if (const auto* tg = std::get_if<ThreeGaussianPair>(&spec.dims[i])) {
            const ThreeGaussianParams& p = (stage == 1) ? tg->q_a : tg->q_b;
            x[i] = three_gaussian_sample(rng, anchor[i], p);
        } else {
            const auto& sg = std::get<SingleGaussian>(spec.dims[i]);
            std::normal_distribution<double> gauss(anchor[i], sg.sigma);
            x[i] = gauss(rng);
        }
    }
    return x;
}

}  // namespace drmcmc

#endif
