#ifndef DRMCMC_TARGETS_HPP
#define DRMCMC_TARGETS_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "logspace.hpp"
#include "point.hpp"
#include "proposal.hpp"

namespace drmcmc {

inline double normal_cdf(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::numbers::sqrt2_v<double>));
}

// Normalized 1-d Gaussian mixture with per-component widths.
struct GaussianMixture1D {
    std::vector<double> weights;
    std::vector<double> centers;
    std::vector<double> widths;

    void validate() const {
        if (weights.empty() || weights.size() != centers.size() || weights.size() != widths.size())
            throw std::invalid_argument("GaussianMixture1D: mismatched component lists");
        for (double w : weights)
            if (!(w > 0.0)) throw std::invalid_argument("GaussianMixture1D: weights must be positive");
        for (double s : widths)
            if (!(s > 0.0)) throw std::invalid_argument("GaussianMixture1D: widths must be positive");
    }

    double weight_sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

    double log_density(double x) const {
        std::vector<double> terms(weights.size());
        const double lw = std::log(weight_sum());
        for (std::size_t k = 0; k < weights.size(); ++k)
            terms[k] = std::log(weights[k]) - lw + normal_logpdf(x, centers[k], widths[k]);
        return log_sum_exp(terms);
    }

    double cdf(double x) const {
        double s = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k)
            s += weights[k] * normal_cdf(x, centers[k], widths[k]);
        return s / weight_sum();
    }
};

// Synthetic multimodal surrogate: a comb of equally spaced narrow Gaussian
// islands with geometrically decaying weights on dimension 0, plus optional
// smooth Gaussian nuisance dimensions. Normalized (constant = 1).
struct IslandComb {
    int n_modes = 5;
    double spacing = 1.25;
    double mode_width = 0.25;
    double weight_decay = 0.5;   // weight of mode k is weight_decay^k
    int dims = 1;
    double nuisance_width = 1.0;

    void validate() const {
        if (n_modes < 1) throw std::invalid_argument("IslandComb: n_modes must be >= 1");
        if (!(spacing > 0.0)) throw std::invalid_argument("IslandComb: spacing must be positive");
        if (!(mode_width > 0.0)) throw std::invalid_argument("IslandComb: mode_width must be positive");
        if (!(weight_decay > 0.0)) throw std::invalid_argument("IslandComb: weight_decay must be positive");
        if (dims < 1) throw std::invalid_argument("IslandComb: dims must be >= 1");
        if (dims > 1 && !(nuisance_width > 0.0))
            throw std::invalid_argument("IslandComb: nuisance_width must be positive");
    }

    GaussianMixture1D comb_mixture() const {
        GaussianMixture1D m;
        double w = 1.0;
        for (int k = 0; k < n_modes; ++k) {
            m.weights.push_back(w);
            m.centers.push_back(k * spacing);
            m.widths.push_back(mode_width);
            w *= weight_decay;
        }
        return m;
    }
};

// Explicit probability vector over 1-d grid points; oracle / test use only.
struct DiscreteLattice {
    std::vector<double> points;
    std::vector<double> probs;

    void validate() const {
        if (points.empty() || points.size() != probs.size())
            throw std::invalid_argument("DiscreteLattice: mismatched grids");
        double s = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw std::invalid_argument("DiscreteLattice: negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw std::invalid_argument("DiscreteLattice: probabilities must sum to 1");
    }
};

struct TargetSpec {
    std::variant<GaussianMixture1D, IslandComb, DiscreteLattice> variant;

    void validate() const {
        std::visit([](const auto& v) { v.validate(); }, variant);
    }

    std::size_t dim() const {
        if (const auto* ic = std::get_if<IslandComb>(&variant))
            return static_cast<std::size_t>(ic->dims);
        return 1;
    }
};

inline double log_density(const TargetSpec& target, const Point& x) {
    check_dims(x, target.dim(), "log_density");
    if (const auto* gm = std::get_if<GaussianMixture1D>(&target.variant))
        return gm->log_density(x[0]);
    if (const auto* ic = std::get_if<IslandComb>(&target.variant)) {
        double lp = ic->comb_mixture().log_density(x[0]);
        for (int i = 1; i < ic->dims; ++i)
            lp += normal_logpdf(x[i], 0.0, ic->nuisance_width);
        return lp;
    }
    const auto& dl = std::get<DiscreteLattice>(target.variant);
    for (std::size_t i = 0; i < dl.points.size(); ++i)
        if (x[0] == dl.points[i])
            return dl.probs[i] > 0.0 ? std::log(dl.probs[i]) : kNegInf;
    return kNegInf;
}

// CDF of the multimodal coordinate; defined for the 1-d mixture-representable
// variants only.
inline double cdf(const TargetSpec& target, double x) {
    if (const auto* gm = std::get_if<GaussianMixture1D>(&target.variant))
        return gm->cdf(x);
    if (const auto* ic = std::get_if<IslandComb>(&target.variant))
        return ic->comb_mixture().cdf(x);
    throw std::invalid_argument("cdf: unsupported target variant");
}

}  // namespace drmcmc

#endif
