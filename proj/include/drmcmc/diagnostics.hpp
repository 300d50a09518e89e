#ifndef DRMCMC_DIAGNOSTICS_HPP
#define DRMCMC_DIAGNOSTICS_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace drmcmc {

struct AcfResult {
    std::vector<int> lags;
    std::vector<double> rho;  // rho[n] = C(n)/C(0), rho[0] = 1
    double c0 = 0.0;
    bool c0_valid = false;         // false for constant series (C(0) = 0)
    int window = 0;                // summation cutoff used by integrated_time
    bool window_converged = false; // false if the cutoff hit max_lag
    double tau_int = 0.0;
    std::optional<double> tau_exp; // empty when rho is non-positive in range
};

// Biased (1/N-normalized) sample autocorrelation about the sample mean. The
// 1/N normalization keeps the sequence positive-semidefinite.
inline AcfResult autocorrelation(const std::vector<double>& series, int max_lag) {
    const std::size_t n = series.size();
    if (max_lag < 1 || n <= static_cast<std::size_t>(max_lag))
        throw std::invalid_argument("autocorrelation: need series length > max_lag >= 1");

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);

    AcfResult r;
    r.lags.resize(max_lag + 1);
    r.rho.resize(max_lag + 1);
    std::vector<double> c(max_lag + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t)
            s += (series[t] - mean) * (series[t + lag] - mean);
        c[lag] = s / static_cast<double>(n);
        r.lags[lag] = lag;
    }
    r.c0 = c[0];
    r.c0_valid = c[0] > 0.0;
    for (int lag = 0; lag <= max_lag; ++lag)
        r.rho[lag] = r.c0_valid ? c[lag] / c[0] : (lag == 0 ? 1.0 : 0.0);
    return r;
}

// tau_int = 1/2 + sum_{n=1}^{W} rho(n), with the self-consistent cutoff
// W = smallest n satisfying n >= 6 * tau_int(n). Updates the result in place
// and returns tau_int; window_converged is false if W reached max_lag.
inline double integrated_time(AcfResult& acf) {
    if (!acf.c0_valid) throw std::invalid_argument("integrated_time: constant series");
    double tau = 0.5;
    int w = static_cast<int>(acf.rho.size()) - 1;
    acf.window_converged = false;
    for (int n = 1; n < static_cast<int>(acf.rho.size()); ++n) {
        tau += acf.rho[n];
        if (static_cast<double>(n) >= 6.0 * tau) {
            w = n;
            acf.window_converged = true;
            break;
        }
    }
    acf.window = w;
    acf.tau_int = tau;
    return tau;
}

// var(mean) ~= 2 tau_int C(0) / N
inline double estimate_variance(std::size_t n_samples, const AcfResult& acf) {
    if (!acf.c0_valid) throw std::invalid_argument("estimate_variance: constant series");
    if (n_samples == 0) throw std::invalid_argument("estimate_variance: empty series");
    return 2.0 * acf.tau_int * acf.c0 / static_cast<double>(n_samples);
}

// Least-squares fit of log rho(n) = -n / tau_exp over lags [1, window],
// through the origin (rho(0) = 1 exactly). Empty when rho is non-positive
// anywhere in the range or the fitted slope is non-negative.
inline std::optional<double> fit_tau_exp(AcfResult& acf) {
    int w = acf.window > 0 ? acf.window : static_cast<int>(acf.rho.size()) - 1;
    double sxy = 0.0, sxx = 0.0;
    for (int n = 1; n <= w; ++n) {
        if (!(acf.rho[n] > 0.0)) {
            acf.tau_exp.reset();
            return std::nullopt;
        }
        sxy += n * std::log(acf.rho[n]);
        sxx += static_cast<double>(n) * n;
    }
    double slope = sxy / sxx;
    if (!(slope < 0.0)) {
        acf.tau_exp.reset();
        return std::nullopt;
    }
    acf.tau_exp = -1.0 / slope;
    return acf.tau_exp;
}

// Relative variance excess (var_A - var_B)/var_B of the uncollapsed chain A
// over the collapsed chain B, for a periodic rejection pattern where every
// (m1+1)-th element of an exponentially correlated series (rho(n) =
// exp(-n/tau)) is repeated m2 times. Non-negative for all valid inputs.
inline double dr_variance_gain(int m1, int m2, double tau_exp) {
    if (m1 < 1 || m2 < 1 || !(tau_exp > 0.0))
        throw std::invalid_argument("dr_variance_gain: need m1 >= 1, m2 >= 1, tau > 0");
    double a = static_cast<double>(m2 - 1) / static_cast<double>(m1 + m2);
    double h = 1.0 / (2.0 * tau_exp);
    double coth = 1.0 / std::tanh((m1 + 1) * h);
    return a * a * ((m1 + 1) * coth * std::tanh(h) - 1.0);
}

}  // namespace drmcmc

#endif
