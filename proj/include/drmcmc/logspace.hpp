#ifndef DRMCMC_LOGSPACE_HPP
#define DRMCMC_LOGSPACE_HPP

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>

namespace drmcmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(args[i])) with max-subtraction.
inline double log_sum_exp(std::span<const double> args) {
    if (args.empty()) throw std::invalid_argument("log_sum_exp: no arguments");
    double m = *std::max_element(args.begin(), args.end());
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double a : args) s += std::exp(a - m);
    return m + std::log(s);
}

inline double log_sum_exp(std::initializer_list<double> args) {
    return log_sum_exp(std::span<const double>(args.begin(), args.size()));
}

// log(1 - exp(la)) for la <= 0, stable in both tails.
inline double log1m_exp(double la) {
    if (la > 0.0) throw std::invalid_argument("log1m_exp: positive argument");
    if (la == 0.0) return kNegInf;
    if (la > -0.6931471805599453)  // -log 2
        return std::log(-std::expm1(la));
    return std::log1p(-std::exp(la));
}

// A non-negative real stored as exp(log_mag) * 0^zero_count.
// zero_count tracks exactly-zero factors symbolically so that matched zeros
// in an acceptance ratio cancel instead of producing 0/0 or inf.
struct ZeroAwareLog {
    double log_mag = 0.0;
    int zero_count = 0;

    static ZeroAwareLog from_log(double l) {
        if (std::isnan(l)) throw std::invalid_argument("ZeroAwareLog: NaN magnitude");
        if (l == kNegInf) return {0.0, 1};
        return {l, 0};
    }
    static ZeroAwareLog exact_zero() { return {0.0, 1}; }
    static ZeroAwareLog one() { return {0.0, 0}; }

    ZeroAwareLog operator*(const ZeroAwareLog& o) const {
        return {log_mag + o.log_mag, zero_count + o.zero_count};
    }
    ZeroAwareLog& operator*=(const ZeroAwareLog& o) {
        log_mag += o.log_mag;
        zero_count += o.zero_count;
        return *this;
    }
    bool is_zero() const { return zero_count > 0; }
};

struct AlphaValue {
    double alpha = 0.0;     // in [0, 1]
    bool is_one = false;    // exact unity (matters for zero counting)
    double log_alpha = kNegInf;  // log of alpha; 0.0 when is_one
};

// alpha = min(1, num/den) under zero-count semantics:
// unmatched zeros in the numerator kill the ratio, unmatched zeros in the
// denominator drive it to its finite cap of 1.
inline AlphaValue acceptance_alpha(const ZeroAwareLog& num, const ZeroAwareLog& den) {
    if (num.zero_count > den.zero_count) return {0.0, false, kNegInf};
    if (den.zero_count > num.zero_count) return {1.0, true, 0.0};
    double lr = num.log_mag - den.log_mag;
    if (lr >= 0.0) return {1.0, true, 0.0};
    return {std::exp(lr), false, lr};
}

// (1 - alpha) as a ZeroAwareLog factor. Exact unity becomes an exact zero.
inline ZeroAwareLog one_minus_alpha(const AlphaValue& a) {
    if (a.is_one) return ZeroAwareLog::exact_zero();
    if (a.alpha == 0.0) return ZeroAwareLog::one();
    return ZeroAwareLog::from_log(log1m_exp(a.log_alpha));
}

}  // namespace drmcmc

#endif
