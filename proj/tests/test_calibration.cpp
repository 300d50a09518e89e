#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "drmcmc/calibration.hpp"
#include "drmcmc/proposal.hpp"
#include "drmcmc/rng.hpp"
#include "support/quadrature.hpp"

using namespace drmcmc;
using testsupport::integrate_logratio_density;

TEST_CASE("closed-form mixture-weight penalty") {
    SUBCASE("vanishes for equal weights") {
        for (double n : {0.01, 0.3, 0.5, 0.9}) CHECK(analytic_ap_loss(n, n) == 0.0);
    }
    SUBCASE("reference value at the (0.15, 0.95) pair") {
        CHECK(analytic_ap_loss(0.15, 0.95) ==
              doctest::Approx(-0.8 * std::log((1.0 / 0.15 - 1.0) / (1.0 / 0.95 - 1.0))));
        CHECK(analytic_ap_loss(0.15, 0.95) == doctest::Approx(-3.74319).epsilon(1e-5));
    }
    SUBCASE("second order near a common weight") {
        // Perturbing one weight by eps costs O(eps^2).
        double l = analytic_ap_loss(0.5 + 1e-4, 0.5);
        CHECK(std::abs(l) < 1e-7);
        CHECK(l < 0.0);
    }
    SUBCASE("endpoint weights are rejected") {
        CHECK_THROWS_AS(analytic_ap_loss(0.0, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(analytic_ap_loss(0.5, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(analytic_ap_loss(-0.1, 0.5), std::invalid_argument);
    }
}

TEST_CASE("Monte Carlo mixture-weight penalty") {
    SUBCASE("identical kernels give zero up to rounding") {
        Rng rng(31);
        auto e = mc_ap_loss(rng, 0.45, 0.2, 0.4, 0.4, 5000);
        CHECK(std::abs(e.mean) < 1e-15);
        CHECK(e.se < 1e-15);
    }
    SUBCASE("never positive beyond noise") {
        Rng rng(32);
        for (double s : {2.0, 0.5, 0.05}) {
            auto e = mc_ap_loss(rng, s, 0.4 * s, 0.15, 0.95, 20000);
            CHECK(e.mean <= 4.0 * e.se);
        }
    }
    SUBCASE("agrees with the closed form for well-separated kernels") {
        Rng rng(33);
        auto e = mc_ap_loss(rng, 0.04, 0.016, 0.15, 0.95, 200000);
        CHECK(std::abs(e.mean - analytic_ap_loss(0.15, 0.95)) < 0.2);
    }
    SUBCASE("breaks away from the closed form for overlapping kernels") {
        Rng rng(34);
        auto e = mc_ap_loss(rng, 2.0, 0.8, 0.15, 0.95, 200000);
        CHECK(std::abs(e.mean - analytic_ap_loss(0.15, 0.95)) > 1.0);
    }
    SUBCASE("validity score is small at narrow widths and large at wide ones") {
        Rng rng(35);
        std::vector<double> na{0.15, 0.5}, nb{0.5, 0.95};
        double narrow = ap_validity_rms(rng, 0.04, 0.016, na, nb, 50000);
        double wide = ap_validity_rms(rng, 2.0, 0.8, na, nb, 50000);
        CHECK(narrow < 0.3);
        CHECK(wide > 1.0);
        CHECK(narrow < wide);
    }
}

TEST_CASE("Monte Carlo running-anchor excursion penalty") {
    SUBCASE("two-element excursions cost zero up to rounding") {
        Rng rng(36);
        auto e = mc_cpe_loss(rng, 0.45, 0.2, 0.95, 3, 2000);
        CHECK(std::abs(e.mean) < 1e-15);
        CHECK(e.se < 1e-15);
    }
    SUBCASE("never positive beyond noise") {
        Rng rng(37);
        for (int ndr : {5, 20, 100}) {
            auto e = mc_cpe_loss(rng, 0.45, 0.2, 0.8, ndr, 4000);
            CHECK(e.mean <= 4.0 * e.se);
        }
    }
    SUBCASE("loss shrinks as the stay-local weight approaches one") {
        Rng rng(38);
        auto lo = mc_cpe_loss(rng, 0.45, 0.2, 0.5, 50, 20000);
        auto hi = mc_cpe_loss(rng, 0.45, 0.2, 0.99, 50, 20000);
        CHECK(hi.mean > lo.mean + 3.0 * (lo.se + hi.se));
    }
    SUBCASE("plateaus in the excursion length") {
        Rng rng(39);
        auto a = mc_cpe_loss(rng, 0.45, 0.2, 0.95, 500, 3000);
        auto b = mc_cpe_loss(rng, 0.45, 0.2, 0.95, 1000, 3000);
        CHECK(std::abs(a.mean - b.mean) < 0.5);
    }
    SUBCASE("rejects excursions that are too short") {
        Rng rng(40);
        CHECK_THROWS_AS(mc_cpe_loss(rng, 0.45, 0.2, 0.95, 2, 100), std::invalid_argument);
    }
}

TEST_CASE("closed-form shifted-anchor penalty") {
    CHECK(analytic_cpe_shift(0.0, 0.95, 0.45, 0.2) == 0.0);
    CHECK(analytic_cpe_shift(0.1, 0.95, 0.45, 0.2) == doctest::Approx(-0.0297068).epsilon(1e-5));
    CHECK(analytic_cpe_shift(0.1, 0.95, 0.45, 0.2) ==
          analytic_cpe_shift(-0.1, 0.95, 0.45, 0.2));
    CHECK_THROWS_AS(analytic_cpe_shift(0.1, 0.95, 0.0, 0.2), std::invalid_argument);
}

namespace {

// Upper support endpoints of the two components of a log-ratio density.
std::pair<double, double> support_endpoints(double n, double m, double s1, double s2) {
    double e1 = (n > 0.0 && m > 0.0) ? -std::log(kSqrt2Pi * s1 / m)
                                     : -std::log(kSqrt2Pi * 2.0 * s2 / (1.0 - m));
    double e2 = (n < 1.0 && m < 1.0) ? -std::log(kSqrt2Pi * 2.0 * s2 / (1.0 - m)) : e1;
    return {e1, e2};
}

struct McMoments {
    double mean, se;
};

template <class Draw, class Eval>
McMoments mc_moments(Rng& rng, long n, Draw&& draw, Eval&& eval) {
    double s = 0.0, ss = 0.0;
    for (long i = 0; i < n; ++i) {
        double v = eval(draw());
        s += v;
        ss += v * v;
    }
    double mean = s / n;
    double var = ss / n - mean * mean;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

TEST_CASE("log-density factor distributions: normalization and means") {
    const double s1 = 0.37, s2 = 0.11;

    SUBCASE("same-kernel density integrates to one and reproduces its mean") {
        for (double n : {0.15, 0.5, 0.95}) {
            auto [e1, e2] = support_endpoints(n, n, s1, s2);
            auto p = [&](double L) { return logratio_density_same(L, n, s1, s2); };
            CHECK(integrate_logratio_density(p, e1, e2) == doctest::Approx(1.0).epsilon(1e-6));
            auto lp = [&](double L) { return L * logratio_density_same(L, n, s1, s2); };
            CHECK(integrate_logratio_density(lp, e1, e2) ==
                  doctest::Approx(mean_same(n, s1, s2)).epsilon(1e-5));
        }
    }

    SUBCASE("reweighted density integrates to its total mass and reproduces its mean") {
        const double n = 0.15, m = 0.95;
        auto [e1, e2] = support_endpoints(n, m, s1, s2);
        auto p = [&](double L) { return logratio_density_reweighted(L, n, m, s1, s2); };
        CHECK(integrate_logratio_density(p, e1, e2) == doctest::Approx(1.0).epsilon(1e-6));
        auto lp = [&](double L) { return L * logratio_density_reweighted(L, n, m, s1, s2); };
        CHECK(integrate_logratio_density(lp, e1, e2) ==
              doctest::Approx(mean_reweighted(n, m, s1, s2)).epsilon(1e-5));
    }

    SUBCASE("shifted density integrates to one and reproduces its mean") {
        const double n = 0.6, delta = 0.05;
        auto [e1, e2] = support_endpoints(n, n, s1, s2);
        auto p = [&](double L) { return logratio_density_shifted(L, delta, n, s1, s2); };
        CHECK(integrate_logratio_density(p, e1, e2) == doctest::Approx(1.0).epsilon(1e-6));
        auto lp = [&](double L) {
            return L * logratio_density_shifted(L, delta, n, s1, s2);
        };
        CHECK(integrate_logratio_density(lp, e1, e2) ==
              doctest::Approx(mean_shifted(delta, n, s1, s2)).epsilon(1e-5));
    }
}

TEST_CASE("log-density factor means match direct sampling on separated kernels") {
    // Widths far below the mode spacing: the component that generated a draw
    // dominates every evaluation, which is the regime the formulas describe.
    const double s1 = 0.02, s2 = 0.007, mu = 1.0;
    const long n_samp = 400000;

    SUBCASE("same kernel") {
        Rng rng(41);
        const double n = 0.3;
        ThreeGaussianParams q{s1, s2, mu, n};
        auto mm = mc_moments(
            rng, n_samp, [&] { return three_gaussian_sample(rng, 0.0, q); },
            [&](double x) { return three_gaussian_logpdf(0.0, x, q); });
        CHECK(std::abs(mm.mean - mean_same(n, s1, s2)) < 4.0 * mm.se);
    }

    SUBCASE("reweighted kernel") {
        Rng rng(42);
        const double n = 0.3, m = 0.8;
        ThreeGaussianParams qn{s1, s2, mu, n}, qm{s1, s2, mu, m};
        auto mm = mc_moments(
            rng, n_samp, [&] { return three_gaussian_sample(rng, 0.0, qn); },
            [&](double x) { return three_gaussian_logpdf(0.0, x, qm); });
        CHECK(std::abs(mm.mean - mean_reweighted(n, m, s1, s2)) < 4.0 * mm.se);
    }

    SUBCASE("shifted kernel") {
        Rng rng(43);
        const double n = 0.3, delta = 0.004;
        ThreeGaussianParams q{s1, s2, mu, n};
        auto mm = mc_moments(
            rng, n_samp, [&] { return three_gaussian_sample(rng, 0.0, q); },
            [&](double x) { return three_gaussian_logpdf(delta, x, q); });
        CHECK(std::abs(mm.mean - mean_shifted(delta, n, s1, s2)) < 4.0 * mm.se);
    }
}

TEST_CASE("mixture-weight penalty decomposes into log-density factor means") {
    Rng rng(44);
    std::uniform_real_distribution<double> w(0.02, 0.98), s(0.05, 2.0);
    for (int i = 0; i < 1000; ++i) {
        double na = w(rng), nb = w(rng), s1 = s(rng), s2 = s(rng);
        double lhs = mean_reweighted(nb, na, s1, s2) + mean_reweighted(na, nb, s1, s2) -
                     mean_same(na, s1, s2) - mean_same(nb, s1, s2);
        CHECK(lhs == doctest::Approx(analytic_ap_loss(na, nb)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("loss grids") {
    const std::vector<double> s1{0.45}, s2{0.2};
    const std::vector<double> na{0.15, 0.5}, nb{0.5, 0.95};

    SUBCASE("standard error scales like one over root sample count") {
        auto g1 = ap_loss_grid(s1, s2, na, nb, 2000, 50);
        auto g2 = ap_loss_grid(s1, s2, na, nb, 200000, 50);
        for (std::size_t i = 0; i < g1.size(); ++i) {
            if (g1.errors[i] == 0.0) continue;  // identical-kernel cells
            CHECK(g1.errors[i] / g2.errors[i] == doctest::Approx(10.0).epsilon(0.35));
        }
    }

    SUBCASE("all tabulated losses are non-positive beyond noise") {
        auto g = ap_loss_grid(default_sigma_ladder(), {0.2}, na, nb, 20000, 51, 4);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.values[i] <= 3.0 * g.errors[i]);
        auto c = cpe_loss_grid({0.45}, {0.2}, nb, {5, 25}, 5000, 51, 4);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.values[i] <= 3.0 * c.errors[i]);
    }

    SUBCASE("grids are deterministic and thread-count independent") {
        auto a = ap_loss_grid(s1, s2, na, nb, 5000, 52, 1);
        auto b = ap_loss_grid(s1, s2, na, nb, 5000, 52, 4);
        CHECK(a.values == b.values);
        CHECK(a.errors == b.errors);
    }

    SUBCASE("cache round trip skips recomputation and preserves values") {
        std::map<std::string, McEstimate> store;
        CellCache cache;
        cache.load = [&](const std::string& k) -> std::optional<McEstimate> {
            auto it = store.find(k);
            if (it == store.end()) return std::nullopt;
            return it->second;
        };
        cache.store = [&](const std::string& k, const McEstimate& e) { store[k] = e; };

        auto first = ap_loss_grid(s1, s2, na, nb, 5000, 53, 2, &cache);
        CHECK(first.cells_computed == static_cast<long>(first.size()));
        auto second = ap_loss_grid(s1, s2, na, nb, 5000, 53, 2, &cache);
        CHECK(second.cells_computed == 0);
        CHECK(second.values == first.values);
        CHECK(second.errors == first.errors);
        // A different seed or sample count must miss the cache.
        auto third = ap_loss_grid(s1, s2, na, nb, 5000, 54, 2, &cache);
        CHECK(third.cells_computed == static_cast<long>(third.size()));
    }
}

TEST_CASE("parameter recommendation") {
    TargetStructure structure{1.25, 0.45, 0.2};
    const std::vector<double> sl{0.36}, sn{0.16};  // 0.45/1.25, 0.2/1.25
    const std::vector<double> na{0.05, 0.10, 0.15, 0.30, 0.50};
    const std::vector<double> nb{0.50, 0.80, 0.90, 0.95, 0.99};
    auto ap = ap_loss_grid(sl, sn, na, nb, 50000, 60, 4);
    auto cpe = cpe_loss_grid(sl, sn, nb, {100, 400}, 5000, 60, 4);

    SUBCASE("grid kinds are checked") {
        CHECK_THROWS_AS(recommend_parameters(structure, -4.0, -0.01, cpe, ap, 2000),
                        std::invalid_argument);
    }

    SUBCASE("selects the economical big-jump weight under a loose budget") {
        // Tolerance placed between the measured losses at na = 0.10 and 0.15
        // (nb fixed by an always-satisfiable excursion tolerance).
        auto at = [&](double vna, double vnb) {
            std::size_t i = 0, j = 0;
            while (na[i] != vna) ++i;
            while (nb[j] != vnb) ++j;
            return ap.values[ap.flat_index({0, 0, i, j})];
        };
        double tol_ap = 0.5 * (at(0.10, 0.95) + at(0.15, 0.95));
        REQUIRE(at(0.10, 0.95) < tol_ap);
        REQUIRE(at(0.15, 0.95) > tol_ap);

        auto cat = [&](double vnb) {
            std::size_t j = 0;
            while (nb[j] != vnb) ++j;
            return cpe.values[cpe.flat_index({0, 0, j, 0})];
        };
        double tol_cpe = 0.5 * (cat(0.90) + cat(0.95));
        REQUIRE(cat(0.90) < tol_cpe);
        REQUIRE(cat(0.95) > tol_cpe);

        auto r = recommend_parameters(structure, tol_ap, tol_cpe, ap, cpe, 2000);
        REQUIRE(r.feasible);
        CHECK(r.na == 0.15);
        CHECK(r.nb == 0.95);
        CHECK(r.n_dr == 2000);
        CHECK(r.sigma1 == structure.width_wide);
        CHECK(r.sigma2 == structure.width_narrow);
        CHECK(r.mu == structure.mode_spacing);
    }

    SUBCASE("tighter tolerances move the weights toward each other") {
        auto loose = recommend_parameters(structure, -6.0, -1.0, ap, cpe, 2000);
        auto tight = recommend_parameters(structure, -1.0, -0.001, ap, cpe, 2000);
        REQUIRE(loose.feasible);
        if (tight.feasible) {
            CHECK(tight.na >= loose.na);
            CHECK(tight.nb >= loose.nb);
        }
    }

    SUBCASE("impossible tolerances are reported, not silently satisfied") {
        auto r = recommend_parameters(structure, -1e-12, -1e-12, ap, cpe, 2000);
        CHECK(!r.feasible);
        CHECK(!r.message.empty());
        CHECK(r.message != "ok");
    }
}
