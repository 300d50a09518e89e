#include <doctest.h>

#include <cmath>
#include <random>

#include "drmcmc/rng.hpp"
#include "drmcmc/targets.hpp"
#include "support/quadrature.hpp"

using namespace drmcmc;

TEST_CASE("single-component mixture log density at its center") {
    GaussianMixture1D g{{1.0}, {0.0}, {1.0}};
    CHECK(g.log_density(0.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("1-d variants normalize to one (quadrature oracle)") {
    TargetSpec mix{GaussianMixture1D{{0.4, 1.6}, {-1.0, 2.0}, {0.5, 0.3}}};
    TargetSpec comb{IslandComb{5, 1.25, 0.2, 0.5, 1, 1.0}};
    for (const auto& t : {mix, comb}) {
        double z = testsupport::simpson(
            [&](double x) { return std::exp(log_density(t, Point{x})); }, -12.0, 12.0, 40000);
        CHECK(z == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("island comb: geometric weights relate mode peaks") {
    IslandComb c{6, 1.25, 0.1, 0.35, 1, 1.0};
    TargetSpec t{c};
    // modes are narrow, so cross-mode leakage at the peaks is negligible
    for (int k = 1; k < c.n_modes; ++k) {
        double d = log_density(t, Point{k * c.spacing}) - log_density(t, Point{0.0});
        CHECK(d == doctest::Approx(k * std::log(c.weight_decay)).epsilon(1e-9));
    }
}

TEST_CASE("island comb with dims=1 equals the plain mixture") {
    IslandComb c{5, 1.25, 0.2, 0.5, 1, 1.0};
    GaussianMixture1D m = c.comb_mixture();
    TargetSpec tc{c}, tm{m};
    for (double x : {-0.7, 0.0, 0.9, 2.5, 6.0})
        CHECK(log_density(tc, Point{x}) == log_density(tm, Point{x}));
}

TEST_CASE("nuisance dimensions factorize") {
    IslandComb c{3, 1.0, 0.2, 0.5, 3, 0.8};
    TargetSpec t{c};
    IslandComb c1 = c;
    c1.dims = 1;
    TargetSpec t1{c1};
    double got = log_density(t, Point{0.5, 0.3, -0.2});
    double want = log_density(t1, Point{0.5}) + normal_logpdf(0.3, 0.0, 0.8) +
                  normal_logpdf(-0.2, 0.0, 0.8);
    CHECK(got == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("cdf basics and consistency with the density") {
    GaussianMixture1D g{{1.0, 1.0}, {-1.0, 1.0}, {0.4, 0.4}};
    TargetSpec t{g};
    CHECK(cdf(t, 0.0) == doctest::Approx(0.5).epsilon(1e-12));  // symmetric mixture
    CHECK(cdf(t, 1e9) == doctest::Approx(1.0));
    CHECK(cdf(t, -1e9) == doctest::Approx(0.0));

    SUBCASE("matches numerical integration on a grid") {
        for (int i = 0; i < 100; ++i) {
            double x = -4.0 + 8.0 * i / 99.0;
            double num = testsupport::simpson(
                [&](double u) { return std::exp(log_density(t, Point{u})); }, -15.0, x, 4000);
            CHECK(cdf(t, x) == doctest::Approx(num).epsilon(1e-7));
        }
    }
    SUBCASE("derivative of cdf is the density (central differences)") {
        Rng rng(3);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        const double h = 1e-5;
        for (int i = 0; i < 50; ++i) {
            double x = unif(rng);
            double deriv = (cdf(t, x + h) - cdf(t, x - h)) / (2.0 * h);
            double dens = std::exp(log_density(t, Point{x}));
            CHECK(deriv == doctest::Approx(dens).epsilon(1e-6));
        }
    }
}

TEST_CASE("single gaussian cdf at the center is one half") {
    TargetSpec t{GaussianMixture1D{{2.0}, {0.7}, {0.3}}};
    CHECK(cdf(t, 0.7) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discrete lattice: exact point match, -inf elsewhere") {
    DiscreteLattice l{{-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25}};
    TargetSpec t{l};
    CHECK(log_density(t, Point{0.0}) == doctest::Approx(std::log(0.5)));
    CHECK(log_density(t, Point{0.5}) == kNegInf);
    CHECK_THROWS_AS((cdf(t, 0.0)), std::invalid_argument);
}

TEST_CASE("validation catches malformed targets") {
    CHECK_THROWS_AS((TargetSpec{GaussianMixture1D{{1.0}, {0.0}, {-1.0}}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TargetSpec{IslandComb{0, 1.0, 0.2, 0.5, 1, 1.0}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TargetSpec{DiscreteLattice{{0.0, 1.0}, {0.6, 0.6}}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((log_density(TargetSpec{IslandComb{3, 1.0, 0.2, 0.5, 2, 1.0}}, Point{0.0})), std::invalid_argument);
}
