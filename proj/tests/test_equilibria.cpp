#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "svp/equilibria.hpp"
#include "svp/field.hpp"

using namespace svp;

TEST_CASE("maxwellian basics") {
    auto p = maxwellian(3, 1.0);
    const double zero[3] = {0, 0, 0};
    REQUIRE(p.muhat(zero).real() == Catch::Approx(1.0));
    REQUIRE(p.muhat(zero).imag() == 0.0);
    REQUIRE(p.mu(zero) == Catch::Approx(std::pow(2 * M_PI, -1.5)));

    // quadrature mass on a velocity grid
    VelocityGrid gv(3, 9.0, 32);
    double mass = 0.0;
    std::vector<int> idx(3);
    std::vector<double> v(3);
    for (std::int64_t f = 0; f < gv.npoints(); ++f) {
        unflatten(f, 3, gv.N, idx.data());
        for (int a = 0; a < 3; ++a) v[a] = gv.node(idx[a]);
        mass += p.mu(v.data());
    }
    mass *= gv.weight();
    REQUIRE(std::abs(mass - 1.0) <= 1e-8);

    REQUIRE_THROWS_AS(maxwellian(3, -1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EquilibriumProfile(3, {GaussianComponent{1.0, {0, 0, 0}, 1.0}}, 2.5),
                      std::invalid_argument);  // N <= d refused
}

TEST_CASE("double maxwellian degenerate cases and modulation") {
    auto mono = maxwellian(3, 1.0);
    auto degen = double_maxwellian(3, 0.0, 0.5, 1.0);
    std::mt19937 rng(4);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        double v[3] = {2 * nd(rng), 2 * nd(rng), 2 * nd(rng)};
        REQUIRE(degen.mu(v) == Catch::Approx(mono.mu(v)).margin(1e-15));
        double eta[3] = {nd(rng), nd(rng), nd(rng)};
        // lambda = 1: shifted Maxwellian has |muhat| unchanged in modulus
        auto shifted = double_maxwellian(3, 3.0, 1.0, 1.0);
        REQUIRE(std::abs(shifted.muhat(eta)) == Catch::Approx(std::abs(mono.muhat(eta))).margin(1e-15));
    }

    // positivity and |muhat| <= muhat(0)
    auto two = double_maxwellian(3, 3.0, 0.5, 1.0);
    const double zero[3] = {0, 0, 0};
    for (int trial = 0; trial < 50; ++trial) {
        double v[3] = {6 * nd(rng), 6 * nd(rng), 6 * nd(rng)};
        REQUIRE(two.mu(v) >= 0.0);
        REQUIRE(std::abs(two.muhat(v)) <= two.muhat(zero).real() + 1e-15);
    }
}

TEST_CASE("numerical muhat matches closed form on the dual grid") {
    auto p = double_maxwellian(3, 1.5, 0.5, 1.0);
    SpatialGrid g(3, 14.0, 64);
    auto samples = sample(g, [&](const double* v) { return p.mu(v); });
    auto sp = transform_forward(g, samples.a);
    double worst = 0.0;
    double k[3];
    for (std::int64_t f = 0; f < g.npoints(); ++f) {
        bin_freq(g, f, k);
        worst = std::max(worst, std::abs(sp.c[f] - p.muhat(k)));
    }
    REQUIRE(worst <= 1e-9);
}

TEST_CASE("gradient and hessian against finite differences") {
    auto p = double_maxwellian(3, 2.0, 0.3, 0.8);
    std::mt19937 rng(11);
    std::normal_distribution<double> nd;
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        double v[3] = {nd(rng), nd(rng), nd(rng)};
        double grad[3], hess[9];
        p.grad_mu(v, grad);
        p.hess_mu(v, hess);
        for (int a = 0; a < 3; ++a) {
            double vp[3] = {v[0], v[1], v[2]}, vm[3] = {v[0], v[1], v[2]};
            vp[a] += h;
            vm[a] -= h;
            REQUIRE(grad[a] == Catch::Approx((p.mu(vp) - p.mu(vm)) / (2 * h)).margin(1e-8));
            double gp[3], gm[3];
            p.grad_mu(vp, gp);
            p.grad_mu(vm, gm);
            for (int b = 0; b < 3; ++b)
                REQUIRE(hess[b * 3 + a] == Catch::Approx((gp[b] - gm[b]) / (2 * h)).margin(1e-7));
        }
    }
}

TEST_CASE("weighted norms of grad mu") {
    EquilibriumProfile zero(3, {}, 5.0);
    REQUIRE(weighted_norm_grad_mu(zero, 0.0, 0).value == 0.0);

    auto p = maxwellian(3, 1.0);
    // radial oracle: int |grad mu| dv = (2pi)^{-3/2} 4 pi int r^3 e^{-r^2/2} dr = 4/sqrt(2 pi)
    double oracle = 0.0;
    {
        const int n = 200000;
        const double R = 14.0, dr = R / n;
        for (int i = 0; i < n; ++i) {
            const double r = (i + 0.5) * dr;
            oracle += r * r * r * std::exp(-r * r / 2) * dr;
        }
        oracle *= 4 * M_PI / std::pow(2 * M_PI, 1.5);
    }
    REQUIRE(oracle == Catch::Approx(4.0 / std::sqrt(2 * M_PI)).epsilon(1e-8));
    // tensor-grid value; |grad mu| has a conical point at v = 0 which limits
    // the trapezoid rule to ~h^2 there, so the regression window is 1e-3
    const double got = weighted_norm_grad_mu(p, 0.0, 0).value;
    REQUIRE(got == Catch::Approx(oracle).epsilon(1e-3));

    // weight monotonicity in alpha and in beta
    const double a1 = weighted_norm_grad_mu(p, 1.0, 0).value;
    const double a2 = weighted_norm_grad_mu(p, 2.0, 0).value;
    REQUIRE(a2 >= a1);
    REQUIRE(a1 >= got);
    const double b1 = weighted_norm_grad_mu(p, 1.0, 1).value;
    REQUIRE(b1 >= a1);
}

TEST_CASE("theorem constants finite and ordered") {
    auto p = maxwellian(3, 1.0);
    const double mb0 = mbar_gamma(p, 0);
    REQUIRE(std::isfinite(mb0));
    REQUIRE(mb0 > 0.0);
    const double mt0 = mtilde_gamma(p, 0);
    REQUIRE(mt0 == Catch::Approx(mb0 * std::pow(1 + mb0, 4)));
    const double ms = mstar(p);
    REQUIRE(std::isfinite(ms));
    REQUIRE(ms > 1.0 / (p.decay_N - 3));
    REQUIRE_THROWS_AS(mtilde_gamma(p, 2), std::invalid_argument);
}
