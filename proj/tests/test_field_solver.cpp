#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "svp/field_solver.hpp"

using namespace svp;

TEST_CASE("assumption A check") {
    auto screened = nonlinearity_screened();
    REQUIRE(assumption_a_check(screened) == 0.0);

    auto massless = nonlinearity_massless_electrons();
    const double ca = assumption_a_check(massless);
    REQUIRE(std::isfinite(ca));
    // |A(r)/r^2| -> 1/2 as r -> 0 and the sup over [-1,1] is attained at r=-1... r=1 side
    REQUIRE(std::abs(massless.A(1e-5) / 1e-10) == Catch::Approx(0.5).margin(1e-4));
    REQUIRE(ca >= 0.5);

    // unscreened A(r) = r rejected: A(r)/r^2 unbounded at 0
    auto bad = nonlinearity_custom([](double r) { return r; }, [](double) { return 1.0; },
                                   [](double) { return 0.0; });
    REQUIRE_THROWS_AS(assumption_a_check(bad), std::domain_error);
}

TEST_CASE("solve_potential: zero, diagonal mode, perturbative oracle") {
    SpatialGrid g(3, 6.0, 16);
    auto screened = nonlinearity_screened();

    SpatialField zero(g);
    auto s0 = solve_potential(zero, screened);
    REQUIRE(max_abs(s0.U.a) == 0.0);

    const double k0 = 2 * M_PI / g.L;
    auto rho = sample(g, [&](const double* x) { return std::cos(k0 * (x[0] - x[1])); });
    auto s1 = solve_potential(rho, screened);
    const double k2 = 2 * k0 * k0;
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        worst = std::max(worst, std::abs(s1.U.a[i] - rho.a[i] / (1 + k2)));
    REQUIRE(worst <= 1e-12);

    // massless electrons at small amplitude vs second-order expansion
    auto massless = nonlinearity_massless_electrons();
    assumption_a_check(massless);
    SpatialField rho_small = rho;
    for (auto& v : rho_small.a) v *= 1e-3;
    auto s2 = solve_potential(rho_small, massless);
    auto U0 = screened_inverse(rho_small);
    SpatialField au0(g);
    for (std::size_t i = 0; i < au0.size(); ++i) au0.a[i] = massless.A(U0.a[i]);
    auto corr = screened_inverse(au0);
    double werr = 0.0;
    for (std::size_t i = 0; i < corr.size(); ++i)
        werr = std::max(werr, std::abs(s2.U.a[i] - (U0.a[i] + corr.a[i])));
    REQUIRE(werr <= 1e-8);

    // discrete equation residual
    REQUIRE(s2.residual <= 1e-10 * std::max(1.0, max_abs(rho_small.a)));

    // geometric convergence: update norms decrease under the certified contraction
    REQUIRE(s2.update_norm <= 1e-12 * std::max(1.0, max_abs(rho_small.a)));

    // non-contraction failure names the bound
    SpatialField rho_big = rho;
    for (auto& v : rho_big.a) v *= 30.0;
    REQUIRE_THROWS_AS(solve_potential(rho_big, massless), std::runtime_error);
}

TEST_CASE("electric field") {
    SpatialGrid g(3, 5.0, 16);
    SpatialField cst(g, 3.3);
    auto E0 = electric_field(cst);
    for (const auto& comp : E0) REQUIRE(max_abs(comp.a) <= 1e-13);

    const double k0 = M_PI / g.L * 3;
    auto U = sample(g, [&](const double* x) { return std::sin(k0 * x[2]); });
    auto E = electric_field(U);
    auto want = sample(g, [&](const double* x) { return -k0 * std::cos(k0 * x[2]); });
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(E[2].a[i] - want.a[i]));
    REQUIRE(worst <= 1e-10 * k0);
    REQUIRE(max_abs(E[0].a) <= 1e-12);

    // curl-free: d_i E_j - d_j E_i = 0 spectrally on a random smooth U
    std::mt19937 rng(9);
    std::normal_distribution<double> nd;
    auto Ur = sample(g, [&](const double* x) {
        return std::cos(M_PI / g.L * x[0] + 0.3) * std::sin(2 * M_PI / g.L * x[1]);
    });
    (void)nd;
    auto Er = electric_field(Ur);
    auto d0E1 = electric_field(Er[1]);  // = -grad of E_1
    auto d1E0 = electric_field(Er[0]);
    double curl = 0.0;
    for (std::size_t i = 0; i < Ur.size(); ++i)
        curl = std::max(curl, std::abs(d0E1[0].a[i] - d1E0[1].a[i]));
    REQUIRE(curl <= 1e-10);

    // zero spatial mean of E components when U has one
    double mean = 0.0;
    for (double v : Er[0].a) mean += v;
    REQUIRE(std::abs(mean) * g.cell_volume() <= 1e-10);
}

TEST_CASE("elliptic gain audit") {
    SpatialGrid g(3, 5.0, 16);
    // single mode k: j=0 ratio is exactly 1/(1+|k|^2)
    const double k0 = 2 * M_PI / g.L;
    auto mode = sample(g, [&](const double* x) { return std::cos(k0 * x[0]); });
    auto U = screened_inverse(mode);
    REQUIRE(max_abs(U.a) == Catch::Approx(1.0 / (1 + k0 * k0)).epsilon(1e-10));

    std::vector<SpatialField> battery;
    for (double w : {0.8, 1.2, 1.7}) {
        battery.push_back(sample(g, [&](const double* x) {
            return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * w * w));
        }));
    }
    const double c0 = elliptic_gain_audit(battery, p_infty, 0.7);
    REQUIRE(std::isfinite(c0));
    REQUIRE(c0 > 0.0);
    // skip-zero behavior
    std::vector<SpatialField> zb{SpatialField(g)};
    REQUIRE(elliptic_gain_audit(zb, 1, 0.7) == 0.0);
}
