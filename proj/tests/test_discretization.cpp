#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "svp/field.hpp"
#include "svp/fft.hpp"
#include "svp/grid.hpp"

using namespace svp;

namespace {
double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }
}  // namespace

TEST_CASE("grid invariants") {
    SpatialGrid g(3, 12.0, 16);
    REQUIRE(g.spacing() == Catch::Approx(1.5));
    REQUIRE(g.node(0) == Catch::Approx(-12.0));
    // frequency 0 is a grid point
    REQUIRE(g.freq(0) == 0.0);
    REQUIRE(g.freq_max() == Catch::Approx(M_PI * 8 / 12.0));
    REQUIRE_THROWS_AS(SpatialGrid(3, 12.0, 15), std::invalid_argument);
    REQUIRE_THROWS_AS(SpatialGrid(3, -1.0, 16), std::invalid_argument);

    TimeGrid tg = TimeGrid::uniform(16.0, 64);
    REQUIRE(tg.t.front() == 0.0);
    REQUIRE(tg.t.back() == 16.0);
    REQUIRE(tg.is_uniform());
    TimeGrid gg = TimeGrid::geometric(1.0, 64.0, 25);
    REQUIRE(gg.t.front() == 0.0);
    REQUIRE(gg.t[1] == Catch::Approx(1.0));
    REQUIRE(gg.t.back() == Catch::Approx(64.0));
    REQUIRE_THROWS(TimeGrid({0.0, 1.0, 1.0}));
    REQUIRE_THROWS(TimeGrid({0.5, 1.0}));
}

TEST_CASE("sample: zero, single mode, Gaussian mass") {
    SpatialGrid g(3, 12.0, 16);
    auto zero = sample(g, [](const double*) { return 0.0; });
    REQUIRE(max_abs(zero.a) == 0.0);

    // fn = cos(k.x) with k on the dual grid -> spectrum supported on +-k only
    const double k0 = M_PI / g.L * 2.0;
    auto cosf = sample(g, [&](const double* x) { return std::cos(k0 * x[0]); });
    auto sp = transform_forward(g, cosf.a);
    double on = 0.0, off = 0.0;
    for (std::int64_t f = 0; f < g.npoints(); ++f) {
        double k[3];
        bin_freq(g, f, k);
        const bool carrier = (std::abs(std::abs(k[0]) - k0) < 1e-12 && k[1] == 0.0 && k[2] == 0.0);
        (carrier ? on : off) = std::max(carrier ? on : off, std::abs(sp.c[f]));
    }
    REQUIRE(on > 0.0);
    REQUIRE(off <= 1e-10 * on);

    // Gaussian mass on L = 12 box within 1e-8 of (2pi)^{3/2}; h <= 0.96 keeps
    // the Poisson-summation error below the tolerance
    SpatialGrid gm(3, 12.0, 32);
    auto gauss = sample(gm, [](const double* x) {
        return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    });
    const double want = std::pow(2.0 * M_PI, 1.5);
    REQUIRE(std::abs(quadrature_mass(gauss) - want) <= 1e-8 * want);

    REQUIRE_THROWS_AS(sample(g, [](const double* x) { return std::log(x[0] - 100.0); }), std::domain_error);
}

TEST_CASE("transform round trip, Parseval, Gaussian pair") {
    SpatialGrid g(3, 12.0, 16);
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    SpatialField f(g);
    for (auto& v : f.a) v = nd(rng);

    auto sp = transform_forward(g, f.a);
    double resid = 0.0;
    auto back = transform_inverse(sp, &resid);
    double worst = 0.0, scale = max_abs(f.a);
    for (std::size_t i = 0; i < back.size(); ++i) worst = std::max(worst, std::abs(back[i] - f.a[i]));
    REQUIRE(worst <= 1e-12 * scale);
    REQUIRE(resid <= 1e-12 * scale);

    // Parseval: h^d sum |g|^2 == (2L)^{-d} sum |ghat|^2
    double phys = 0.0, spec = 0.0;
    for (double v : f.a) phys += v * v;
    phys *= g.cell_volume();
    for (auto& z : sp.c) spec += std::norm(z);
    spec /= g.box_volume();
    REQUIRE(rel_err(spec, phys) <= 1e-10);

    // delta at origin -> flat spectrum
    SpatialField delta(g);
    std::vector<int> mid(3, g.N / 2);
    delta.a[flat_index(mid.data(), 3, g.N)] = 1.0;
    auto dsp = transform_forward(g, delta.a);
    double lo = 1e300, hi = 0.0;
    for (auto& z : dsp.c) {
        lo = std::min(lo, std::abs(z));
        hi = std::max(hi, std::abs(z));
    }
    REQUIRE(rel_err(hi, lo) <= 1e-12);

    // Gaussian -> Gaussian spectrum with reciprocal width:
    // FT of exp(-|x|^2/(2s^2)) is (2 pi s^2)^{d/2} exp(-s^2|k|^2/2);
    // needs kmax*s >~ 8 and L/s >~ 6 for the 1e-8 comparison
    const double s0 = 1.3;
    SpatialGrid gg(3, 8.0, 32);
    auto gauss = sample(gg, [&](const double* x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * s0 * s0));
    });
    auto gsp = transform_forward(gg, gauss.a);
    const double amp = std::pow(2 * M_PI * s0 * s0, 1.5);
    double werr = 0.0;
    for (std::int64_t fb = 0; fb < gg.npoints(); ++fb) {
        const double k2 = bin_k2(gg, fb);
        werr = std::max(werr, std::abs(gsp.c[fb].real() - amp * std::exp(-s0 * s0 * k2 / 2)));
    }
    REQUIRE(werr <= 1e-8 * amp);
}

TEST_CASE("integrate_velocity") {
    SpatialGrid gx(3, 6.0, 8);
    VelocityGrid gv(3, 7.0, 20);  // sigma << Lv so the tail stays under 1e-8

    auto f0 = sample_phase(gx, gv, [](const double*, const double*) { return 0.0; });
    REQUIRE(max_abs(integrate_velocity(f0).a) == 0.0);

    // Maxwellian in v, arbitrary profile in x -> density == g(x) within 1e-8
    auto gfun = [](const double* x) { return 1.0 + 0.3 * std::sin(M_PI / 6.0 * x[0]); };
    auto f = sample_phase(gx, gv, [&](const double* x, const double* v) {
        const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        return gfun(x) * std::exp(-v2 / 2) / std::pow(2 * M_PI, 1.5);
    });
    auto rho = integrate_velocity(f);
    auto gref = sample(gx, gfun);
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) worst = std::max(worst, std::abs(rho.a[i] - gref.a[i]));
    REQUIRE(worst <= 1e-8);
}

TEST_CASE("linearity and spectral differentiation") {
    SpatialGrid g(2, 5.0, 16);
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    SpatialField u(g), v(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u.a[i] = nd(rng);
        v.a[i] = nd(rng);
    }
    const double c1 = 0.7, c2 = -1.9;
    SpatialField w(g);
    for (std::size_t i = 0; i < u.size(); ++i) w.a[i] = c1 * u.a[i] + c2 * v.a[i];
    auto su = transform_forward(g, u.a), sv = transform_forward(g, v.a), sw = transform_forward(g, w.a);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < sw.size(); ++i) {
        worst = std::max(worst, std::abs(sw.c[i] - (c1 * su.c[i] + c2 * sv.c[i])));
        scale = std::max(scale, std::abs(sw.c[i]));
    }
    REQUIRE(worst <= 1e-12 * scale);

    // d/dx sin(kx) = k cos(kx) within 1e-10
    const double k0 = M_PI / g.L * 3.0;
    auto s = sample(g, [&](const double* x) { return std::sin(k0 * x[0]); });
    auto sp = transform_forward(g, s.a);
    spectral_derivative(sp, 0);
    auto ds = transform_inverse(sp);
    auto ref = sample(g, [&](const double* x) { return k0 * std::cos(k0 * x[0]); });
    double err = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) err = std::max(err, std::abs(ds[i] - ref.a[i]));
    REQUIRE(err <= 1e-10 * k0);
}

TEST_CASE("doubling N halves the sampled-Gaussian mass error") {
    // width chosen so the truncation tail is negligible and the grid error dominates
    const double want = std::pow(2.0 * M_PI, 0.5);
    auto mass_err = [&](int N) {
        SpatialGrid g(1, 4.0, N);
        auto f = sample(g, [](const double* x) { return std::exp(-x[0] * x[0] / 2); });
        return std::abs(quadrature_mass(f) - want);
    };
    const double e4 = mass_err(4), e8 = mass_err(8);
    REQUIRE(e8 <= 0.5 * e4);
}

TEST_CASE("spectral shift matches exact translate for band-limited data") {
    SpatialGrid g(2, 3.0, 16);
    const double k0 = M_PI / g.L;
    auto f = sample(g, [&](const double* x) { return std::cos(2 * k0 * x[0]) + 0.5 * std::sin(k0 * x[1]); });
    auto sp = transform_forward(g, f.a);
    const double sigma[2] = {0.37, -1.2};
    spectral_shift(sp, sigma);
    auto shifted = transform_inverse(sp);
    auto ref = sample(g, [&](const double* x) {
        return std::cos(2 * k0 * (x[0] - sigma[0])) + 0.5 * std::sin(k0 * (x[1] - sigma[1]));
    });
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(shifted[i] - ref.a[i]));
    REQUIRE(err <= 1e-12);
}
