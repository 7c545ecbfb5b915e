#ifndef SVP_FIELD_HPP
#define SVP_FIELD_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svp/fft.hpp"
#include "svp/grid.hpp"

namespace svp {

/// One scalar spatial slice.
struct SpatialField {
    SpatialGrid grid;
    std::vector<double> a;

    SpatialField() = default;
    explicit SpatialField(const SpatialGrid& g, double fill = 0.0) : grid(g), a(g.npoints(), fill) {}

    double& operator[](std::size_t i) { return a[i]; }
    const double& operator[](std::size_t i) const { return a[i]; }
    std::size_t size() const { return a.size(); }
};

/// Scalar or d-vector field on (time grid) x (spatial grid); slice-major
/// layout, components contiguous inside a slice.
struct SpaceTimeField {
    TimeGrid tg;
    SpatialGrid grid;
    int ncomp = 1;
    std::vector<double> a;

    SpaceTimeField() = default;
    SpaceTimeField(const TimeGrid& t, const SpatialGrid& g, int nc = 1)
        : tg(t), grid(g), ncomp(nc), a(static_cast<std::size_t>(t.t.size()) * nc * g.npoints(), 0.0) {}

    std::size_t slice_stride() const { return static_cast<std::size_t>(ncomp) * grid.npoints(); }
    double* slice(int k, int comp = 0) { return a.data() + slice_stride() * k + static_cast<std::size_t>(comp) * grid.npoints(); }
    const double* slice(int k, int comp = 0) const {
        return a.data() + slice_stride() * k + static_cast<std::size_t>(comp) * grid.npoints();
    }
    SpatialField slice_copy(int k, int comp = 0) const {
        SpatialField f(grid);
        const double* s = slice(k, comp);
        std::copy(s, s + grid.npoints(), f.a.begin());
        return f;
    }
    int ntimes() const { return static_cast<int>(tg.t.size()); }
};

/// Samples on (x grid) x (v grid); v runs fastest.
struct PhaseField {
    SpatialGrid gx;
    VelocityGrid gv;
    std::vector<double> a;

    PhaseField() = default;
    PhaseField(const SpatialGrid& x, const VelocityGrid& v)
        : gx(x), gv(v), a(static_cast<std::size_t>(x.npoints()) * v.npoints(), 0.0) {}

    double& at(std::int64_t ix, std::int64_t iv) { return a[static_cast<std::size_t>(ix) * gv.npoints() + iv]; }
    const double& at(std::int64_t ix, std::int64_t iv) const {
        return a[static_cast<std::size_t>(ix) * gv.npoints() + iv];
    }
};

/// Pointwise sampling. Rejects non-finite values naming the offending node.
template <class Fn>
SpatialField sample(const SpatialGrid& g, Fn&& fn) {
    SpatialField out(g);
    std::vector<int> idx(g.d);
    std::vector<double> x(g.d);
    for (std::int64_t f = 0; f < g.npoints(); ++f) {
        unflatten(f, g.d, g.N, idx.data());
        for (int a = 0; a < g.d; ++a) x[a] = g.node(idx[a]);
        const double v = fn(x.data());
        if (!std::isfinite(v)) {
            std::string where = "(";
            for (int a = 0; a < g.d; ++a) where += std::to_string(x[a]) + (a + 1 < g.d ? "," : ")");
            throw std::domain_error("sample: non-finite value at x=" + where);
        }
        out.a[f] = v;
    }
    return out;
}

template <class Fn>
PhaseField sample_phase(const SpatialGrid& gx, const VelocityGrid& gv, Fn&& fn) {
    PhaseField out(gx, gv);
    std::vector<int> ix(gx.d), iv(gv.d);
    std::vector<double> x(gx.d), v(gv.d);
    for (std::int64_t fx = 0; fx < gx.npoints(); ++fx) {
        unflatten(fx, gx.d, gx.N, ix.data());
        for (int a = 0; a < gx.d; ++a) x[a] = gx.node(ix[a]);
        for (std::int64_t fv = 0; fv < gv.npoints(); ++fv) {
            unflatten(fv, gv.d, gv.N, iv.data());
            for (int a = 0; a < gv.d; ++a) v[a] = gv.node(iv[a]);
            const double val = fn(x.data(), v.data());
            if (!std::isfinite(val)) throw std::domain_error("sample_phase: non-finite value");
            out.at(fx, fv) = val;
        }
    }
    return out;
}

/// rho(x) = integral f(x,v) dv by the velocity quadrature.
inline SpatialField integrate_velocity(const PhaseField& f) {
    SpatialField out(f.gx);
    const double w = f.gv.weight();
    const std::int64_t nv = f.gv.npoints();
    for (std::int64_t ix = 0; ix < f.gx.npoints(); ++ix) {
        double s = 0.0;
        const double* row = f.a.data() + static_cast<std::size_t>(ix) * nv;
        for (std::int64_t iv = 0; iv < nv; ++iv) s += row[iv];
        out.a[ix] = s * w;
    }
    return out;
}

inline double quadrature_mass(const SpatialField& f) {
    double s = 0.0;
    for (double v : f.a) s += v;
    return s * f.grid.cell_volume();
}

inline double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Trigonometric interpolation of a spectrum at one arbitrary point (exact
/// for band-limited data). Per-axis phasor tables keep the cost at
/// O(d N + N^d) multiplies per call.
inline double eval_trig(const Spectrum& s, const double* x) {
    const auto& g = s.grid;
    const int d = g.d, N = g.N;
    // phasor[a][m] = exp(i k_m x_a)
    static thread_local std::vector<std::complex<double>> phasor;
    phasor.assign(static_cast<std::size_t>(d) * N, {1.0, 0.0});
    for (int a = 0; a < d; ++a) {
        const std::complex<double> w = std::polar(1.0, M_PI / g.L * x[a]);
        std::complex<double> cur = {1.0, 0.0};
        for (int m = 0; m < N / 2; ++m) {
            phasor[a * N + m] = cur;
            cur *= w;
        }
        const std::complex<double> wneg = std::conj(w);
        cur = std::pow(wneg, N / 2);
        for (int m = N / 2; m < N; ++m) {
            phasor[a * N + m] = cur;
            cur *= w;
        }
    }
    std::complex<double> acc = 0.0;
    if (d == 3) {
        const std::complex<double>* p0 = phasor.data();
        const std::complex<double>* p1 = phasor.data() + N;
        const std::complex<double>* p2 = phasor.data() + 2 * N;
        std::int64_t f = 0;
        for (int m0 = 0; m0 < N; ++m0) {
            const std::complex<double> a0 = p0[m0];
            for (int m1 = 0; m1 < N; ++m1) {
                const std::complex<double> a01 = a0 * p1[m1];
                std::complex<double> inner = 0.0;
                for (int m2 = 0; m2 < N; ++m2) inner += s.c[f++] * p2[m2];
                acc += a01 * inner;
            }
        }
    } else {
        std::vector<int> idx(d);
        for (std::int64_t f = 0; f < static_cast<std::int64_t>(s.size()); ++f) {
            unflatten(f, d, N, idx.data());
            std::complex<double> ph = {1.0, 0.0};
            for (int a = 0; a < d; ++a) ph *= phasor[a * N + idx[a]];
            acc += s.c[f] * ph;
        }
    }
    return acc.real() / g.box_volume();
}

}  // namespace svp

#endif
