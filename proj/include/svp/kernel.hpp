#ifndef SVP_KERNEL_HPP
#define SVP_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "svp/decay.hpp"
#include "svp/equilibria.hpp"
#include "svp/field.hpp"
#include "svp/norms.hpp"
#include "svp/numeric.hpp"
#include "svp/parallel.hpp"
#include "svp/penrose.hpp"
#include "svp/volterra_core.hpp"

namespace svp {

/// Resolvent tables G = K + K *_t G per spatial mode: Ghat(t_k, xi) on the
/// box dual lattice, physical slices on demand. Built by product-trapezoid
/// stepping at dt_step and recorded at the (possibly dyadic) table times.
struct KernelTables {
    SpatialGrid grid;
    std::vector<double> times;               // recorded times
    std::vector<std::vector<cplx>> ghat;     // [record][mode]
    std::vector<std::vector<double>> gphys;  // [record][point], filled by invert_to_physical
    double dt_step = 0.0;
    double margin_gate = 0.0;
    double richardson_err = 0.0;  // stepping-error estimate on probe modes

    int nrec() const { return static_cast<int>(times.size()); }
};

namespace detail {

inline std::vector<cplx> khat_trace(const EquilibriumProfile& p, const double* xi, int nsteps, double dt) {
    std::vector<cplx> K(nsteps + 1);
    for (int k = 0; k <= nsteps; ++k) K[k] = khat_t(p, k * dt, xi);
    return K;
}

}  // namespace detail

/// Per-mode Volterra resolvent on the full dual lattice. Radial profiles are
/// deduplicated by the integer norm of the mode index. The Penrose margin of
/// the profile gates the build.
inline KernelTables build_ghat(const EquilibriumProfile& p, const SpatialGrid& grid, double T, double dt,
                               const std::vector<double>& record_times, double penrose_margin_value) {
    if (penrose_margin_value <= 0.0)
        throw std::runtime_error("build_ghat: Penrose margin gate failed (margin <= 0)");
    KernelTables tab;
    tab.grid = grid;
    tab.times = record_times;
    tab.dt_step = dt;
    tab.margin_gate = penrose_margin_value;
    const int nsteps = static_cast<int>(std::llround(T / dt));
    std::vector<int> rec_idx(record_times.size());
    for (std::size_t i = 0; i < record_times.size(); ++i) {
        rec_idx[i] = static_cast<int>(std::llround(record_times[i] / dt));
        if (rec_idx[i] > nsteps || std::abs(rec_idx[i] * dt - record_times[i]) > 1e-9)
            throw std::invalid_argument("build_ghat: record times must sit on the stepping grid");
    }
    tab.ghat.assign(record_times.size(), std::vector<cplx>(grid.npoints()));

    const bool radial = p.is_radial();
    // group modes by their exact dedupe key
    std::map<std::vector<int>, std::vector<std::int64_t>> groups;
    std::vector<int> idx(grid.d);
    for (std::int64_t f = 0; f < grid.npoints(); ++f) {
        std::int64_t r = f;
        int norm2 = 0;
        std::vector<int> m(grid.d);
        for (int a = grid.d - 1; a >= 0; --a) {
            const int mi = grid.freq_index(static_cast<int>(r % grid.N));
            m[a] = mi;
            norm2 += mi * mi;
            r /= grid.N;
        }
        std::vector<int> key;
        if (radial) key = {norm2};
        else key = m;  // no dedupe for general profiles
        groups[key].push_back(f);
    }

    std::vector<std::vector<int>> keys;
    keys.reserve(groups.size());
    for (auto& kv : groups) keys.push_back(kv.first);

    parallel_for(0, keys.size(), [&](std::size_t gi) {
        const auto& members = groups[keys[gi]];
        std::vector<double> xi(grid.d);
        std::int64_t f0 = members.front();
        bin_freq(grid, f0, xi.data());
        auto K = detail::khat_trace(p, xi.data(), nsteps, dt);
        auto G = resolvent_build(K, dt);
        for (std::size_t r = 0; r < rec_idx.size(); ++r)
            for (auto f : members) tab.ghat[r][f] = G[rec_idx[r]];
    });

    // Richardson stepping-error probe on a few modes
    double rich = 0.0;
    std::vector<double> xi(grid.d, 0.0);
    for (double r : {M_PI / grid.L, 2 * M_PI / grid.L, grid.freq_max() / 2}) {
        xi[0] = r;
        auto K1 = detail::khat_trace(p, xi.data(), nsteps, dt);
        auto G1 = resolvent_build(K1, dt);
        auto K2 = detail::khat_trace(p, xi.data(), 2 * nsteps, dt / 2);
        auto G2 = resolvent_build(K2, dt / 2);
        double worst = 0.0;
        for (int k = 0; k <= nsteps; ++k) worst = std::max(worst, std::abs(G1[k] - G2[2 * k]));
        rich = std::max(rich, worst * 4.0 / 3.0);
    }
    tab.richardson_err = rich;
    return tab;
}

/// max over recorded times of |Ghat(t, 0)|; Lemma-level cancellation says the
/// zero mode vanishes identically.
inline double check_cancellation(const KernelTables& tab) {
    std::vector<int> mid(tab.grid.d, 0);
    // mode index 0 is the zero frequency in FFT order
    double worst = 0.0;
    for (const auto& slice : tab.ghat) worst = std::max(worst, std::abs(slice[0]));
    return worst;
}

/// Inverse transform of every recorded slice; returns the worst imaginary
/// residue (spectrum asymmetry indicator).
inline double invert_to_physical(KernelTables& tab) {
    tab.gphys.assign(tab.nrec(), {});
    double worst = 0.0;
    for (int r = 0; r < tab.nrec(); ++r) {
        Spectrum s(tab.grid);
        s.c = tab.ghat[r];
        double resid = 0.0;
        tab.gphys[r] = transform_inverse(s, &resid);
        worst = std::max(worst, resid);
    }
    return worst;
}

/// Causal time convolution (G *_{t,x} f) per mode with product-trapezoid
/// weights; f must live on the same box and a uniform time grid compatible
/// with the tables' recorded times.
inline SpaceTimeField convolve(const KernelTables& tab, const SpaceTimeField& f) {
    if (!(f.grid == tab.grid)) throw std::invalid_argument("convolve: grid mismatch");
    if (f.ntimes() != tab.nrec()) throw std::invalid_argument("convolve: time grid mismatch");
    const int nt = f.ntimes();
    const double dt = f.tg.dt(0);
    for (int k = 0; k + 1 < nt; ++k)
        if (std::abs(f.tg.dt(k) - dt) > 1e-12) throw std::invalid_argument("convolve: need uniform times");
    for (int k = 0; k < nt; ++k)
        if (std::abs(f.tg.t[k] - tab.times[k]) > 1e-9) throw std::invalid_argument("convolve: table times differ");

    // forward transform each slice
    std::vector<Spectrum> fh(nt);
    for (int k = 0; k < nt; ++k) fh[k] = transform_forward(f.grid, f.slice_copy(k).a);

    SpaceTimeField out(f.tg, f.grid, 1);
    std::vector<std::vector<cplx>> acc(nt, std::vector<cplx>(f.grid.npoints(), 0.0));
    parallel_for(0, static_cast<std::size_t>(f.grid.npoints()), [&](std::size_t m) {
        std::vector<cplx> G(nt), ff(nt);
        for (int k = 0; k < nt; ++k) {
            G[k] = tab.ghat[k][m];
            ff[k] = fh[k].c[m];
        }
        auto conv = convolve_causal(G, ff, dt);
        for (int k = 0; k < nt; ++k) acc[k][m] = conv[k];
    });
    for (int k = 0; k < nt; ++k) {
        Spectrum s(f.grid);
        s.c = std::move(acc[k]);
        auto phys = transform_inverse(s);
        std::copy(phys.begin(), phys.end(), out.slice(k));
    }
    return out;
}

/// Dispersive-decay audit of the physical kernel: fitted log-log slope of
/// ||grad^gamma G(t)||_{Linf} against -(d+gamma+1) over [T/8, T], the
/// empirical constant of the t^{d+gamma-1}(1+t)^2 envelope, and the weighted
/// L1 profile against its envelope.
inline DecayReport kernel_decay_audit(const KernelTables& tab, int gamma, double mtilde, double a0,
                                      double slope_tol) {
    if (tab.gphys.empty()) throw std::runtime_error("kernel_decay_audit: physical slices missing");
    const int d = tab.grid.d;
    DecayReport rep;
    rep.label = "kernel_decay_gamma" + std::to_string(gamma);
    const double T = tab.times.back();
    rep.fit_lo = T / 8.0;
    rep.fit_hi = T;
    rep.slope_target = -(d + gamma + 1);
    rep.slope_tol = slope_tol;

    int count_window = 0;
    for (double t : tab.times)
        if (t >= rep.fit_lo && t <= rep.fit_hi) ++count_window;
    const double decades = std::log10(rep.fit_hi / rep.fit_lo);
    if (count_window < static_cast<int>(4 * decades))
        throw std::invalid_argument("kernel_decay_audit: fewer than 4 dyadic samples per decade");

    for (int r = 0; r < tab.nrec(); ++r) {
        const double t = tab.times[r];
        if (t <= 0) continue;
        double sup = 0.0;
        if (gamma == 0) {
            for (double v : tab.gphys[r]) sup = std::max(sup, std::abs(v));
        } else {
            // spectral gradient magnitude
            Spectrum s(tab.grid);
            s.c = tab.ghat[r];
            std::vector<double> mag(tab.grid.npoints(), 0.0);
            for (int ax = 0; ax < d; ++ax) {
                Spectrum ds = s;
                spectral_derivative(ds, ax);
                auto g = transform_inverse(ds);
                for (std::size_t i = 0; i < g.size(); ++i) mag[i] += g[i] * g[i];
            }
            for (double m2 : mag) sup = std::max(sup, std::sqrt(m2));
        }
        DecayRow row;
        row.t = t;
        row.value = sup;
        row.envelope = mtilde / (std::pow(t, d + gamma - 1) * (1 + t) * (1 + t));
        row.ratio = row.envelope > 0 ? row.value / row.envelope : 0.0;
        rep.rows.push_back(row);
    }
    finish_report(rep);
    return rep;
}

/// || |x|^{a0} grad^gamma G(t) ||_{L1} rows against the weighted envelope.
inline std::vector<DecayRow> kernel_weighted_l1_profile(const KernelTables& tab, int gamma, double mtilde,
                                                        double a0) {
    if (tab.gphys.empty()) throw std::runtime_error("kernel_weighted_l1_profile: physical slices missing");
    const int d = tab.grid.d;
    std::vector<DecayRow> rows;
    std::vector<int> idx(d);
    for (int r = 0; r < tab.nrec(); ++r) {
        const double t = tab.times[r];
        if (t <= 0) continue;
        std::vector<double> mag;
        if (gamma == 0) {
            mag.assign(tab.gphys[r].begin(), tab.gphys[r].end());
            for (auto& v : mag) v = std::abs(v);
        } else {
            Spectrum s(tab.grid);
            s.c = tab.ghat[r];
            mag.assign(tab.grid.npoints(), 0.0);
            for (int ax = 0; ax < d; ++ax) {
                Spectrum ds = s;
                spectral_derivative(ds, ax);
                auto g = transform_inverse(ds);
                for (std::size_t i = 0; i < g.size(); ++i) mag[i] += g[i] * g[i];
            }
            for (auto& v : mag) v = std::sqrt(v);
        }
        double acc = 0.0;
        for (std::int64_t f = 0; f < tab.grid.npoints(); ++f) {
            unflatten(f, d, tab.grid.N, idx.data());
            double x2 = 0.0;
            for (int axx = 0; axx < d; ++axx) {
                const double x = tab.grid.node(idx[axx]);
                x2 += x * x;
            }
            acc += std::pow(std::sqrt(x2), a0) * mag[f];
        }
        acc *= tab.grid.cell_volume();
        DecayRow row;
        row.t = t;
        row.value = acc;
        row.envelope = mtilde / (std::pow(t, gamma - 1.0 - a0) * (1 + t) * (1 + t)) +
                       (t <= 1.0 ? mtilde : 0.0) +
                       (std::abs(gamma - 1.0 - a0) < 1e-12 ? mtilde * std::max(0.0, std::log(1.0 / t)) : 0.0);
        row.ratio = row.envelope > 0 ? row.value / row.envelope : 0.0;
        rows.push_back(row);
    }
    return rows;
}

/// sup over a battery of test fields of ||G * f||_a / ||f||_a (empirical
/// bound for the convolution map).
inline double bounded_map_audit(const KernelTables& tab, const std::vector<SpaceTimeField>& battery,
                                double a, const ShiftSet& shifts = {}) {
    double worst = 0.0;
    for (const auto& f : battery) {
        const double nf = time_weighted_norm(f, a, 0, shifts).value;
        if (nf == 0) continue;
        auto gf = convolve(tab, f);
        worst = std::max(worst, time_weighted_norm(gf, a, 0, shifts).value / nf);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Radial high-resolution path (wrap-free decay measurements).

/// Ghat(t, r) on a log-spaced radius ladder; synthesized onto large box
/// lattices by cubic-spline interpolation in r.
struct RadialGhatTable {
    std::vector<double> radii;            // log-spaced, ascending
    std::vector<double> times;            // recorded times
    std::vector<std::vector<cplx>> ghat;  // [radius][record]
    double dt_step = 0.0;
};

inline RadialGhatTable build_ghat_radial(const EquilibriumProfile& p, double T, double dt,
                                         const std::vector<double>& record_times, double r_min, double r_max,
                                         int nodes_per_octave, double penrose_margin_value) {
    if (penrose_margin_value <= 0.0) throw std::runtime_error("build_ghat_radial: Penrose margin gate failed");
    if (!p.is_radial()) throw std::invalid_argument("build_ghat_radial: profile must be radial");
    RadialGhatTable tab;
    tab.times = record_times;
    tab.dt_step = dt;
    const int octaves = static_cast<int>(std::ceil(std::log2(r_max / r_min)));
    for (int j = 0; j <= octaves * nodes_per_octave; ++j)
        tab.radii.push_back(r_min * std::pow(2.0, double(j) / nodes_per_octave));
    const int nsteps = static_cast<int>(std::llround(T / dt));
    std::vector<int> rec_idx(record_times.size());
    for (std::size_t i = 0; i < record_times.size(); ++i) {
        rec_idx[i] = static_cast<int>(std::llround(record_times[i] / dt));
        if (std::abs(rec_idx[i] * dt - record_times[i]) > 1e-9)
            throw std::invalid_argument("build_ghat_radial: record times must sit on the stepping grid");
    }
    tab.ghat.assign(tab.radii.size(), std::vector<cplx>(record_times.size()));
    parallel_for(0, tab.radii.size(), [&](std::size_t ri) {
        std::vector<double> xi(p.d, 0.0);
        xi[0] = tab.radii[ri];
        auto K = detail::khat_trace(p, xi.data(), nsteps, dt);
        auto G = resolvent_build(K, dt);
        for (std::size_t r = 0; r < rec_idx.size(); ++r) tab.ghat[ri][r] = G[rec_idx[r]];
    });
    return tab;
}

/// Spline-in-radius synthesis of one recorded slice onto a box lattice.
inline Spectrum radial_slice_spectrum(const RadialGhatTable& tab, int record, const SpatialGrid& grid) {
    std::vector<double> re(tab.radii.size()), im(tab.radii.size());
    for (std::size_t i = 0; i < tab.radii.size(); ++i) {
        re[i] = tab.ghat[i][record].real();
        im[i] = tab.ghat[i][record].imag();
    }
    CubicSpline sre(tab.radii, re), sim(tab.radii, im);
    Spectrum s(grid);
    parallel_for(0, static_cast<std::size_t>(grid.npoints()), [&](std::size_t f) {
        const double r = std::sqrt(bin_k2(grid, f));
        if (r == 0.0) {
            s.c[f] = 0.0;  // zero-mode cancellation
        } else if (r < tab.radii.front() || r > tab.radii.back()) {
            s.c[f] = (r < tab.radii.front()) ? cplx(sre(tab.radii.front()), sim(tab.radii.front())) * (r / tab.radii.front())
                                             : cplx(0.0, 0.0);
        } else {
            s.c[f] = cplx(sre(r), sim(r));
        }
    });
    return s;
}

/// Dispersive-decay audit running on per-slice adaptive boxes
/// L(t) = max(L0, 2.2 t): the box tracks the kernel's linear spreading so no
/// recorded time is wrap-contaminated, while small times keep enough
/// bandwidth. Returns the sup-norm report; weighted-L1 rows optional.
inline DecayReport kernel_decay_audit_radial(const RadialGhatTable& rad, int d, int gamma, double mtilde,
                                             double a0, double slope_tol, int N = 256, double L0 = 48.0,
                                             std::vector<DecayRow>* weighted_l1 = nullptr) {
    DecayReport rep;
    rep.label = "kernel_decay_radial_gamma" + std::to_string(gamma);
    const double T = rad.times.back();
    rep.fit_lo = T / 8.0;
    rep.fit_hi = T;
    rep.slope_target = -(d + gamma + 1);
    rep.slope_tol = slope_tol;
    if (weighted_l1) weighted_l1->clear();

    for (std::size_t r = 0; r < rad.times.size(); ++r) {
        const double t = rad.times[r];
        if (t <= 0) continue;
        SpatialGrid grid(d, std::max(L0, 2.2 * t), N);
        auto spec = radial_slice_spectrum(rad, static_cast<int>(r), grid);
        double sup = 0.0, wl1 = 0.0;
        std::vector<double> mag;
        if (gamma == 0) {
            mag = transform_inverse(spec);
            for (auto& v : mag) v = std::abs(v);
        } else {
            mag.assign(grid.npoints(), 0.0);
            for (int ax = 0; ax < d; ++ax) {
                Spectrum ds = spec;
                spectral_derivative(ds, ax);
                auto g = transform_inverse(ds);
                for (std::size_t i = 0; i < g.size(); ++i) mag[i] += g[i] * g[i];
            }
            for (auto& v : mag) v = std::sqrt(v);
        }
        std::vector<int> idx(d);
        for (std::int64_t f = 0; f < grid.npoints(); ++f) {
            sup = std::max(sup, mag[f]);
            if (weighted_l1) {
                unflatten(f, d, grid.N, idx.data());
                double x2 = 0.0;
                for (int ax = 0; ax < d; ++ax) {
                    const double x = grid.node(idx[ax]);
                    x2 += x * x;
                }
                wl1 += std::pow(std::sqrt(x2), a0) * mag[f];
            }
        }
        DecayRow row;
        row.t = t;
        row.value = sup;
        row.envelope = mtilde / (std::pow(t, d + gamma - 1) * (1 + t) * (1 + t));
        row.ratio = row.envelope > 0 ? row.value / row.envelope : 0.0;
        rep.rows.push_back(row);
        if (weighted_l1) {
            DecayRow wrow;
            wrow.t = t;
            wrow.value = wl1 * grid.cell_volume();
            wrow.envelope = mtilde / (std::pow(t, gamma - 1.0 - a0) * (1 + t) * (1 + t)) +
                            (t <= 1.0 ? mtilde : 0.0);
            wrow.ratio = wrow.envelope > 0 ? wrow.value / wrow.envelope : 0.0;
            weighted_l1->push_back(wrow);
        }
    }
    finish_report(rep);
    return rep;
}


}  // namespace svp

#endif
