#ifndef SVP_TRANSPORT_HPP
#define SVP_TRANSPORT_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "svp/equilibria.hpp"
#include "svp/field.hpp"
#include "svp/flow.hpp"
#include "svp/initial_data.hpp"
#include "svp/numeric.hpp"
#include "svp/parallel.hpp"

namespace svp {

inline double wrap_box(double z, double L) { return std::remainder(z, 2 * L); }

/// Free-transport density rho_1(t, x) = integral f0(x - tv, v) dv with the
/// foot point wrapped into the periodic box.
inline SpatialField free_density(const InitialData& f0, const SpatialGrid& gx, const VelocityGrid& gv,
                                 double t) {
    SpatialField out(gx);
    const int d = gx.d;
    parallel_for(0, static_cast<std::size_t>(gx.npoints()), [&](std::size_t fx) {
        std::vector<int> idx(d), ivx(d);
        std::vector<double> x(d), v(d), xa(d);
        unflatten(fx, d, gx.N, idx.data());
        for (int a = 0; a < d; ++a) x[a] = gx.node(idx[a]);
        double acc = 0.0;
        for (std::int64_t fv = 0; fv < gv.npoints(); ++fv) {
            unflatten(fv, d, gv.N, ivx.data());
            double v2 = 0.0;
            for (int a = 0; a < d; ++a) {
                v[a] = gv.node(ivx[a]);
                v2 += v[a] * v[a];
            }
            if (v2 > f0.v_radius * f0.v_radius) continue;
            for (int a = 0; a < d; ++a) xa[a] = wrap_box(x[a] - t * v[a], gx.L);
            acc += f0(xa.data(), v.data());
        }
        out.a[fx] = acc * gv.weight();
    });
    return out;
}

/// Multilinear interpolation of tabulated phase data, x periodic, v clamped
/// to zero outside the box (decaying data).
inline double interp_phase(const PhaseField& h, const double* x, const double* v) {
    const int d = h.gx.d;
    const int Nx = h.gx.N, Nv = h.gv.N;
    const double hx = h.gx.spacing(), hv = h.gv.spacing();
    // corner weights via per-axis (index, fraction)
    std::vector<int> ix(d), iv(d);
    std::vector<double> wx(d), wv(d);
    for (int a = 0; a < d; ++a) {
        const double sx = (x[a] + h.gx.L) / hx;
        double fl = std::floor(sx);
        wx[a] = sx - fl;
        ix[a] = static_cast<int>(fl) % Nx;
        if (ix[a] < 0) ix[a] += Nx;
        const double sv = (v[a] + h.gv.Lv) / hv;
        fl = std::floor(sv);
        wv[a] = sv - fl;
        const long vi = static_cast<long>(fl);
        if (vi < -1 || vi > Nv - 1) return 0.0;  // outside the decaying box
        iv[a] = static_cast<int>(vi);
    }
    double acc = 0.0;
    const int corners = 1 << (2 * d);
    std::vector<int> jx(d), jv(d);
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        bool dead = false;
        for (int a = 0; a < d; ++a) {
            const int bx = (c >> a) & 1;
            const int bv = (c >> (d + a)) & 1;
            w *= bx ? wx[a] : 1.0 - wx[a];
            w *= bv ? wv[a] : 1.0 - wv[a];
            jx[a] = (ix[a] + bx) % Nx;
            const int vv = iv[a] + bv;
            if (vv < 0 || vv >= Nv) dead = true;
            jv[a] = vv;
        }
        if (dead || w == 0.0) continue;
        acc += w * h.at(flat_index(jx.data(), d, Nx), flat_index(jv.data(), d, Nv));
    }
    return acc;
}

struct InitialTermResult {
    SpatialField value;
    std::int64_t excluded_points = 0;  // flagged-trajectory exclusions
};

/// I_h(t, x) = integral h(X_{0,t}(x,v), V_{0,t}(x,v)) dv over the flow's
/// recorded lattice; h tabulated (interpolated) or analytic.
inline InitialTermResult initial_term(const PhaseField& h, const FlowMaps& fm, int s_index) {
    const int d = fm.gx.d;
    if (fm.stride_x != 1) throw std::invalid_argument("initial_term: needs full x lattice");
    InitialTermResult res{SpatialField(fm.gx), 0};
    const int nv = fm.nrec_v();
    std::int64_t nrecv = 1;
    for (int a = 0; a < d; ++a) nrecv *= nv;
    const double wv = std::pow(fm.gv.spacing() * fm.stride_v, d);
    std::vector<double> X(d), V(d);
    std::vector<int> dummy(d);
    for (std::int64_t pt = 0; pt < fm.npoints(); ++pt) {
        if (fm.flagged[pt]) {
            ++res.excluded_points;
            continue;
        }
        fm.reconstruct(s_index, pt, X.data(), V.data());
        for (int a = 0; a < d; ++a) X[a] = wrap_box(X[a], fm.gx.L);
        const std::int64_t fx = pt / nrecv;
        res.value.a[fx] += interp_phase(h, X.data(), V.data());
    }
    for (auto& z : res.value.a) z *= wv;
    return res;
}

/// Decay gate of Lemma-type hypotheses on eta: <v>^N (|eta| + |grad eta| +
/// |hess eta|) must have decayed at the velocity-box edge relative to its
/// interior peak.
template <class Eta, class GradEta>
void check_eta_decay(const Eta& eta, const GradEta& geta, int d, double N, double Lv, double rel = 1e-4) {
    double peak = 0.0, edge = 0.0;
    std::vector<double> v(d, 0.0), g(d);
    const int n = 33;
    for (int i = 0; i < n; ++i) {
        v[0] = -Lv + 2 * Lv * i / (n - 1);
        const double w = std::pow(1 + v[0] * v[0], N / 2);
        geta(v.data(), g.data());
        double m = std::abs(eta(v.data()));
        for (int a = 0; a < d; ++a) m = std::max(m, std::abs(g[a]));
        peak = std::max(peak, w * m);
        if (std::abs(std::abs(v[0]) - Lv) < 1e-12) edge = std::max(edge, w * m);
    }
    if (peak > 0 && edge > rel * peak)
        throw std::domain_error("t_operator: eta lacks <v>^N decay at the velocity box edge");
}

/// Reference two-branch evaluation of
///   T[F, eta](t,x) = int_0^t int [ F(s, x-(t-s)v) eta(v)
///                                - F(s, X_{s,t}(x,v)) eta(V_{s,t}(x,v)) ] dv ds
/// with F given by slice spectra (trig interpolation) and the flow by the
/// recorded maps. O(N^d) per field evaluation: test-scale use only.
inline SpatialField t_operator_reference(const std::vector<Spectrum>& F_slices,
                                         const std::vector<double>& F_times,
                                         const std::function<double(const double*)>& eta,
                                         const FlowMaps& fm) {
    const int d = fm.gx.d;
    const double t = fm.t;
    SpatialField out(fm.gx);
    const int nv = fm.nrec_v();
    std::int64_t nrecv = 1;
    for (int a = 0; a < d; ++a) nrecv *= nv;
    if (fm.stride_x != 1) throw std::invalid_argument("t_operator_reference: needs full x lattice");
    const double wv = std::pow(fm.gv.spacing() * fm.stride_v, d);

    // s-quadrature over the recorded flow samples (descending)
    std::vector<double> sw(fm.s.size(), 0.0);
    for (std::size_t j = 0; j + 1 < fm.s.size(); ++j) {
        const double step = fm.s[j] - fm.s[j + 1];
        sw[j] += step / 2;
        sw[j + 1] += step / 2;
    }

    // F slice lookup per flow sample (exact matches expected)
    std::vector<int> ks(fm.s.size(), -1);
    for (std::size_t j = 0; j < fm.s.size(); ++j)
        for (std::size_t q = 0; q < F_times.size(); ++q)
            if (std::abs(F_times[q] - fm.s[j]) < 1e-9) ks[j] = static_cast<int>(q);
    for (int k : ks)
        if (k < 0) throw std::invalid_argument("t_operator_reference: flow sample off the F grid");

    parallel_for(0, static_cast<std::size_t>(fm.gx.npoints()), [&](std::size_t fx) {
        std::vector<int> idx(d), ivx(d);
        std::vector<double> x(d), v(d), X(d), V(d), arg(d);
        unflatten(fx, d, fm.gx.N, idx.data());
        for (int a = 0; a < d; ++a) x[a] = fm.gx.node(idx[a]);
        double cell = 0.0;
        for (std::int64_t rv = 0; rv < nrecv; ++rv) {
            const std::int64_t pt = static_cast<std::int64_t>(fx) * nrecv + rv;
            if (fm.flagged[pt]) continue;
            unflatten(fm.points[pt] % fm.gv.npoints(), d, fm.gv.N, ivx.data());
            for (int a = 0; a < d; ++a) v[a] = fm.gv.node(ivx[a]);
            for (std::size_t j = 0; j < fm.s.size(); ++j) {
                const double s = fm.s[j];
                for (int a = 0; a < d; ++a) arg[a] = x[a] - (t - s) * v[a];
                const double linear = eval_trig(F_slices[ks[j]], arg.data()) * eta(v.data());
                fm.reconstruct(static_cast<int>(j), pt, X.data(), V.data());
                const double nonlinear = eval_trig(F_slices[ks[j]], X.data()) * eta(V.data());
                cell += sw[j] * (linear - nonlinear);
            }
        }
        out.a[fx] = cell * wv;
    });
    return out;
}

/// f(t,x,v) along one phase point: f0 at the flow foot minus the Duhamel
/// integral of E . grad mu along the trajectory.
inline double reconstruct_f_point(const InitialData& f0, const EquilibriumProfile& mu, const FieldSampler& E,
                                  double t, const double* x, const double* v, double box_L, int nsub = 64) {
    const int d = E.dim();
    std::vector<double> srec;
    for (int j = nsub; j >= 0; --j) srec.push_back(t * j / nsub);
    std::vector<double> X0(d), V0(d), ev(d), gm(d);
    double duh = 0.0, prev = 0.0;
    integrate_trajectory(E, t, srec, x, v, t > 0 ? t / nsub : 1.0, [&](std::size_t j, const double* X, const double* V) {
        E.eval(srec[j], X, ev.data());
        mu.grad_mu(V, gm.data());
        double val = 0.0;
        for (int a = 0; a < d; ++a) val += ev[a] * gm[a];
        // trapezoid in s over the descending ladder
        if (j > 0) duh += 0.5 * (prev + val) * (srec[j - 1] - srec[j]);
        prev = val;
        if (j + 1 == srec.size()) {
            for (int a = 0; a < d; ++a) {
                X0[a] = wrap_box(X[a], box_L);
                V0[a] = V[a];
            }
        }
    });
    return f0(X0.data(), V0.data()) - duh;
}

struct ScatteringReport {
    std::vector<double> t_ladder;
    std::vector<double> cauchy;  // sup over audit points of |f(t_k) - f(t_{k+1})| in scattering coords
    double slope = 0.0;          // fitted Cauchy-difference rate
    double y_inf_sup = 0.0, w_inf_sup = 0.0;
    std::vector<double> f_inf;   // profile at the audit points
};

/// Scattering audit: f(t, x + tv, v) at audit phase points along a dyadic
/// t ladder; Cauchy differences fitted against the -(d + a - 1) rate, and
/// (Y, W) at the largest horizon Richardson-extrapolated to infinity.
inline ScatteringReport scattering_profile(const InitialData& f0, const EquilibriumProfile& mu,
                                           const FieldSampler& E, const std::vector<double>& t_ladder,
                                           const std::vector<std::vector<double>>& audit_points,
                                           double box_L, double a, double step_hint = 0.125) {
    const int d = E.dim();
    ScatteringReport rep;
    rep.t_ladder = t_ladder;
    std::vector<std::vector<double>> prof(t_ladder.size(), std::vector<double>(audit_points.size()));
    parallel_for(0, audit_points.size(), [&](std::size_t p) {
        std::vector<double> xs(d);
        for (std::size_t k = 0; k < t_ladder.size(); ++k) {
            const double t = t_ladder[k];
            const double* pv = audit_points[p].data() + d;
            for (int c = 0; c < d; ++c) xs[c] = audit_points[p][c] + t * pv[c];
            const int nsub = std::max(32, static_cast<int>(t / step_hint));
            prof[k][p] = reconstruct_f_point(f0, mu, E, t, xs.data(), pv, box_L, nsub);
        }
    });
    for (std::size_t k = 0; k + 1 < t_ladder.size(); ++k) {
        double sup = 0.0;
        for (std::size_t p = 0; p < audit_points.size(); ++p)
            sup = std::max(sup, std::abs(prof[k + 1][p] - prof[k][p]));
        rep.cauchy.push_back(sup);
    }
    // slope of the Cauchy differences vs the lower time of each pair
    {
        std::vector<double> xs, ys;
        for (std::size_t k = 0; k + 1 < t_ladder.size(); ++k)
            if (rep.cauchy[k] > 0) {
                xs.push_back(std::log(t_ladder[k]));
                ys.push_back(std::log(rep.cauchy[k]));
            }
        if (xs.size() >= 3) rep.slope = fit_line(xs, ys).slope;
    }
    rep.f_inf = prof.back();

    // Y_inf, W_inf: deviations at s=0 from the two largest horizons with
    // Richardson extrapolation at the known tail rate <t>^{-(d-2+a)}
    const double T = t_ladder.back();
    const double Thalf = T / 2;
    const double rate = std::pow(2.0, d - 2 + a);
    std::vector<double> ysups(audit_points.size(), 0.0), wsups(audit_points.size(), 0.0);
    parallel_for(0, audit_points.size(), [&](std::size_t p) {
        std::vector<double> xs(d), yT(d), wT(d), yH(d), wH(d);
        const double* pv = audit_points[p].data() + d;
        for (auto [tt, ybuf, wbuf] : {std::tuple{T, &yT, &wT}, std::tuple{Thalf, &yH, &wH}}) {
            for (int c = 0; c < d; ++c) xs[c] = audit_points[p][c] + tt * pv[c];
            integrate_trajectory(E, tt, {0.0}, xs.data(), pv, step_hint,
                                 [&](std::size_t, const double* X, const double* V) {
                                     for (int c = 0; c < d; ++c) {
                                         (*ybuf)[c] = X[c] - (xs[c] - tt * pv[c]);
                                         (*wbuf)[c] = V[c] - pv[c];
                                     }
                                 });
        }
        for (int c = 0; c < d; ++c) {
            const double yinf = yT[c] + (yT[c] - yH[c]) / (rate - 1.0);
            const double winf = wT[c] + (wT[c] - wH[c]) / (rate - 1.0);
            ysups[p] = std::max(ysups[p], std::abs(yinf));
            wsups[p] = std::max(wsups[p], std::abs(winf));
        }
    });
    for (std::size_t p = 0; p < audit_points.size(); ++p) {
        rep.y_inf_sup = std::max(rep.y_inf_sup, ysups[p]);
        rep.w_inf_sup = std::max(rep.w_inf_sup, wsups[p]);
    }
    return rep;
}

/// f_infinity(x,v) = f0(x + Y, v + W) + mu(v + W) - mu(v).
inline double scattering_limit_value(const InitialData& f0, const EquilibriumProfile& mu, const double* x,
                                     const double* v, const double* Yinf, const double* Winf, int d,
                                     double box_L) {
    std::vector<double> xa(d), va(d);
    for (int a = 0; a < d; ++a) {
        xa[a] = wrap_box(x[a] + Yinf[a], box_L);
        va[a] = v[a] + Winf[a];
    }
    return f0(xa.data(), va.data()) + mu.mu(va.data()) - mu.mu(v);
}

}  // namespace svp

#endif
