#ifndef SVP_FLOW_HPP
#define SVP_FLOW_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "svp/field.hpp"
#include "svp/grid.hpp"
#include "svp/parallel.hpp"

namespace svp {

/// Time-dependent electric field E(t, x) for the trajectory integrator.
class FieldSampler {
  public:
    virtual ~FieldSampler() = default;
    virtual void eval(double t, const double* x, double* E) const = 0;
    virtual int dim() const = 0;
};

class ZeroField final : public FieldSampler {
  public:
    explicit ZeroField(int d) : d_(d) {}
    void eval(double, const double*, double* E) const override {
        for (int a = 0; a < d_; ++a) E[a] = 0.0;
    }
    int dim() const override { return d_; }

  private:
    int d_;
};

class ConstantField final : public FieldSampler {
  public:
    explicit ConstantField(std::vector<double> E0) : E0_(std::move(E0)) {}
    void eval(double, const double*, double* E) const override {
        for (std::size_t a = 0; a < E0_.size(); ++a) E[a] = E0_[a];
    }
    int dim() const override { return static_cast<int>(E0_.size()); }

  private:
    std::vector<double> E0_;
};

class AnalyticField final : public FieldSampler {
  public:
    using Fn = std::function<void(double, const double*, double*)>;
    AnalyticField(int d, Fn fn) : d_(d), fn_(std::move(fn)) {}
    void eval(double t, const double* x, double* E) const override { fn_(t, x, E); }
    int dim() const override { return d_; }

  private:
    int d_;
    Fn fn_;
};

/// Stored d-vector field on (time grid) x (box), trigonometric interpolation
/// in space (exact for band-limited slices) and linear interpolation in time.
/// Reference sampler: O(N^d) per evaluation.
class TrigFieldSampler final : public FieldSampler {
  public:
    TrigFieldSampler(const TimeGrid& tg, const SpatialGrid& grid, std::vector<std::vector<Spectrum>> comp_spectra)
        : tg_(tg), grid_(grid), spectra_(std::move(comp_spectra)) {}

    /// Build from a d-component SpaceTimeField.
    static TrigFieldSampler from_field(const SpaceTimeField& E) {
        if (E.ncomp != E.grid.d) throw std::invalid_argument("TrigFieldSampler: need d components");
        std::vector<std::vector<Spectrum>> sp(E.ntimes());
        for (int k = 0; k < E.ntimes(); ++k)
            for (int c = 0; c < E.ncomp; ++c) sp[k].push_back(transform_forward(E.grid, E.slice_copy(k, c).a));
        return TrigFieldSampler(E.tg, E.grid, std::move(sp));
    }

    void eval(double t, const double* x, double* E) const override {
        const auto& ts = tg_.t;
        if (t <= ts.front()) return eval_slice(0, x, E);
        if (t >= ts.back()) return eval_slice(static_cast<int>(ts.size()) - 1, x, E);
        int lo = 0, hi = static_cast<int>(ts.size()) - 1;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (ts[mid] > t ? hi : lo) = mid;
        }
        const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        std::vector<double> e0(grid_.d), e1(grid_.d);
        eval_slice(lo, x, e0.data());
        eval_slice(hi, x, e1.data());
        for (int a = 0; a < grid_.d; ++a) E[a] = (1 - w) * e0[a] + w * e1[a];
    }
    int dim() const override { return grid_.d; }

  private:
    void eval_slice(int k, const double* x, double* E) const {
        for (int c = 0; c < grid_.d; ++c) E[c] = eval_trig(spectra_[k][c], x);
    }
    TimeGrid tg_;
    SpatialGrid grid_;
    std::vector<std::vector<Spectrum>> spectra_;
};

/// One backward trajectory of dX/ds = V, dV/ds = E(s, X) from (x, v) at s = t,
/// classical RK4, recording at the (descending) times in s_record.
template <class Record>
void integrate_trajectory(const FieldSampler& E, double t, const std::vector<double>& s_record,
                          const double* x0, const double* v0, double max_step, Record&& record) {
    const int d = E.dim();
    std::vector<double> X(x0, x0 + d), V(v0, v0 + d);
    std::vector<double> k1x(d), k1v(d), k2x(d), k2v(d), k3x(d), k3v(d), k4x(d), k4v(d), xt(d), ev(d);
    double cur = t;
    for (std::size_t j = 0; j < s_record.size(); ++j) {
        const double target = s_record[j];
        if (target > cur + 1e-14) throw std::invalid_argument("integrate_trajectory: record times must descend");
        const double span = cur - target;
        if (span > 0) {
            const int n = std::max(1, static_cast<int>(std::ceil(span / max_step - 1e-12)));
            const double h = -span / n;  // backward
            for (int step = 0; step < n; ++step) {
                const double s = cur + step * h;
                E.eval(s, X.data(), ev.data());
                for (int a = 0; a < d; ++a) {
                    k1x[a] = V[a];
                    k1v[a] = ev[a];
                }
                for (int a = 0; a < d; ++a) xt[a] = X[a] + 0.5 * h * k1x[a];
                E.eval(s + 0.5 * h, xt.data(), ev.data());
                for (int a = 0; a < d; ++a) {
                    k2x[a] = V[a] + 0.5 * h * k1v[a];
                    k2v[a] = ev[a];
                }
                for (int a = 0; a < d; ++a) xt[a] = X[a] + 0.5 * h * k2x[a];
                E.eval(s + 0.5 * h, xt.data(), ev.data());
                for (int a = 0; a < d; ++a) {
                    k3x[a] = V[a] + 0.5 * h * k2v[a];
                    k3v[a] = ev[a];
                }
                for (int a = 0; a < d; ++a) xt[a] = X[a] + h * k3x[a];
                E.eval(s + h, xt.data(), ev.data());
                for (int a = 0; a < d; ++a) {
                    k4x[a] = V[a] + h * k3v[a];
                    k4v[a] = ev[a];
                }
                for (int a = 0; a < d; ++a) {
                    X[a] += h / 6.0 * (k1x[a] + 2 * k2x[a] + 2 * k3x[a] + k4x[a]);
                    V[a] += h / 6.0 * (k1v[a] + 2 * k2v[a] + 2 * k3v[a] + k4v[a]);
                }
            }
            cur = target;
        }
        record(j, X.data(), V.data());
    }
}

/// Backward flow deviations on a (sub)lattice of the phase grid. The entry at
/// phase label (x, v) and sample s holds
///   dev_x = X_{s,t}(x,v) - (x - (t-s) v)   [ = Y_{s,t}(x - vt, v) ]
///   dev_v = V_{s,t}(x,v) - v               [ = W_{s,t}(x - vt, v) ]
struct FlowMaps {
    SpatialGrid gx;
    VelocityGrid gv;
    double t = 0.0;
    std::vector<double> s;  // descending, s.front() == t allowed, >= 0
    int stride_x = 1, stride_v = 1;
    std::vector<std::int64_t> points;          // recorded flattened phase indices
    std::vector<std::vector<double>> dev;      // [s_idx][pt * 2d + c]
    std::vector<std::uint8_t> flagged;         // velocity left the box
    double step = 0.0;
    int order = 4;

    int nrec_x() const { return gx.N / stride_x; }
    int nrec_v() const { return gv.N / stride_v; }
    std::int64_t npoints() const { return static_cast<std::int64_t>(points.size()); }

    /// X_{s_j,t} and V_{s_j,t} of recorded point pt.
    void reconstruct(int s_idx, std::int64_t pt, double* X, double* V) const {
        const int d = gx.d;
        std::vector<int> ix(d), iv(d);
        const std::int64_t nv = gv.npoints();
        unflatten(points[pt] / nv, d, gx.N, ix.data());
        unflatten(points[pt] % nv, d, gv.N, iv.data());
        const double* dv = &dev[s_idx][static_cast<std::size_t>(pt) * 2 * d];
        for (int a = 0; a < d; ++a) {
            const double x = gx.node(ix[a]), v = gv.node(iv[a]);
            X[a] = x - (t - s[s_idx]) * v + dv[a];
            V[a] = v + dv[d + a];
        }
    }
};

/// RK4 flow build over the phase lattice (every stride_x-th x node and
/// stride_v-th v node recorded). Trajectories whose velocity leaves the box
/// are flagged, not extrapolated.
inline FlowMaps integrate_flow(const FieldSampler& E, double t, std::vector<double> s_samples,
                               const SpatialGrid& gx, const VelocityGrid& gv, int stride_x = 1,
                               int stride_v = 1, double step = 0.0) {
    if (E.dim() != gx.d) throw std::invalid_argument("integrate_flow: dimension mismatch");
    std::sort(s_samples.begin(), s_samples.end(), std::greater<double>());
    for (double s : s_samples)
        if (s < 0 || s > t + 1e-12) throw std::invalid_argument("integrate_flow: need 0 <= s <= t");
    FlowMaps fm;
    fm.gx = gx;
    fm.gv = gv;
    fm.t = t;
    fm.s = s_samples;
    fm.stride_x = stride_x;
    fm.stride_v = stride_v;
    fm.step = step > 0 ? step : std::max(t / 64.0, 1e-3);

    const int d = gx.d;
    const int nx = gx.N / stride_x, nv = gv.N / stride_v;
    std::int64_t nrec = 1, nrecv = 1;
    for (int a = 0; a < d; ++a) {
        nrec *= nx;
        nrecv *= nv;
    }
    fm.points.resize(nrec * nrecv);
    fm.flagged.assign(nrec * nrecv, 0);
    fm.dev.assign(s_samples.size(), std::vector<double>(static_cast<std::size_t>(nrec * nrecv) * 2 * d));

    parallel_for(0, static_cast<std::size_t>(nrec * nrecv), [&](std::size_t pt) {
        std::vector<int> ix(d), iv(d);
        std::int64_t r = static_cast<std::int64_t>(pt);
        // decode recorded-lattice index: x block major, v minor
        std::int64_t rv = r % nrecv, rx = r / nrecv;
        unflatten(rx, d, nx, ix.data());
        unflatten(rv, d, nv, iv.data());
        for (int a = 0; a < d; ++a) {
            ix[a] *= stride_x;
            iv[a] *= stride_v;
        }
        fm.points[pt] = flat_index(ix.data(), d, gx.N) * gv.npoints() + flat_index(iv.data(), d, gv.N);
        std::vector<double> x0(d), v0(d);
        for (int a = 0; a < d; ++a) {
            x0[a] = gx.node(ix[a]);
            v0[a] = gv.node(iv[a]);
        }
        bool flag = false;
        integrate_trajectory(E, t, fm.s, x0.data(), v0.data(), fm.step, [&](std::size_t j, const double* X, const double* V) {
            double* out = &fm.dev[j][pt * 2 * d];
            for (int a = 0; a < d; ++a) {
                out[a] = X[a] - (x0[a] - (t - fm.s[j]) * v0[a]);
                out[d + a] = V[a] - v0[a];
                if (std::abs(V[a]) > gv.Lv) flag = true;
            }
        });
        if (flag) fm.flagged[pt] = 1;
    });
    return fm;
}

/// Weighted flow suprema of the deviation maps and their first differences:
///   sup_s <s>^{d-2+a} ||Y||, sup_s <s>^{d-1+a} ||W||,
/// gradient realizations by centered differences on the recorded lattice, and
/// the Holder-in-alpha seminorm at the fixed loss delta = (1-a)/2.
struct FlowDecayReport {
    double sup_y = 0.0, sup_w = 0.0;
    double sup_grad_x_y = 0.0, sup_grad_v_y = 0.0;
    double sup_grad_x_w = 0.0, sup_grad_v_w = 0.0;
    double holder_v_grad_y = 0.0;  // delta-loss seminorm, report only
    double delta_used = 0.0;
};

inline FlowDecayReport flow_decay_audit(const FlowMaps& fm, double a) {
    FlowDecayReport rep;
    const int d = fm.gx.d;
    rep.delta_used = (1.0 - a) / 2.0;
    const int nx = fm.nrec_x(), nv = fm.nrec_v();
    std::int64_t nrecx = 1, nrecv = 1;
    for (int ax = 0; ax < d; ++ax) {
        nrecx *= nx;
        nrecv *= nv;
    }
    const double hx = fm.gx.spacing() * fm.stride_x;
    const double hv = fm.gv.spacing() * fm.stride_v;

    for (std::size_t j = 0; j < fm.s.size(); ++j) {
        const double s = fm.s[j];
        const double wY = std::pow(std::sqrt(1 + s * s), d - 2 + a);
        const double wW = std::pow(std::sqrt(1 + s * s), d - 1 + a);
        const double wGvY = std::pow(std::sqrt(1 + s * s), d - 3 + a);
        const double wGvW = std::pow(std::sqrt(1 + s * s), d - 2 + a);
        double supY = 0, supW = 0, gxY = 0, gvY = 0, gxW = 0, gvW = 0;
        const auto& dv = fm.dev[j];
        std::vector<int> ix(d), iv(d);
        for (std::int64_t pt = 0; pt < fm.npoints(); ++pt) {
            double ynorm = 0, wnorm = 0;
            for (int c = 0; c < d; ++c) {
                ynorm = std::max(ynorm, std::abs(dv[pt * 2 * d + c]));
                wnorm = std::max(wnorm, std::abs(dv[pt * 2 * d + d + c]));
            }
            supY = std::max(supY, ynorm);
            supW = std::max(supW, wnorm);
            // centered differences along recorded axes
            const std::int64_t rv = pt % nrecv, rx = pt / nrecv;
            unflatten(rx, d, nx, ix.data());
            unflatten(rv, d, nv, iv.data());
            for (int ax = 0; ax < d; ++ax) {
                auto roll = [&](std::vector<int>& idx, int delta, int N, bool xblock) {
                    std::vector<int> jx = ix, jv = iv;
                    (xblock ? jx : jv)[ax] = ((idx[ax] + delta) % N + N) % N;
                    return flat_index(jx.data(), d, nx) * nrecv + flat_index(jv.data(), d, nv);
                };
                const auto xp = roll(ix, 1, nx, true), xm = roll(ix, -1, nx, true);
                const auto vp = roll(iv, 1, nv, false), vm = roll(iv, -1, nv, false);
                for (int c = 0; c < d; ++c) {
                    gxY = std::max(gxY, std::abs(dv[xp * 2 * d + c] - dv[xm * 2 * d + c]) / (2 * hx));
                    gxW = std::max(gxW, std::abs(dv[xp * 2 * d + d + c] - dv[xm * 2 * d + d + c]) / (2 * hx));
                    gvY = std::max(gvY, std::abs(dv[vp * 2 * d + c] - dv[vm * 2 * d + c]) / (2 * hv));
                    gvW = std::max(gvW, std::abs(dv[vp * 2 * d + d + c] - dv[vm * 2 * d + d + c]) / (2 * hv));
                }
            }
        }
        rep.sup_y = std::max(rep.sup_y, wY * supY);
        rep.sup_w = std::max(rep.sup_w, wW * supW);
        rep.sup_grad_x_y = std::max(rep.sup_grad_x_y, wY * gxY);
        rep.sup_grad_v_y = std::max(rep.sup_grad_v_y, wGvY * gvY);
        rep.sup_grad_x_w = std::max(rep.sup_grad_x_w, wW * gxW);
        rep.sup_grad_v_w = std::max(rep.sup_grad_v_w, wGvW * gvW);

        // Holder quotient of grad_v Y over dyadic v-shifts (report only)
        double hq = 0.0;
        for (int oct = 0; oct < 3; ++oct) {
            const int m = 1 << oct;
            if (2 * m >= nv) break;
            const double alpha = m * hv;
            for (std::int64_t pt = 0; pt < fm.npoints(); ++pt) {
                const std::int64_t rv = pt % nrecv, rx = pt / nrecv;
                unflatten(rx, d, nx, ix.data());
                unflatten(rv, d, nv, iv.data());
                for (int ax = 0; ax < d; ++ax) {
                    std::vector<int> jv = iv;
                    jv[ax] = ((iv[ax] - m) % nv + nv) % nv;
                    const std::int64_t qt = flat_index(ix.data(), d, nx) * nrecv + flat_index(jv.data(), d, nv);
                    // forward difference of grad_v Y approximated by first differences
                    for (int c = 0; c < d; ++c) {
                        const double g0 = (dv[pt * 2 * d + c] - dv[qt * 2 * d + c]) / alpha;
                        hq = std::max(hq, std::abs(g0) / std::pow(alpha, a - rep.delta_used));
                    }
                }
            }
        }
        rep.holder_v_grad_y = std::max(rep.holder_v_grad_y, std::pow(std::sqrt(1 + s * s), d - 3 + rep.delta_used) * hq);
    }
    return rep;
}

/// Psi map: X_{s,t}(x, Psi(x,v)) = x - (t-s) v, solved by the fixed point
/// Psi <- v + Y^{(x,Psi)}_{s,t} / (t-s) with one trajectory integration per
/// iteration. The contraction needs ||grad_v Phi|| < 1 (checked on probes).
struct PsiMap {
    double s = 0.0, t = 0.0;
    std::vector<std::int64_t> points;
    std::vector<double> psi;       // [pt*d + c]
    std::vector<double> residual;  // |X(x,Psi) - (x - (t-s)v)| per point
    int max_iterations = 0;
};

inline PsiMap psi_solve(const FieldSampler& E, double s, double t, const SpatialGrid& gx,
                        const VelocityGrid& gv, int stride_x, int stride_v, double step = 0.0,
                        double tol = 1e-10, int max_iters = 60) {
    if (!(s < t)) throw std::invalid_argument("psi_solve: need s < t");
    PsiMap pm;
    pm.s = s;
    pm.t = t;
    const int d = gx.d;
    const double max_step = step > 0 ? step : std::max(t / 64.0, 1e-3);
    const std::vector<double> record{s};

    // contraction gate: ||grad_v Phi|| estimated at probe points by finite differences
    {
        std::vector<double> x0(d, 0.3), v0(d, 0.0), vp(d), devp(d), devm(d);
        double worst = 0.0;
        const double hfd = 1e-4;
        for (int ax = 0; ax < d; ++ax) {
            vp = v0;
            vp[ax] += hfd;
            integrate_trajectory(E, t, record, x0.data(), vp.data(), max_step,
                                 [&](std::size_t, const double* X, const double*) {
                                     for (int c = 0; c < d; ++c) devp[c] = X[c] - (x0[c] - (t - s) * vp[c]);
                                 });
            vp[ax] -= 2 * hfd;
            integrate_trajectory(E, t, record, x0.data(), vp.data(), max_step,
                                 [&](std::size_t, const double* X, const double*) {
                                     for (int c = 0; c < d; ++c) devm[c] = X[c] - (x0[c] - (t - s) * vp[c]);
                                 });
            for (int c = 0; c < d; ++c) worst = std::max(worst, std::abs(devp[c] - devm[c]) / (2 * hfd) / (t - s));
        }
        if (worst >= 1.0)
            throw std::runtime_error("psi_solve: ||grad_v Phi|| estimate " + std::to_string(worst) +
                                     " >= 1, fixed point not contractive");
    }

    const int nx = gx.N / stride_x, nv = gv.N / stride_v;
    std::int64_t nrecx = 1, nrecv = 1;
    for (int ax = 0; ax < d; ++ax) {
        nrecx *= nx;
        nrecv *= nv;
    }
    pm.points.resize(nrecx * nrecv);
    pm.psi.assign(static_cast<std::size_t>(nrecx * nrecv) * d, 0.0);
    pm.residual.assign(nrecx * nrecv, 0.0);
    std::vector<int> iters(nrecx * nrecv, 0);

    parallel_for(0, static_cast<std::size_t>(nrecx * nrecv), [&](std::size_t pt) {
        std::vector<int> ix(d), iv(d);
        const std::int64_t rv = static_cast<std::int64_t>(pt) % nrecv, rx = static_cast<std::int64_t>(pt) / nrecv;
        unflatten(rx, d, nx, ix.data());
        unflatten(rv, d, nv, iv.data());
        for (int a = 0; a < d; ++a) {
            ix[a] *= stride_x;
            iv[a] *= stride_v;
        }
        pm.points[pt] = flat_index(ix.data(), d, gx.N) * gv.npoints() + flat_index(iv.data(), d, gv.N);
        std::vector<double> x0(d), v(d), cur(d), X(d), dev(d);
        for (int a = 0; a < d; ++a) {
            x0[a] = gx.node(ix[a]);
            v[a] = gv.node(iv[a]);
            cur[a] = v[a];
        }
        double resid = 0.0;
        int it = 0;
        for (it = 0; it < max_iters; ++it) {
            integrate_trajectory(E, t, record, x0.data(), cur.data(), max_step,
                                 [&](std::size_t, const double* Xs, const double*) {
                                     for (int c = 0; c < d; ++c) X[c] = Xs[c];
                                 });
            // Psi_next = v + Y/(t-s) with Y = X - (x0 - (t-s) cur)
            double upd = 0.0;
            resid = 0.0;
            for (int c = 0; c < d; ++c) {
                const double y = X[c] - (x0[c] - (t - s) * cur[c]);
                const double next = v[c] + y / (t - s);
                upd = std::max(upd, std::abs(next - cur[c]));
                cur[c] = next;
                resid = std::max(resid, std::abs(X[c] - (x0[c] - (t - s) * v[c])));
            }
            if (upd <= tol) break;
        }
        for (int c = 0; c < d; ++c) pm.psi[pt * d + c] = cur[c];
        pm.residual[pt] = resid;
        iters[pt] = it;
    });
    pm.max_iterations = *std::max_element(iters.begin(), iters.end());
    return pm;
}

}  // namespace svp

#endif
