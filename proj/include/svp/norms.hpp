#ifndef SVP_NORMS_HPP
#define SVP_NORMS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "svp/field.hpp"
#include "svp/grid.hpp"

namespace svp {

/// Tagged norm evaluation result.
struct NormValue {
    std::string kind;
    double value = 0.0;
    std::string shifts;  // descriptor of the shift set used (empty for Lp)
};

/// Discrete stand-in for the sup over all shifts alpha: dyadic magnitudes
/// (up to `octaves` doublings of one grid cell) times 2d axis and 4 diagonal
/// directions, all exactly representable as periodic index rolls.
struct ShiftSet {
    int octaves = 8;

    /// Integer cell offsets for dimension d, clipped to at most N/2 cells.
    std::vector<std::vector<int>> offsets(int d, int N) const {
        std::vector<std::vector<int>> dirs;
        for (int a = 0; a < d; ++a)
            for (int sgn : {+1, -1}) {
                std::vector<int> e(d, 0);
                e[a] = sgn;
                dirs.push_back(e);
            }
        if (d == 3) {
            dirs.push_back({1, 1, 1});
            dirs.push_back({1, -1, 1});
            dirs.push_back({1, 1, -1});
            dirs.push_back({1, -1, -1});
        } else if (d == 2) {
            dirs.push_back({1, 1});
            dirs.push_back({1, -1});
        }
        std::vector<std::vector<int>> out;
        for (int j = 0; j < octaves; ++j) {
            const int m = 1 << j;
            if (m > N / 2) break;
            for (const auto& e : dirs) {
                std::vector<int> s(d);
                for (int a = 0; a < d; ++a) s[a] = e[a] * m;
                out.push_back(s);
            }
        }
        return out;
    }

    std::string describe(int d, int N) const {
        return "dyadic x" + std::to_string(octaves) + " axes+diag d" + std::to_string(d) + " N" + std::to_string(N);
    }
};

/// p = 1 selects L1; p_infty selects the sup norm. No other p is admitted.
constexpr int p_infty = 0;

namespace detail {

inline double lp_of(const SpatialGrid& g, const double* a, int p) {
    if (p == 1) {
        double s = 0.0;
        for (std::int64_t i = 0; i < g.npoints(); ++i) s += std::abs(a[i]);
        return s * g.cell_volume();
    }
    double m = 0.0;
    for (std::int64_t i = 0; i < g.npoints(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

/// delta_alpha g(x) = g(x) - g(x - alpha) for an integer cell shift.
inline void shifted_difference(const SpatialGrid& g, const double* a, const std::vector<int>& cells,
                               std::vector<double>& out) {
    const int d = g.d, N = g.N;
    out.resize(g.npoints());
    std::vector<int> idx(d), jdx(d);
    for (std::int64_t f = 0; f < g.npoints(); ++f) {
        unflatten(f, d, N, idx.data());
        for (int ax = 0; ax < d; ++ax) jdx[ax] = ((idx[ax] - cells[ax]) % N + N) % N;
        out[f] = a[f] - a[flat_index(jdx.data(), d, N)];
    }
}

inline double shift_norm(const SpatialGrid& g, const std::vector<int>& cells) {
    double s2 = 0.0;
    for (int c : cells) s2 += double(c) * c;
    return g.spacing() * std::sqrt(s2);
}

}  // namespace detail

inline NormValue lp_norm(const SpatialGrid& g, const double* a, int p) {
    return {p == 1 ? "L1" : "Linf", detail::lp_of(g, a, p), ""};
}
inline NormValue lp_norm(const SpatialField& f, int p) { return lp_norm(f.grid, f.a.data(), p); }

/// sup_alpha ||delta_alpha g||_{L^p} / |alpha|^s over the shift set.
inline NormValue besov_seminorm(const SpatialGrid& g, const double* a, double s, int p,
                                const ShiftSet& shifts = {}) {
    const auto offs = shifts.offsets(g.d, g.N);
    if (offs.empty()) throw std::invalid_argument("besov_seminorm: empty shift set");
    double best = 0.0;
    std::vector<double> diff;
    for (const auto& o : offs) {
        detail::shifted_difference(g, a, o, diff);
        const double v = detail::lp_of(g, diff.data(), p) / std::pow(detail::shift_norm(g, o), s);
        best = std::max(best, v);
    }
    return {"Besov", best, shifts.describe(g.d, g.N)};
}
inline NormValue besov_seminorm(const SpatialField& f, double s, int p, const ShiftSet& sh = {}) {
    return besov_seminorm(f.grid, f.a.data(), s, p, sh);
}

/// || sup_alpha |delta_alpha g| / |alpha|^s ||_{L^p}.
inline NormValue triebel_seminorm(const SpatialGrid& g, const double* a, double s, int p,
                                  const ShiftSet& shifts = {}) {
    const auto offs = shifts.offsets(g.d, g.N);
    if (offs.empty()) throw std::invalid_argument("triebel_seminorm: empty shift set");
    std::vector<double> sup(g.npoints(), 0.0), diff;
    for (const auto& o : offs) {
        detail::shifted_difference(g, a, o, diff);
        const double inv = 1.0 / std::pow(detail::shift_norm(g, o), s);
        for (std::int64_t i = 0; i < g.npoints(); ++i) sup[i] = std::max(sup[i], std::abs(diff[i]) * inv);
    }
    return {"Triebel", detail::lp_of(g, sup.data(), p), shifts.describe(g.d, g.N)};
}
inline NormValue triebel_seminorm(const SpatialField& f, double s, int p, const ShiftSet& sh = {}) {
    return triebel_seminorm(f.grid, f.a.data(), s, p, sh);
}

inline double bracket(double t) { return std::sqrt(1.0 + t * t); }

/// ||g||_kappa = sum_{p=1,inf} sup_t ( <t>^{d(p-1)/p} ||g(t)||_{L^p}
///                                   + <t>^{kappa + d(p-1)/p} ||g(t)||_{B^kappa_{p,inf}} ),
/// and for l >= 1 the weighted-derivative sum ||g||_{l,kappa}. Derivatives are
/// spectral; vector magnitudes are taken pointwise.
inline NormValue time_weighted_norm(const SpaceTimeField& traj, double kappa, int l = 0,
                                    const ShiftSet& shifts = {}) {
    const auto& g = traj.grid;
    const int d = g.d;
    double total = 0.0;
    for (int j = 0; j <= l; ++j) {
        double acc = 0.0;
        for (int p : {1, p_infty}) {
            const double pw = (p == 1) ? 0.0 : d;
            double sup_lp = 0.0, sup_bes = 0.0;
            for (int k = 0; k < traj.ntimes(); ++k) {
                // |nabla^j g| magnitude field
                std::vector<double> mag(g.npoints(), 0.0);
                if (j == 0) {
                    const double* s = traj.slice(k);
                    mag.assign(s, s + g.npoints());
                } else {
                    // iterate spectral gradients j times on the slice, accumulate magnitude
                    // (j<=2 in practice)
                    std::vector<std::vector<double>> comps{std::vector<double>(traj.slice(k), traj.slice(k) + g.npoints())};
                    for (int it = 0; it < j; ++it) {
                        std::vector<std::vector<double>> next;
                        for (auto& c : comps) {
                            auto sp = transform_forward(g, c);
                            for (int ax = 0; ax < d; ++ax) {
                                Spectrum ds = sp;
                                spectral_derivative(ds, ax);
                                next.push_back(transform_inverse(ds));
                            }
                        }
                        comps = std::move(next);
                    }
                    for (std::int64_t i = 0; i < g.npoints(); ++i) {
                        double s2 = 0.0;
                        for (auto& c : comps) s2 += c[i] * c[i];
                        mag[i] = std::sqrt(s2);
                    }
                }
                const double t = traj.tg.t[k];
                const double wj = std::pow(bracket(t), j);
                const double lpv = detail::lp_of(g, mag.data(), p);
                sup_lp = std::max(sup_lp, std::pow(bracket(t), pw) * wj * lpv);
                const double bes = besov_seminorm(g, mag.data(), kappa, p, shifts).value;
                sup_bes = std::max(sup_bes, std::pow(bracket(t), kappa + pw) * wj * bes);
            }
            acc += sup_lp + sup_bes;
        }
        total += acc;
    }
    return {l == 0 ? "TimeWeighted" : "HigherTimeWeighted", total, shifts.describe(g.d, g.N)};
}

/// ||(g1,g2)||_{S^eps_kappa} = ||g1||_kappa + eps^{1/3} ||g2||_kappa.
inline NormValue product_s_norm(const SpaceTimeField& rho, const SpaceTimeField& U, double a, double eps,
                                const ShiftSet& shifts = {}) {
    const double v = time_weighted_norm(rho, a, 0, shifts).value +
                     std::cbrt(eps) * time_weighted_norm(U, a, 0, shifts).value;
    return {"ProductS", v, shifts.describe(rho.grid.d, rho.grid.N)};
}

namespace detail {

/// Mixed norms of a phase-space array: L1_x L^p_v and L1_v L^p_x, p in {1,inf}.
struct MixedNorms {
    double l1x_l1v = 0, l1x_linfv = 0, l1v_l1x = 0, l1v_linfx = 0;
};

inline MixedNorms mixed_norms(const PhaseField& f) {
    const std::int64_t nx = f.gx.npoints(), nv = f.gv.npoints();
    const double wx = f.gx.cell_volume(), wv = f.gv.weight();
    MixedNorms m;
    std::vector<double> l1_over_x(nv, 0.0), linf_over_x(nv, 0.0);
    for (std::int64_t ix = 0; ix < nx; ++ix) {
        const double* row = f.a.data() + static_cast<std::size_t>(ix) * nv;
        double l1v = 0.0, linfv = 0.0;
        for (std::int64_t iv = 0; iv < nv; ++iv) {
            const double z = std::abs(row[iv]);
            l1v += z;
            linfv = std::max(linfv, z);
            l1_over_x[iv] += z * wx;
            linf_over_x[iv] = std::max(linf_over_x[iv], z);
        }
        m.l1x_l1v += l1v * wv * wx;
        m.l1x_linfv += linfv * wx;
    }
    for (std::int64_t iv = 0; iv < nv; ++iv) {
        m.l1v_l1x += l1_over_x[iv] * wv;
        m.l1v_linfx += linf_over_x[iv] * wv;
    }
    return m;
}

/// Pointwise sup over the shift set of |f(x,v)-f(x-z,v)|/|z|^a (axis=0) or
/// the v-shift analogue (axis=1), added into `out`.
inline void holder_sup_inplace(const PhaseField& f, double a, int axis, const ShiftSet& shifts,
                               std::vector<double>& out) {
    const int d = f.gx.d;
    const int Nx = f.gx.N, Nv = f.gv.N;
    const std::int64_t nx = f.gx.npoints(), nv = f.gv.npoints();
    const auto offs = shifts.offsets(d, axis == 0 ? Nx : Nv);
    const double h = axis == 0 ? f.gx.spacing() : f.gv.spacing();
    std::vector<int> idx(d), jdx(d);
    for (const auto& o : offs) {
        double s2 = 0.0;
        for (int c : o) s2 += double(c) * c;
        const double inv = 1.0 / std::pow(h * std::sqrt(s2), a);
        if (axis == 0) {
            for (std::int64_t ix = 0; ix < nx; ++ix) {
                unflatten(ix, d, Nx, idx.data());
                for (int ax = 0; ax < d; ++ax) jdx[ax] = ((idx[ax] - o[ax]) % Nx + Nx) % Nx;
                const std::int64_t jx = flat_index(jdx.data(), d, Nx);
                const double* r0 = f.a.data() + static_cast<std::size_t>(ix) * nv;
                const double* r1 = f.a.data() + static_cast<std::size_t>(jx) * nv;
                double* po = out.data() + static_cast<std::size_t>(ix) * nv;
                for (std::int64_t iv = 0; iv < nv; ++iv)
                    po[iv] = std::max(po[iv], std::abs(r0[iv] - r1[iv]) * inv);
            }
        } else {
            for (std::int64_t iv = 0; iv < nv; ++iv) {
                unflatten(iv, d, Nv, idx.data());
                for (int ax = 0; ax < d; ++ax) jdx[ax] = ((idx[ax] - o[ax]) % Nv + Nv) % Nv;
                const std::int64_t jv = flat_index(jdx.data(), d, Nv);
                for (std::int64_t ix = 0; ix < nx; ++ix) {
                    const std::size_t base = static_cast<std::size_t>(ix) * nv;
                    out[base + iv] = std::max(out[base + iv], std::abs(f.a[base + iv] - f.a[base + jv]) * inv);
                }
            }
        }
    }
}

/// 4th-order centered difference of f along one phase axis (x block if
/// axis_block==0, v block otherwise). Periodic wrap; data is assumed to decay
/// at the v boundary.
inline PhaseField phase_derivative(const PhaseField& f, int axis_block, int ax) {
    PhaseField out(f.gx, f.gv);
    const int d = f.gx.d;
    const std::int64_t nx = f.gx.npoints(), nv = f.gv.npoints();
    const int N = axis_block == 0 ? f.gx.N : f.gv.N;
    const double h = axis_block == 0 ? f.gx.spacing() : f.gv.spacing();
    std::vector<int> idx(d), jdx(d);
    auto roll = [&](std::int64_t flat, int shift, int Ngrid) {
        unflatten(flat, d, Ngrid, idx.data());
        jdx = idx;
        jdx[ax] = ((idx[ax] + shift) % Ngrid + Ngrid) % Ngrid;
        return flat_index(jdx.data(), d, Ngrid);
    };
    if (axis_block == 0) {
        for (std::int64_t ix = 0; ix < nx; ++ix) {
            const std::int64_t p1 = roll(ix, 1, N), p2 = roll(ix, 2, N);
            const std::int64_t m1 = roll(ix, -1, N), m2 = roll(ix, -2, N);
            for (std::int64_t iv = 0; iv < nv; ++iv)
                out.at(ix, iv) = (8 * (f.at(p1, iv) - f.at(m1, iv)) - (f.at(p2, iv) - f.at(m2, iv))) / (12 * h);
        }
    } else {
        for (std::int64_t iv = 0; iv < nv; ++iv) {
            const std::int64_t p1 = roll(iv, 1, N), p2 = roll(iv, 2, N);
            const std::int64_t m1 = roll(iv, -1, N), m2 = roll(iv, -2, N);
            for (std::int64_t ix = 0; ix < nx; ++ix)
                out.at(ix, iv) = (8 * (f.at(ix, p1) - f.at(ix, m1)) - (f.at(ix, p2) - f.at(ix, m2))) / (12 * h);
        }
    }
    return out;
}

}  // namespace detail

/// The Holder data functional of one derivative order:
///   sum_{p=1,inf} || D^a (nabla^i f) ||_{L1_x L^p_v  intersect  L1_v L^p_x},
/// with D^a g = |g| + sup-shift quotients in x and in v and the intersection
/// norm realized as the max of the two mixed norms.
inline NormValue holder_data_norm(const PhaseField& f0, double a, int deriv_order,
                                  const ShiftSet& shifts = {}) {
    if (deriv_order < 0 || deriv_order > 1) throw std::invalid_argument("holder_data_norm: i must be 0 or 1");
    std::vector<PhaseField> layers;
    if (deriv_order == 0) {
        layers.push_back(f0);
    } else {
        for (int ax = 0; ax < f0.gx.d; ++ax) layers.push_back(detail::phase_derivative(f0, 0, ax));
        for (int ax = 0; ax < f0.gv.d; ++ax) layers.push_back(detail::phase_derivative(f0, 1, ax));
    }
    double total = 0.0;
    for (const auto& layer : layers) {
        PhaseField dcal = layer;
        for (auto& v : dcal.a) v = std::abs(v);
        std::vector<double> sup1(dcal.a.size(), 0.0), sup2(dcal.a.size(), 0.0);
        detail::holder_sup_inplace(layer, a, 0, shifts, sup1);
        detail::holder_sup_inplace(layer, a, 1, shifts, sup2);
        for (std::size_t i = 0; i < dcal.a.size(); ++i) dcal.a[i] += sup1[i] + sup2[i];
        const auto m = detail::mixed_norms(dcal);
        total += std::max(m.l1x_l1v, m.l1v_l1x) + std::max(m.l1x_linfv, m.l1v_linfx);
    }
    return {"HolderData", total, shifts.describe(f0.gx.d, f0.gx.N)};
}

}  // namespace svp

#endif
