#ifndef SVP_PENROSE_HPP
#define SVP_PENROSE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "svp/equilibria.hpp"
#include "svp/parallel.hpp"

namespace svp {

/// Khat(t, xi) = -t |xi|^2 muhat(t xi) / (1 + |xi|^2); the mode-wise kernel of
/// the linearized problem in closed velocity-Fourier form.
inline std::complex<double> khat_t(const EquilibriumProfile& p, double t, const double* xi) {
    double x2 = 0.0;
    for (int a = 0; a < p.d; ++a) x2 += xi[a] * xi[a];
    if (t == 0.0 || x2 == 0.0) return 0.0;
    std::vector<double> eta(p.d);
    for (int a = 0; a < p.d; ++a) eta[a] = t * xi[a];
    return -t * x2 / (1.0 + x2) * p.muhat(eta.data());
}

namespace detail {

// 8-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr std::array<double, 8> gl_x = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> gl_w = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

/// Dawson function D(x) = exp(-x^2) int_0^x exp(u^2) du (Rybicki sampling).
inline double dawson(double x) {
    const double ax = std::abs(x);
    if (ax < 0.2) {
        const double x2 = x * x;
        return x * (1.0 - 2.0 * x2 / 3.0 + 4.0 * x2 * x2 / 15.0 - 8.0 * x2 * x2 * x2 / 105.0 +
                    16.0 * x2 * x2 * x2 * x2 / 945.0);
    }
    const double h = 0.25;
    const long c = std::lround(ax / h);
    const long n0 = (c % 2 == 0) ? c + 1 : c;  // nearest odd multiple
    double s = 0.0;
    for (long k = -30; k <= 30; k += 2) {  // keep n = n0 + k odd
        const long n = n0 + k;
        const double z = ax - n * h;
        s += std::exp(-z * z) / n;
    }
    s /= std::sqrt(M_PI);
    return x < 0 ? -s : s;
}

/// I(alpha, omega) = int_0^inf t exp(-alpha t^2) exp(-i omega t) dt, alpha > 0.
inline std::complex<double> gauss_halfline_moment(double alpha, double omega) {
    const double z = omega / (2.0 * std::sqrt(alpha));
    const double re = 1.0 / (2.0 * alpha) - omega / (2.0 * std::pow(alpha, 1.5)) * dawson(z);
    const double im = -omega * std::sqrt(M_PI) / (4.0 * std::pow(alpha, 1.5)) * std::exp(-z * z);
    return {re, im};
}

}  // namespace detail

/// Ktilde by panel Gauss-Legendre on [0, T_cut], panel length
/// min(pi / max(|tau| + drift, 1), 1 / max(|xi|, 1)), truncated when the
/// Gaussian envelope of |Khat| falls below 1e-14 of its running scale.
/// Returns the value; *trunc_err reports the certified truncation bound.
inline std::complex<double> ktilde_quadrature(const EquilibriumProfile& p, double tau, const double* xi,
                                              double* trunc_err = nullptr) {
    double x2 = 0.0;
    for (int a = 0; a < p.d; ++a) x2 += xi[a] * xi[a];
    if (x2 == 0.0 || p.is_zero()) {
        if (trunc_err) *trunc_err = 0.0;
        return 0.0;
    }
    const double xn = std::sqrt(x2);
    double umax = 0.0, thmin = std::numeric_limits<double>::infinity();
    for (const auto& c : p.comps) {
        double un = 0.0;
        for (double u : c.shift) un += u * u;
        umax = std::max(umax, std::sqrt(un));
        thmin = std::min(thmin, c.theta);
    }
    const double drift = xn * umax;
    const double panel = std::min(M_PI / std::max(std::abs(tau) + drift, 1.0), 1.0 / std::max(xn, 1.0));
    // envelope s exp(-thmin s^2/2) in s = t|xi| falls below 1e-15 past s*
    const double s_star = std::sqrt(2.0 * 38.0 / thmin);
    const double t_cut = (s_star + 2.0) / xn;

    std::complex<double> acc = 0.0;
    std::vector<double> eta(p.d);
    for (double a0 = 0.0; a0 < t_cut; a0 += panel) {
        const double b0 = std::min(a0 + panel, t_cut);
        const double mid = 0.5 * (a0 + b0), half = 0.5 * (b0 - a0);
        for (int q = 0; q < 8; ++q) {
            const double t = mid + half * detail::gl_x[q];
            for (int a = 0; a < p.d; ++a) eta[a] = t * xi[a];
            const std::complex<double> khat = -t * x2 / (1.0 + x2) * p.muhat(eta.data());
            acc += detail::gl_w[q] * half * std::polar(1.0, -tau * t) * khat;
        }
    }
    if (trunc_err) {
        // int_{t_cut}^inf t |xi|^2 |muhat| / (1+|xi|^2) dt <= sum_j w_j exp(-theta_j s*^2/2)/theta_j
        double tail = 0.0;
        for (const auto& c : p.comps)
            tail += c.weight * std::exp(-c.theta * (t_cut * xn) * (t_cut * xn) / 2.0) / c.theta;
        *trunc_err = tail / (1.0 + x2);
    }
    return acc;
}

/// Closed-form Ktilde for Gaussian mixtures via the Dawson function.
inline std::complex<double> ktilde(const EquilibriumProfile& p, double tau, const double* xi) {
    double x2 = 0.0;
    for (int a = 0; a < p.d; ++a) x2 += xi[a] * xi[a];
    if (x2 == 0.0 || p.is_zero()) return 0.0;
    std::complex<double> acc = 0.0;
    for (const auto& c : p.comps) {
        double xu = 0.0;
        for (int a = 0; a < p.d; ++a) xu += xi[a] * c.shift[a];
        acc += c.weight * detail::gauss_halfline_moment(c.theta * x2 / 2.0, tau + xu);
    }
    return -x2 / (1.0 + x2) * acc;
}

/// xi -> 0 limit of Ktilde along the ray tau = c |xi|, direction dir:
/// -sum_j w_j F_theta(c + dir.u_j) with F the unit-|xi| moment profile.
inline std::complex<double> ktilde_ray_limit(const EquilibriumProfile& p, double c, const double* dir) {
    std::complex<double> acc = 0.0;
    for (const auto& comp : p.comps) {
        double du = 0.0;
        for (int a = 0; a < p.d; ++a) du += dir[a] * comp.shift[a];
        acc += comp.weight * detail::gauss_halfline_moment(comp.theta / 2.0, c + du);
    }
    return -acc;
}

struct PenroseScan {
    double tau_max = 12.0;
    double xi_max = 6.0;
    int n_tau = 240;
    int n_xi = 160;
    double stable_threshold = 0.05;
    int refine_rounds = 4;
};

struct PenroseReport {
    PenroseScan scan;
    double margin = 0.0;        // min over the scan of |1 - Ktilde|
    double tau_star = 0.0;      // arg-min
    double xi_star = 0.0;       // arg-min |xi| (0 encodes the ray-limit rows)
    double outside_lower = 0.0; // certified lower bound of |1 - Ktilde| outside the window
    bool tail_certified = false;
    bool stable = false;
    bool radial = true;
};

namespace detail {

/// max over the scanned xi radii of integral |d/dt Khat(t, xi)| dt, used in
/// the |tau| > tau_max certificate |Ktilde| <= B1 / |tau|.
inline double khat_dt_l1_bound(const EquilibriumProfile& p, double xi_max) {
    double worst = 0.0;
    for (double r : {0.05, 0.1, 0.2, 0.4, 0.8, 1.5, 2.5, 4.0, xi_max}) {
        if (r > xi_max) continue;
        double acc = 0.0;
        double umax = 0.0, thmin = std::numeric_limits<double>::infinity();
        for (const auto& c : p.comps) {
            double un = 0.0;
            for (double u : c.shift) un += u * u;
            umax = std::max(umax, std::sqrt(un));
            thmin = std::min(thmin, c.theta);
        }
        const double t_end = (std::sqrt(2 * 40 / thmin) + 2) / r;
        const int n = 4000;
        const double dt = t_end / n;
        for (int i = 0; i < n; ++i) {
            const double t = (i + 0.5) * dt;
            // |d/dt [t muhat(t xi)]| <= sum_j w_j (1 + t r u_j + theta_j r^2 t^2) exp(-theta_j r^2 t^2/2)
            double mag = 0.0;
            for (const auto& c : p.comps) {
                double un = 0.0;
                for (double u : c.shift) un += u * u;
                mag += c.weight * (1.0 + t * r * std::sqrt(un) + c.theta * r * r * t * t) *
                       std::exp(-c.theta * r * r * t * t / 2);
            }
            acc += mag * dt;
        }
        worst = std::max(worst, r * r / (1.0 + r * r) * acc);
    }
    return worst;
}

}  // namespace detail

/// Scan of inf |1 - Ktilde| over the (tau, |xi|) window plus the xi -> 0 ray
/// rows, local refinement around the arg-min, and analytic certificates for
/// the region outside the window. Radial profiles need one direction; others
/// are scanned along +-e1, e2 and a diagonal.
inline PenroseReport penrose_margin(const EquilibriumProfile& p, const PenroseScan& scan = {}) {
    PenroseReport rep;
    rep.scan = scan;
    rep.radial = p.is_radial();
    if (p.is_zero()) {
        rep.margin = 1.0;
        rep.outside_lower = 1.0;
        rep.tail_certified = true;
        rep.stable = true;
        return rep;
    }

    std::vector<std::vector<double>> dirs;
    {
        std::vector<double> e1(p.d, 0.0);
        e1[0] = 1.0;
        dirs.push_back(e1);
        if (!rep.radial) {
            std::vector<double> m1(p.d, 0.0);
            m1[0] = -1.0;
            dirs.push_back(m1);
            if (p.d >= 2) {
                std::vector<double> e2(p.d, 0.0);
                e2[1] = 1.0;
                dirs.push_back(e2);
                std::vector<double> diag(p.d, 0.0);
                diag[0] = diag[1] = 1.0 / std::sqrt(2.0);
                dirs.push_back(diag);
            }
        }
    }

    double best = std::numeric_limits<double>::infinity();
    double best_tau = 0.0, best_xi = 0.0;
    std::vector<double> best_dir = dirs[0];

    std::vector<double> xiv(p.d);
    auto value_at = [&](double tau, double r, const std::vector<double>& dir) {
        if (r == 0.0) return std::abs(1.0 - ktilde_ray_limit(p, tau, dir.data()));
        for (int a = 0; a < p.d; ++a) xiv[a] = r * dir[a];
        return std::abs(1.0 - ktilde(p, tau, xiv.data()));
    };

    for (const auto& dir : dirs) {
        // r = 0 row holds the ray limits (tau plays the role of c there)
        for (int i = 0; i <= scan.n_xi; ++i) {
            const double r = scan.xi_max * i / scan.n_xi;
            for (int j = 0; j <= scan.n_tau; ++j) {
                const double tau = scan.tau_max * j / scan.n_tau;
                const double v = value_at(tau, r, dir);
                if (v < best) {
                    best = v;
                    best_tau = tau;
                    best_xi = r;
                    best_dir = dir;
                }
            }
        }
    }

    // local grid refinement around the arg-min
    double dtau = scan.tau_max / scan.n_tau, dxi = scan.xi_max / scan.n_xi;
    for (int round = 0; round < scan.refine_rounds; ++round) {
        const double t0 = best_tau, r0 = best_xi;
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j) {
                const double r = std::clamp(r0 + i * dxi / 4, 0.0, scan.xi_max);
                const double tau = std::clamp(t0 + j * dtau / 4, 0.0, scan.tau_max);
                const double v = value_at(tau, r, best_dir);
                if (v < best) {
                    best = v;
                    best_tau = tau;
                    best_xi = r;
                }
            }
        dtau /= 4;
        dxi /= 4;
    }

    rep.margin = best;
    rep.tau_star = best_tau;
    rep.xi_star = best_xi;

    // outside the window: |Ktilde| <= sum_j w_j/theta_j / (1 + xi_max^2) for
    // |xi| > xi_max, and <= B1/|tau| for |tau| > tau_max
    double sum_wt = 0.0;
    for (const auto& c : p.comps) sum_wt += c.weight / c.theta;
    const double bound_xi = sum_wt / (1.0 + scan.xi_max * scan.xi_max);
    const double bound_tau = detail::khat_dt_l1_bound(p, scan.xi_max) / scan.tau_max;
    const double outside_sup = std::max(bound_xi, bound_tau);
    rep.outside_lower = std::max(0.0, 1.0 - outside_sup);
    rep.tail_certified = rep.outside_lower >= rep.margin;
    rep.stable = rep.margin >= scan.stable_threshold && rep.tail_certified;
    return rep;
}

}  // namespace svp

#endif
