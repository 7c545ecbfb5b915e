#ifndef SVP_EQUILIBRIA_HPP
#define SVP_EQUILIBRIA_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "svp/grid.hpp"

namespace svp {

/// One Gaussian bump: weight * (2 pi theta)^{-d/2} exp(-|v - u|^2 / (2 theta)).
struct GaussianComponent {
    double weight = 1.0;
    std::vector<double> shift;  // u, size d
    double theta = 1.0;
};

/// Homogeneous equilibrium mu(v) as a mixture of Gaussians. Closed forms for
/// the gradient, the Hessian, the velocity Fourier transform and arbitrary
/// derivatives (via probabilists' Hermite polynomials) are all available,
/// which keeps the oscillatory quadratures cheap and exactly tail-bounded.
class EquilibriumProfile {
  public:
    int d = 3;
    double decay_N = 5.0;  // the N > d of the norm assumption
    std::vector<GaussianComponent> comps;

    EquilibriumProfile() = default;
    EquilibriumProfile(int d_, std::vector<GaussianComponent> comps_, double decayN)
        : d(d_), decay_N(decayN), comps(std::move(comps_)) {
        if (decay_N <= d) throw std::invalid_argument("EquilibriumProfile: requires N > d");
        for (auto& c : comps) {
            if (c.theta <= 0) throw std::invalid_argument("EquilibriumProfile: theta must be > 0");
            if (static_cast<int>(c.shift.size()) != d) c.shift.resize(d, 0.0);
        }
    }

    double mass() const {
        double m = 0.0;
        for (const auto& c : comps) m += c.weight;
        return m;
    }

    bool is_zero() const { return comps.empty(); }

    /// Radially symmetric iff every component is centered.
    bool is_radial() const {
        for (const auto& c : comps)
            for (double s : c.shift)
                if (s != 0.0) return false;
        return true;
    }

    double mu(const double* v) const {
        double acc = 0.0;
        for (const auto& c : comps) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) {
                const double z = v[a] - c.shift[a];
                q += z * z;
            }
            acc += c.weight * std::exp(-q / (2 * c.theta)) / std::pow(2 * M_PI * c.theta, 0.5 * d);
        }
        return acc;
    }

    void grad_mu(const double* v, double* out) const {
        for (int a = 0; a < d; ++a) out[a] = 0.0;
        for (const auto& c : comps) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) {
                const double z = v[a] - c.shift[a];
                q += z * z;
            }
            const double base = c.weight * std::exp(-q / (2 * c.theta)) / std::pow(2 * M_PI * c.theta, 0.5 * d);
            for (int a = 0; a < d; ++a) out[a] += base * (-(v[a] - c.shift[a]) / c.theta);
        }
    }

    /// Hessian of mu, row-major d x d.
    void hess_mu(const double* v, double* out) const {
        for (int a = 0; a < d * d; ++a) out[a] = 0.0;
        for (const auto& c : comps) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) {
                const double z = v[a] - c.shift[a];
                q += z * z;
            }
            const double base = c.weight * std::exp(-q / (2 * c.theta)) / std::pow(2 * M_PI * c.theta, 0.5 * d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const double za = (v[a] - c.shift[a]) / c.theta, zb = (v[b] - c.shift[b]) / c.theta;
                    out[a * d + b] += base * (za * zb - (a == b ? 1.0 / c.theta : 0.0));
                }
        }
    }

    /// Fourier transform integral mu(v) exp(-i eta.v) dv (complex for shifted
    /// mixtures): sum_j w_j exp(-i eta.u_j) exp(-theta_j |eta|^2 / 2).
    std::complex<double> muhat(const double* eta) const {
        std::complex<double> acc = 0.0;
        double e2 = 0.0;
        for (int a = 0; a < d; ++a) e2 += eta[a] * eta[a];
        for (const auto& c : comps) {
            double phase = 0.0;
            for (int a = 0; a < d; ++a) phase -= eta[a] * c.shift[a];
            acc += c.weight * std::polar(std::exp(-c.theta * e2 / 2), phase);
        }
        return acc;
    }

    /// muhat along a fixed unit direction, as a function of the radius r.
    std::complex<double> muhat_ray(double r, const double* dir) const {
        std::vector<double> eta(d);
        for (int a = 0; a < d; ++a) eta[a] = r * dir[a];
        return muhat(eta.data());
    }
};

inline EquilibriumProfile maxwellian(int d, double theta) {
    if (theta <= 0) throw std::invalid_argument("maxwellian: theta must be > 0");
    return EquilibriumProfile(d, {GaussianComponent{1.0, std::vector<double>(d, 0.0), theta}}, d + 2.0);
}

/// lambda * Maxwellian(v - u e1) + (1 - lambda) * Maxwellian(v + u e1).
inline EquilibriumProfile double_maxwellian(int d, double u, double lambda, double theta) {
    if (lambda < 0 || lambda > 1) throw std::invalid_argument("double_maxwellian: lambda in [0,1]");
    std::vector<double> up(d, 0.0), um(d, 0.0);
    up[0] = u;
    um[0] = -u;
    std::vector<GaussianComponent> cs;
    if (lambda > 0) cs.push_back({lambda, up, theta});
    if (lambda < 1) cs.push_back({1.0 - lambda, um, theta});
    return EquilibriumProfile(d, std::move(cs), d + 2.0);
}

namespace detail {

/// Probabilists' Hermite values He_0..He_n at x.
inline void hermite_row(double x, int n, double* he) {
    he[0] = 1.0;
    if (n >= 1) he[1] = x;
    for (int k = 1; k < n; ++k) he[k + 1] = x * he[k] - k * he[k - 1];
}

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace detail

/// || F ||_{W^beta_alpha} = sum_{j=0}^{beta} integral <v>^alpha |nabla^j F| dv
/// applied to F = grad mu. |nabla^j F| is the Frobenius magnitude over the
/// symmetric derivative tensor (multinomial multiplicities) and all d
/// components of F. Quadrature: tensor trapezoid sized to the mixture.
struct WeightedNormReport {
    double alpha = 0.0;
    int beta = 0;
    double value = 0.0;
};

inline WeightedNormReport weighted_norm_grad_mu(const EquilibriumProfile& p, double alpha, int beta,
                                                int quad_points_per_axis = 0) {
    const int d = p.d;
    if (p.is_zero()) return {alpha, beta, 0.0};
    // box big enough that <v>^alpha * He_(beta+1) * Gaussian has negligible tail
    double reach = 0.0, thmax = 0.0;
    for (const auto& c : p.comps) {
        double s = 0.0;
        for (double u : c.shift) s = std::max(s, std::abs(u));
        reach = std::max(reach, s);
        thmax = std::max(thmax, c.theta);
    }
    const double Lq = reach + std::sqrt(thmax) * (8.0 + std::sqrt(2.0 * (beta + alpha + 4)));
    const int Nq = quad_points_per_axis > 0 ? quad_points_per_axis : std::max(48, int(Lq / 0.35));
    const double h = 2 * Lq / Nq;

    const int maxorder = beta + 1;  // derivatives of F = grad mu go one higher
    std::vector<int> idx(d);
    std::vector<double> v(d);
    // enumerate multi-indices of each total order once
    std::vector<std::vector<std::vector<int>>> multis(beta + 1);
    {
        std::vector<int> b(d, 0);
        std::function<void(int, int, int)> rec = [&](int axis, int remaining, int total) {
            if (axis == d - 1) {
                b[axis] = remaining;
                multis[total].push_back(b);
                return;
            }
            for (int k = 0; k <= remaining; ++k) {
                b[axis] = k;
                rec(axis + 1, remaining - k, total);
            }
        };
        for (int j = 0; j <= beta; ++j) rec(0, j, j);
    }

    double total = 0.0;
    const int nc = static_cast<int>(p.comps.size());
    std::vector<double> he(maxorder + 2);
    // D[c][a][n] = (-1/sqrt(theta))^n He_n(z) exp(-z^2/2) at the current point
    std::vector<double> D(static_cast<std::size_t>(nc) * d * (maxorder + 1));
    std::vector<double> prefac(nc);
    for (int c = 0; c < nc; ++c)
        prefac[c] = p.comps[c].weight / std::pow(2 * M_PI * p.comps[c].theta, 0.5 * d);
    auto Dat = [&](int c, int a, int n) -> double& { return D[(static_cast<std::size_t>(c) * d + a) * (maxorder + 1) + n]; };

    for (std::int64_t f = 0; f < std::int64_t(std::pow(Nq, d)); ++f) {
        std::int64_t r = f;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = int(r % Nq);
            r /= Nq;
        }
        for (int a = 0; a < d; ++a) v[a] = -Lq + h * idx[a];
        double v2 = 0.0;
        for (int a = 0; a < d; ++a) v2 += v[a] * v[a];
        const double weight_pt = std::pow(std::sqrt(1 + v2), alpha) * std::pow(h, d);

        for (int c = 0; c < nc; ++c) {
            const double is = 1.0 / std::sqrt(p.comps[c].theta);
            for (int a = 0; a < d; ++a) {
                const double z = (v[a] - p.comps[c].shift[a]) * is;
                detail::hermite_row(z, maxorder, he.data());
                const double g = std::exp(-z * z / 2);
                double sgn = 1.0;
                for (int n = 0; n <= maxorder; ++n) {
                    Dat(c, a, n) = sgn * he[n] * g;
                    sgn *= -is;
                }
            }
        }
        auto dmu = [&](const std::vector<int>& bb) {
            double acc = 0.0;
            for (int c = 0; c < nc; ++c) {
                double prod = prefac[c];
                for (int a = 0; a < d; ++a) prod *= Dat(c, a, bb[a]);
                acc += prod;
            }
            return acc;
        };

        double point_sum = 0.0;
        std::vector<int> bb(d);
        for (int j = 0; j <= beta; ++j) {
            double frob2 = 0.0;
            for (const auto& b : multis[j]) {
                double mult = detail::factorial(j);
                for (int a = 0; a < d; ++a) mult /= detail::factorial(b[a]);
                for (int comp = 0; comp < d; ++comp) {
                    bb = b;
                    bb[comp] += 1;  // d/dv_comp of mu
                    const double val = dmu(bb);
                    frob2 += mult * val * val;
                }
            }
            point_sum += std::sqrt(frob2);
        }
        total += point_sum * weight_pt;
    }
    return {alpha, beta, total};
}

/// Mbar_gamma = || <.>^{d+gamma+4} grad mu ||_{W^{2d+2gamma+5,1}}.
inline double mbar_gamma(const EquilibriumProfile& p, int gamma) {
    return weighted_norm_grad_mu(p, p.d + gamma + 4.0, 2 * p.d + 2 * gamma + 5).value;
}

/// Mtilde_gamma = Mbar (1 + Mbar)^{d+gamma+1}; the paper uses gamma = 0, 1.
inline double mtilde_gamma(const EquilibriumProfile& p, int gamma) {
    if (gamma != 0 && gamma != 1) throw std::invalid_argument("mtilde_gamma: gamma must be 0 or 1");
    const double mb = mbar_gamma(p, gamma);
    return mb * std::pow(1.0 + mb, p.d + gamma + 1);
}

/// M* = ||<.>^N grad mu||_{W^{2,inf}} + ||<.>^{d+5} grad mu||_{W^{2d+7,1}} + 1/(N-d).
inline double mstar(const EquilibriumProfile& p) {
    const int d = p.d;
    // sup part on a dense lattice
    double reach = 0.0, thmax = 0.0;
    for (const auto& c : p.comps) {
        for (double u : c.shift) reach = std::max(reach, std::abs(u));
        thmax = std::max(thmax, c.theta);
    }
    const double Lq = reach + std::sqrt(thmax) * (8.0 + std::sqrt(2.0 * (p.decay_N + 8)));
    const int Nq = 64;
    const double h = 2 * Lq / Nq;
    std::vector<double> v(d), he(8);
    double sup = 0.0;
    std::vector<int> idx(d);
    for (std::int64_t f = 0; f < std::int64_t(std::pow(Nq, d)); ++f) {
        std::int64_t r = f;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = int(r % Nq);
            r /= Nq;
        }
        double v2 = 0.0;
        for (int a = 0; a < d; ++a) {
            v[a] = -Lq + h * idx[a];
            v2 += v[a] * v[a];
        }
        const double w = std::pow(std::sqrt(1 + v2), p.decay_N);
        // |nabla^j grad mu| for j = 0..2 via finite mixture closed forms
        double mags = 0.0;
        for (int j = 0; j <= 2; ++j) {
            double frob2 = 0.0;
            std::vector<int> b(d, 0);
            std::function<void(int, int)> rec = [&](int axis, int remaining) {
                if (axis == d - 1) {
                    b[axis] = remaining;
                    double mult = detail::factorial(j);
                    for (int a = 0; a < d; ++a) mult /= detail::factorial(b[a]);
                    for (int comp = 0; comp < d; ++comp) {
                        std::vector<int> bb = b;
                        bb[comp] += 1;
                        double acc = 0.0;
                        for (const auto& c : p.comps) {
                            const double is = 1.0 / std::sqrt(c.theta);
                            double prod = c.weight / std::pow(2 * M_PI * c.theta, 0.5 * d);
                            for (int a = 0; a < d; ++a) {
                                const double z = (v[a] - c.shift[a]) * is;
                                detail::hermite_row(z, bb[a], he.data());
                                prod *= std::pow(-is, bb[a]) * he[bb[a]] * std::exp(-z * z / 2);
                            }
                            acc += prod;
                        }
                        frob2 += mult * acc * acc;
                    }
                    return;
                }
                for (int k = 0; k <= remaining; ++k) {
                    b[axis] = k;
                    rec(axis + 1, remaining - k);
                }
            };
            rec(0, j);
            mags += std::sqrt(frob2);
        }
        sup = std::max(sup, w * mags);
    }
    const double l1part = weighted_norm_grad_mu(p, d + 5.0, 2 * d + 7).value;
    return sup + l1part + 1.0 / (p.decay_N - d);
}

}  // namespace svp

#endif
