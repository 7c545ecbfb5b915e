#ifndef SVP_VOLTERRA_CORE_HPP
#define SVP_VOLTERRA_CORE_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace svp {

using cplx = std::complex<double>;

/// Causal product-trapezoid convolution on a uniform grid:
/// out[k] = dt * ( sum_{j=1}^{k-1} K[k-j] f[j] + (K[k] f[0] + K[0] f[k]) / 2 ).
inline std::vector<cplx> convolve_causal(const std::vector<cplx>& K, const std::vector<cplx>& f, double dt) {
    if (K.size() != f.size()) throw std::invalid_argument("convolve_causal: size mismatch");
    const int n = static_cast<int>(K.size());
    std::vector<cplx> out(n, 0.0);
    for (int k = 1; k < n; ++k) {
        cplx acc = 0.5 * (K[k] * f[0] + K[0] * f[k]);
        for (int j = 1; j < k; ++j) acc += K[k - j] * f[j];
        out[k] = acc * dt;
    }
    return out;
}

/// Resolvent of the second-kind kernel: G = K + K *_t G, stepped explicitly
/// (the diagonal carries the K(0) dt/2 factor). Overflow past `blowup`
/// signals an unstable kernel or too coarse a step.
inline std::vector<cplx> resolvent_build(const std::vector<cplx>& K, double dt, double blowup = 1e12) {
    const int n = static_cast<int>(K.size());
    std::vector<cplx> G(n, 0.0);
    if (n == 0) return G;
    G[0] = K[0];  // the t=0 convolution is empty
    const cplx diag = 1.0 - 0.5 * dt * K[0];
    if (std::abs(diag) < 1e-14) throw std::runtime_error("resolvent_build: singular diagonal");
    for (int k = 1; k < n; ++k) {
        cplx acc = 0.5 * K[k] * G[0];
        for (int j = 1; j < k; ++j) acc += K[k - j] * G[j];
        G[k] = (K[k] + dt * acc) / diag;
        if (std::abs(G[k]) > blowup)
            throw std::runtime_error("resolvent_build: growth overflow (unstable kernel or coarse dt)");
    }
    return G;
}

/// Second-kind Volterra solve rho = S + K *_t rho on a uniform grid.
inline std::vector<cplx> volterra_solve(const std::vector<cplx>& K, const std::vector<cplx>& S, double dt,
                                        double blowup = 1e12) {
    if (K.size() != S.size()) throw std::invalid_argument("volterra_solve: size mismatch");
    const int n = static_cast<int>(K.size());
    std::vector<cplx> rho(n, 0.0);
    if (n == 0) return rho;
    rho[0] = S[0];  // K(0) convolution weight vanishes at t=0
    const cplx diag = 1.0 - 0.5 * dt * K[0];
    if (std::abs(diag) < 1e-14) throw std::runtime_error("volterra_solve: singular diagonal");
    for (int k = 1; k < n; ++k) {
        cplx acc = 0.5 * (K[k] * rho[0]);
        for (int j = 1; j < k; ++j) acc += K[k - j] * rho[j];
        rho[k] = (S[k] + dt * acc) / diag;
        if (std::abs(rho[k]) > blowup) throw std::runtime_error("volterra_solve: growth overflow");
    }
    return rho;
}

}  // namespace svp

#endif
