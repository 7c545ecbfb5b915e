#ifndef SVP_GRID_HPP
#define SVP_GRID_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace svp {

/// Periodic box [-L, L]^d sampled with N points per axis (N even, power of
/// two for the FFT path). Nodes x_i = -L + i*h, h = 2L/N; the dual lattice is
/// k = (pi/L) * m with m in [-N/2, N/2).
struct SpatialGrid {
    int d = 3;
    double L = 1.0;
    int N = 16;

    SpatialGrid() = default;
    SpatialGrid(int d_, double L_, int N_) : d(d_), L(L_), N(N_) {
        if (d < 1) throw std::invalid_argument("SpatialGrid: d must be >= 1");
        if (L <= 0) throw std::invalid_argument("SpatialGrid: L must be > 0");
        if (N < 2 || (N & 1)) throw std::invalid_argument("SpatialGrid: N must be even and >= 2");
    }

    double spacing() const { return 2.0 * L / N; }
    double node(int i) const { return -L + spacing() * i; }
    /// Signed dual index for FFT bin m: m if m < N/2, else m - N.
    int freq_index(int m) const { return m < N / 2 ? m : m - N; }
    /// Dual frequency of FFT bin m along one axis.
    double freq(int m) const { return M_PI / L * freq_index(m); }
    double freq_max() const { return M_PI / L * (N / 2); }

    std::int64_t npoints() const {
        std::int64_t n = 1;
        for (int a = 0; a < d; ++a) n *= N;
        return n;
    }
    double cell_volume() const { return std::pow(spacing(), d); }
    double box_volume() const { return std::pow(2.0 * L, d); }

    bool operator==(const SpatialGrid& o) const { return d == o.d && L == o.L && N == o.N; }
};

/// Velocity box [-Lv, Lv]^d with uniform nodes v_i = -Lv + i*h, h = 2Lv/N
/// (the +Lv endpoint is dropped; for integrands decaying at the boundary this
/// is the periodic trapezoid rule, spectrally accurate for smooth data).
struct VelocityGrid {
    int d = 3;
    double Lv = 6.0;
    int N = 16;

    VelocityGrid() = default;
    VelocityGrid(int d_, double Lv_, int N_) : d(d_), Lv(Lv_), N(N_) {
        if (d < 1 || Lv <= 0 || N < 2) throw std::invalid_argument("VelocityGrid: bad parameters");
    }

    double spacing() const { return 2.0 * Lv / N; }
    double node(int i) const { return -Lv + spacing() * i; }
    std::int64_t npoints() const {
        std::int64_t n = 1;
        for (int a = 0; a < d; ++a) n *= N;
        return n;
    }
    /// Quadrature weight of one node (uniform).
    double weight() const { return std::pow(spacing(), d); }

    bool operator==(const VelocityGrid& o) const { return d == o.d && Lv == o.Lv && N == o.N; }
};

/// Sample times 0 = t_0 < ... < t_M = T. Uniform grids drive the Volterra and
/// flow stepping; geometric grids are for decay-exponent fitting.
struct TimeGrid {
    std::vector<double> t;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times) : t(std::move(times)) { validate(); }

    static TimeGrid uniform(double T, int M) {
        if (T <= 0 || M < 1) throw std::invalid_argument("TimeGrid::uniform: bad parameters");
        std::vector<double> ts(M + 1);
        for (int k = 0; k <= M; ++k) ts[k] = T * k / M;
        ts[M] = T;
        return TimeGrid(std::move(ts));
    }

    /// 0, t1, t1*q, ..., T with q chosen so that there are M intervals total.
    static TimeGrid geometric(double t1, double T, int M) {
        if (!(0 < t1 && t1 < T) || M < 2) throw std::invalid_argument("TimeGrid::geometric: bad parameters");
        std::vector<double> ts(M + 1);
        ts[0] = 0.0;
        const double q = std::pow(T / t1, 1.0 / (M - 1));
        for (int k = 1; k <= M; ++k) ts[k] = t1 * std::pow(q, k - 1);
        ts[M] = T;
        return TimeGrid(std::move(ts));
    }

    int steps() const { return static_cast<int>(t.size()) - 1; }
    double horizon() const { return t.back(); }
    double dt(int k) const { return t[k + 1] - t[k]; }
    bool is_uniform(double tol = 1e-12) const {
        for (int k = 0; k + 1 < steps(); ++k)
            if (std::abs(dt(k + 1) - dt(k)) > tol * t.back()) return false;
        return true;
    }

  private:
    void validate() const {
        if (t.size() < 2) throw std::invalid_argument("TimeGrid: need at least two samples");
        if (t.front() != 0.0) throw std::invalid_argument("TimeGrid: t0 must be 0");
        for (std::size_t k = 0; k + 1 < t.size(); ++k)
            if (!(t[k] < t[k + 1])) throw std::invalid_argument("TimeGrid: times must increase strictly");
    }
};

/// Row-major flattened index helpers for d-dimensional N^d lattices.
inline std::int64_t flat_index(const int* idx, int d, int N) {
    std::int64_t f = 0;
    for (int a = 0; a < d; ++a) f = f * N + idx[a];
    return f;
}
inline void unflatten(std::int64_t f, int d, int N, int* idx) {
    for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(f % N);
        f /= N;
    }
}

}  // namespace svp

#endif
