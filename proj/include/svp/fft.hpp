#ifndef SVP_FFT_HPP
#define SVP_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "svp/grid.hpp"

namespace svp {

/// Cached-plan FFTW front end. Plans are created once per (dims, sign) with
/// FFTW_UNALIGNED so they can be executed on any buffer; creation is guarded
/// by a mutex, execution is thread-safe.
class Fft {
  public:
    static void c2c(int d, int N, std::complex<double>* data, int sign) {
        fftw_plan p = plan(d, N, sign);
        fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
    }

  private:
    static fftw_plan plan(int d, int N, int sign) {
        static std::mutex mu;
        static std::map<std::tuple<int, int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mu);
        const auto key = std::make_tuple(d, N, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<int> dims(d, N);
        std::vector<std::complex<double>> tmp(static_cast<std::size_t>(std::pow(N, d)));
        fftw_plan p = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(tmp.data()),
                                    reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, p);
        return p;
    }
};

/// Complex spectrum on the dual lattice of a SpatialGrid, stored in FFT bin
/// order (bin m <-> frequency (pi/L)*[m or m-N]). The scaling follows the
/// continuum convention
///     ghat(k) = integral g(x) exp(-i k.x) dx  ~= h^d sum_n g(x_n) exp(-i k.x_n),
/// so spectra of box-supported functions match their analytic Fourier
/// transforms directly.
struct Spectrum {
    SpatialGrid grid;
    std::vector<std::complex<double>> c;

    Spectrum() = default;
    explicit Spectrum(const SpatialGrid& g) : grid(g), c(g.npoints()) {}

    std::complex<double>& operator[](std::size_t i) { return c[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return c[i]; }
    std::size_t size() const { return c.size(); }
};

namespace detail {
/// (-1)^(m1+...+md) mask from the -L grid offset; applying it before/after the
/// raw DFT recenters phases so bins carry the centered-box convention.
inline void apply_center_signs(const SpatialGrid& g, std::complex<double>* c) {
    const int N = g.N, d = g.d;
    const std::int64_t n = g.npoints();
    std::vector<int> idx(d);
    // parity of the index sum flips sign; iterate row-major with incremental parity
    for (std::int64_t f = 0; f < n; ++f) {
        std::int64_t r = f;
        int parity = 0;
        for (int a = 0; a < d; ++a) {
            parity += static_cast<int>(r % N);
            r /= N;
        }
        if (parity & 1) c[f] = -c[f];
    }
}
}  // namespace detail

/// Forward transform of real samples on the grid (centered convention above).
inline Spectrum transform_forward(const SpatialGrid& g, const std::vector<double>& samples) {
    if (static_cast<std::int64_t>(samples.size()) != g.npoints())
        throw std::invalid_argument("transform_forward: size mismatch");
    Spectrum s(g);
    for (std::size_t i = 0; i < samples.size(); ++i) s.c[i] = samples[i];
    Fft::c2c(g.d, g.N, s.c.data(), FFTW_FORWARD);
    detail::apply_center_signs(g, s.c.data());
    const double scale = g.cell_volume();
    for (auto& z : s.c) z *= scale;
    return s;
}

inline Spectrum transform_forward_complex(const SpatialGrid& g, std::vector<std::complex<double>> samples) {
    if (static_cast<std::int64_t>(samples.size()) != g.npoints())
        throw std::invalid_argument("transform_forward: size mismatch");
    Spectrum s(g);
    s.c = std::move(samples);
    Fft::c2c(g.d, g.N, s.c.data(), FFTW_FORWARD);
    detail::apply_center_signs(g, s.c.data());
    const double scale = g.cell_volume();
    for (auto& z : s.c) z *= scale;
    return s;
}

/// Inverse transform; returns complex samples (imaginary parts report
/// asymmetry of the spectrum).
inline std::vector<std::complex<double>> transform_inverse_complex(const Spectrum& s) {
    std::vector<std::complex<double>> out = s.c;
    detail::apply_center_signs(s.grid, out.data());
    Fft::c2c(s.grid.d, s.grid.N, out.data(), FFTW_BACKWARD);
    const double scale = 1.0 / s.grid.box_volume();
    for (auto& z : out) z *= scale;
    return out;
}

/// Inverse transform to real samples; max |imag| of the raw inverse is
/// written to *imag_residue when requested.
inline std::vector<double> transform_inverse(const Spectrum& s, double* imag_residue = nullptr) {
    auto z = transform_inverse_complex(s);
    std::vector<double> out(z.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = z[i].real();
        worst = std::max(worst, std::abs(z[i].imag()));
    }
    if (imag_residue) *imag_residue = worst;
    return out;
}

/// Fills k[0..d-1] with the dual frequency of flattened bin f.
inline void bin_freq(const SpatialGrid& g, std::int64_t f, double* k) {
    for (int a = g.d - 1; a >= 0; --a) {
        k[a] = g.freq(static_cast<int>(f % g.N));
        f /= g.N;
    }
}

/// |k|^2 of flattened bin f.
inline double bin_k2(const SpatialGrid& g, std::int64_t f) {
    double k2 = 0.0;
    for (int a = g.d - 1; a >= 0; --a) {
        const double k = g.freq(static_cast<int>(f % g.N));
        k2 += k * k;
        f /= g.N;
    }
    return k2;
}

/// Spectral partial derivative along axis `ax` applied in place.
inline void spectral_derivative(Spectrum& s, int ax) {
    const int N = s.grid.N, d = s.grid.d;
    std::vector<int> idx(d);
    for (std::int64_t f = 0; f < static_cast<std::int64_t>(s.size()); ++f) {
        std::int64_t r = f;
        int m = 0;
        for (int a = d - 1; a >= 0; --a) {
            if (a == ax) m = static_cast<int>(r % N);
            r /= N;
        }
        s.c[f] *= std::complex<double>(0.0, s.grid.freq(m));
    }
}

/// Multiplies the spectrum by exp(-i k.sigma), i.e. shifts samples to
/// g(x - sigma) under the trigonometric interpolant.
inline void spectral_shift(Spectrum& s, const double* sigma) {
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    std::vector<double> k(s.grid.d);
    for (std::int64_t f = 0; f < n; ++f) {
        bin_freq(s.grid, f, k.data());
        double phase = 0.0;
        for (int a = 0; a < s.grid.d; ++a) phase -= k[a] * sigma[a];
        s.c[f] *= std::polar(1.0, phase);
    }
}

}  // namespace svp

#endif
