#ifndef SVP_INITIAL_DATA_HPP
#define SVP_INITIAL_DATA_HPP

#include <functional>
#include <stdexcept>

namespace svp {

/// Perturbation data f0(x, v) with its amplitude and the Holder-gate record.
struct InitialData {
    std::function<double(const double*, const double*)> f;
    double eps = 0.0;       // amplitude parameter
    double v_radius = 7.0;  // support control: |v| beyond this contributes nothing
    double holder_norm = -1.0;  // filled by the smallness gate
    bool gate_passed = false;

    double operator()(const double* x, const double* v) const { return f(x, v); }
};

/// Separable Gaussian bump eps * g_{sx}(x) g_{sv}(v), the workhorse of the
/// nonlinear experiments.
inline InitialData gaussian_initial_data(int d, double eps, double sigma_x, double sigma_v) {
    if (sigma_x <= 0 || sigma_v <= 0) throw std::invalid_argument("gaussian_initial_data: bad widths");
    InitialData id;
    id.eps = eps;
    id.v_radius = 6.5 * sigma_v;
    id.f = [d, eps, sigma_x, sigma_v](const double* x, const double* v) {
        double qx = 0.0, qv = 0.0;
        for (int a = 0; a < d; ++a) {
            qx += x[a] * x[a];
            qv += v[a] * v[a];
        }
        return eps * std::exp(-qx / (2 * sigma_x * sigma_x)) * std::exp(-qv / (2 * sigma_v * sigma_v));
    };
    return id;
}

}  // namespace svp

#endif
