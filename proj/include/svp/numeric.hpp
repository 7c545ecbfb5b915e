#ifndef SVP_NUMERIC_HPP
#define SVP_NUMERIC_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace svp {

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const int n = static_cast<int>(x_.size());
        if (n < 3 || y_.size() != x_.size()) throw std::invalid_argument("CubicSpline: need >= 3 nodes");
        for (int i = 0; i + 1 < n; ++i)
            if (!(x_[i] < x_[i + 1])) throw std::invalid_argument("CubicSpline: x must increase");
        y2_.assign(n, 0.0);
        std::vector<double> u(n, 0.0);
        for (int i = 1; i < n - 1; ++i) {
            const double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
            const double p = sig * y2_[i - 1] + 2.0;
            y2_[i] = (sig - 1.0) / p;
            u[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) - (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
            u[i] = (6.0 * u[i] / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
        }
        for (int k = n - 2; k >= 0; --k) y2_[k] = y2_[k] * y2_[k + 1] + u[k];
    }

    double operator()(double x) const {
        const int n = static_cast<int>(x_.size());
        int lo = 0, hi = n - 1;
        if (x <= x_.front()) hi = 1;
        else if (x >= x_.back()) lo = n - 2;
        else
            while (hi - lo > 1) {
                const int mid = (lo + hi) / 2;
                (x_[mid] > x ? hi : lo) = mid;
            }
        const double h = x_[hi] - x_[lo];
        const double A = (x_[hi] - x) / h, B = (x - x_[lo]) / h;
        return A * y_[lo] + B * y_[hi] + ((A * A * A - A) * y2_[lo] + (B * B * B - B) * y2_[hi]) * h * h / 6.0;
    }

  private:
    std::vector<double> x_, y_, y2_;
};

/// Ordinary least squares y ~ a + b x; returns (a, b) and, if asked, the
/// standard error of b.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 3 || y.size() != x.size()) throw std::invalid_argument("fit_line: need >= 3 points");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("fit_line: degenerate x");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.slope_se = (n > 2) ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return f;
}

/// Two-sided t critical value at 95% for n-2 dof (coarse table is enough for
/// the drift verdicts).
inline double t_crit_95(int dof) {
    static const double tab[] = {12.71, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                 2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
    if (dof <= 0) return 12.71;
    if (dof <= 20) return tab[dof - 1];
    if (dof <= 30) return 2.045;
    if (dof <= 60) return 2.0;
    return 1.96;
}

}  // namespace svp

#endif
