#ifndef SVP_DECAY_HPP
#define SVP_DECAY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "svp/numeric.hpp"

namespace svp {

struct DecayRow {
    double t = 0.0;
    double value = 0.0;
    double envelope = 0.0;
    double ratio = 0.0;  // value / envelope
};

/// Fitted log-log exponents, weighted-sup constants and pass/fail verdicts
/// against the theoretical envelopes.
struct DecayReport {
    std::vector<DecayRow> rows;
    double fit_lo = 0.0, fit_hi = 0.0;  // fit window in t
    double slope = 0.0;
    double slope_se = 0.0;
    double slope_target = 0.0;
    double slope_tol = 0.0;
    bool slope_pass = false;
    double empirical_const = 0.0;  // sup_t value / envelope over the window
    double drift_stat = 0.0;       // |t|-statistic of the log-log(t) residual term
    bool drift_significant = false;
    std::string label;
};

/// Least-squares slope of log(value) vs log(t) over t in [lo, hi].
inline LineFit fit_loglog_slope(const std::vector<DecayRow>& rows, double lo, double hi) {
    std::vector<double> xs, ys;
    for (const auto& r : rows)
        if (r.t >= lo && r.t <= hi && r.value > 0) {
            xs.push_back(std::log(r.t));
            ys.push_back(std::log(r.value));
        }
    return fit_line(xs, ys);
}

/// Regresses the power-law fit residuals against log(log(t+2)) and reports
/// the t-statistic of that coefficient; significance at 95% flags a
/// logarithmic correction on top of the pure power law.
inline void log_drift_test(DecayReport& rep) {
    std::vector<double> xs, ys;
    for (const auto& r : rep.rows)
        if (r.t >= rep.fit_lo && r.t <= rep.fit_hi && r.value > 0) {
            xs.push_back(std::log(r.t));
            ys.push_back(std::log(r.value));
        }
    if (xs.size() < 4) {
        rep.drift_stat = 0.0;
        rep.drift_significant = false;
        return;
    }
    const LineFit base = fit_line(xs, ys);
    std::vector<double> z(xs.size()), resid(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        resid[i] = ys[i] - base.intercept - base.slope * xs[i];
        z[i] = std::log(std::log(std::exp(xs[i]) + 2.0));
    }
    // residuals are orthogonal to (1, log t) already; test the extra regressor
    const LineFit drift = fit_line(z, resid);
    rep.drift_stat = drift.slope_se > 0 ? std::abs(drift.slope) / drift.slope_se : 0.0;
    rep.drift_significant = rep.drift_stat > t_crit_95(drift.n - 2);
}

inline void finish_report(DecayReport& rep) {
    const LineFit f = fit_loglog_slope(rep.rows, rep.fit_lo, rep.fit_hi);
    rep.slope = f.slope;
    rep.slope_se = f.slope_se;
    rep.slope_pass = std::abs(rep.slope - rep.slope_target) <= rep.slope_tol;
    rep.empirical_const = 0.0;
    for (const auto& r : rep.rows)
        if (r.t >= rep.fit_lo && r.t <= rep.fit_hi && r.envelope > 0)
            rep.empirical_const = std::max(rep.empirical_const, r.value / r.envelope);
    log_drift_test(rep);
}

}  // namespace svp

#endif
