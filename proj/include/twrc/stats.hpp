#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace twrc {

struct BinomialEstimate {
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long trials = 0;
    long successes = 0;

    double stderr_abs() const {
        if (trials == 0) return 0.0;
        return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
    }
};

// Wilson score interval (default 95%, z = 1.96).
inline BinomialEstimate wilson_interval(long successes, long trials, double z = 1.96) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be > 0");
    BinomialEstimate e;
    e.trials = trials;
    e.successes = successes;
    const double n = static_cast<double>(trials);
    e.p_hat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (e.p_hat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(e.p_hat * (1.0 - e.p_hat) / n + z2 / (4.0 * n * n)) / denom;
    e.ci_lo = std::max(0.0, center - half);
    e.ci_hi = std::min(1.0, center + half);
    return e;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2)
        throw std::invalid_argument("least_squares: need >= 2 matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate x values");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ss_res += r * r;
        }
        fit.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

// One-sided p-value for slope > 0 via the normal approximation to the t
// statistic; adequate at the trace lengths used here.
inline double slope_positive_pvalue(const LineFit& fit) {
    if (fit.slope_stderr <= 0.0) return fit.slope > 0.0 ? 0.0 : 1.0;
    const double t = fit.slope / fit.slope_stderr;
    return 0.5 * std::erfc(t / std::sqrt(2.0));
}

}  // namespace twrc
