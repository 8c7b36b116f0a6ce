#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace nplcm {

// An expert statement of the form "the rate lies between low and high",
// where low/high sit at the given CDF quantiles (2.5% / 97.5% by default).
struct ElicitedRange {
    double low = 0.0;
    double high = 0.0;
    double quantile_low = 0.025;
    double quantile_high = 0.975;

    void validate() const {
        if (!(0.0 < low && low < high && high < 1.0))
            throw std::invalid_argument("ElicitedRange: need 0 < low < high < 1");
        if (!(0.0 < quantile_low && quantile_low < quantile_high && quantile_high < 1.0))
            throw std::invalid_argument("ElicitedRange: need 0 < q_low < q_high < 1");
    }
};

namespace detail {

inline double beta_cdf(double x, double c1, double c2) {
    return boost::math::ibeta(c1, c2, x);
}

// Larger c1 pushes mass right (CDF down); larger c2 pushes mass left
// (CDF up). Both bisections below rely on that monotonicity.
inline double bisect_c1(double x, double target, double c2) {
    double lo = 1e-8, hi = 1e8;
    for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        if (beta_cdf(x, mid, c2) > target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

inline double bisect_c2(double x, double target, double c1) {
    double lo = 1e-8, hi = 1e8;
    for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        if (beta_cdf(x, c1, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

}  // namespace detail

// Solves BetaCDF(low) = quantile_low, BetaCDF(high) = quantile_high for the
// shape pair. Damped Newton in log-shape coordinates off a method-of-moments
// start, with a coordinate-wise bisection sweep as the fallback.
inline std::pair<double, double> beta_from_quantiles(const ElicitedRange& r) {
    r.validate();
    const double tol = 1e-10;

    double mu = 0.5 * (r.low + r.high);
    double sd = std::max((r.high - r.low) / 4.0, 1e-3);
    double s = mu * (1.0 - mu) / (sd * sd) - 1.0;
    double c1 = s > 0.0 ? mu * s : 1.0;
    double c2 = s > 0.0 ? (1.0 - mu) * s : 1.0;

    auto resid = [&](double a, double b, double& r1, double& r2) {
        r1 = detail::beta_cdf(r.low, a, b) - r.quantile_low;
        r2 = detail::beta_cdf(r.high, a, b) - r.quantile_high;
    };

    double x1 = std::log(c1), x2 = std::log(c2);
    double r1, r2;
    resid(std::exp(x1), std::exp(x2), r1, r2);
    double err = std::max(std::abs(r1), std::abs(r2));
    const double h = 1e-6;
    for (int it = 0; it < 100 && err > tol; ++it) {
        double a = std::exp(x1), b = std::exp(x2);
        double r1p, r2p, r1m, r2m;
        resid(std::exp(x1 + h), b, r1p, r2p);
        resid(std::exp(x1 - h), b, r1m, r2m);
        double j11 = (r1p - r1m) / (2 * h), j21 = (r2p - r2m) / (2 * h);
        resid(a, std::exp(x2 + h), r1p, r2p);
        resid(a, std::exp(x2 - h), r1m, r2m);
        double j12 = (r1p - r1m) / (2 * h), j22 = (r2p - r2m) / (2 * h);
        double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) break;
        double d1 = (j22 * r1 - j12 * r2) / det;
        double d2 = (-j21 * r1 + j11 * r2) / det;
        double step = 1.0;
        for (int half = 0; half < 40; ++half, step *= 0.5) {
            double n1, n2;
            resid(std::exp(x1 - step * d1), std::exp(x2 - step * d2), n1, n2);
            double nerr = std::max(std::abs(n1), std::abs(n2));
            if (nerr < err) {
                x1 -= step * d1;
                x2 -= step * d2;
                r1 = n1;
                r2 = n2;
                err = nerr;
                break;
            }
        }
    }

    if (err > tol) {
        // Gauss-Seidel on the two one-dimensional problems.
        c1 = std::exp(x1);
        c2 = std::exp(x2);
        for (int it = 0; it < 500 && err > tol; ++it) {
            c1 = detail::bisect_c1(r.low, r.quantile_low, c2);
            c2 = detail::bisect_c2(r.high, r.quantile_high, c1);
            resid(c1, c2, r1, r2);
            err = std::max(std::abs(r1), std::abs(r2));
        }
        x1 = std::log(c1);
        x2 = std::log(c2);
    }

    if (err > 1e-8) {
        std::ostringstream msg;
        msg << "beta_from_quantiles: no convergence, residuals (" << r1 << ", " << r2 << ")";
        throw std::runtime_error(msg.str());
    }
    return {std::exp(x1), std::exp(x2)};
}

// Truncated stick-breaking: w_k = u_k * prod_{s<k} (1 - u_s), with the last
// weight taking the remainder so the output sums to one exactly.
inline std::vector<double> stick_break(std::span<const double> sticks) {
    for (double u : sticks)
        if (!(u > 0.0 && u < 1.0))
            throw std::invalid_argument("stick_break: fractions must lie in (0,1)");
    std::vector<double> w(sticks.size() + 1);
    double remaining = 1.0;
    double partial = 0.0;
    for (std::size_t k = 0; k < sticks.size(); ++k) {
        w[k] = sticks[k] * remaining;
        partial += w[k];
        remaining *= 1.0 - sticks[k];
    }
    w.back() = std::max(0.0, 1.0 - partial);
    return w;
}

}  // namespace nplcm
