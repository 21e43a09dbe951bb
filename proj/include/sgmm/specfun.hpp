#pragma once

/**
 * @file specfun.hpp
 *
 * @brief Normal and gamma distribution functions, the noncentral chi-square
 * CDF and a bisection root finder.
 *
 * Everything here is a pure function of its arguments.
 */

#include "errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sgmm {

/**
 * @brief Interval [lo, hi] with function values of opposite sign (or a zero).
 */
struct RootBracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;

    /// Evaluates `f` at both ends.
    template <typename F>
    static RootBracket of(F&& f, double lo, double hi) {
        return RootBracket{lo, hi, f(lo), f(hi)};
    }

    bool valid() const {
        return lo < hi && (f_lo == 0.0 || f_hi == 0.0 || std::signbit(f_lo) != std::signbit(f_hi));
    }
};

inline constexpr int kRootMaxIterations = 200;
inline constexpr double kRootTolerance = 1e-12;

/// Standard normal CDF. Saturates to 0 / 1 in the far tails.
inline double normal_cdf(double x) {
    if (std::isnan(x)) {
        throw DomainError("normal_cdf: NaN argument");
    }
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Standard normal density.
inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

namespace detail {

// Wichura, Algorithm AS241 (PPND16). Relative accuracy about 1e-16.
inline double wichura_quantile(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

} // namespace detail

/**
 * @brief Inverse of the standard normal CDF.
 *
 * Rational initial value polished by one Newton step on the lower tail
 * (p > 1/2 is handled through the exactly representable complement 1 - p).
 */
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "normal_quantile: p = " << p << " outside (0, 1)";
        throw DomainError(msg.str());
    }
    if (p > 0.5) {
        return -normal_quantile(1.0 - p);
    }
    double x = detail::wichura_quantile(p);
    const double density = normal_pdf(x);
    if (density > 0.0) {
        x -= (normal_cdf(x) - p) / density;
    }
    return x;
}

/**
 * @brief CDF of Gamma(d/2, rate d/2), i.e. P(chi^2_d <= d x).
 */
inline double gamma_cdf_fd(double x, int d) {
    if (d < 1) {
        throw DomainError("gamma_cdf_fd: d must be >= 1");
    }
    if (!(x >= 0.0)) {
        throw DomainError("gamma_cdf_fd: x must be >= 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    return boost::math::gamma_p(0.5 * d, 0.5 * d * x);
}

/// Upper tail 1 - F_d(x), computed without cancellation.
inline double gamma_sf_fd(double x, int d) {
    if (d < 1) {
        throw DomainError("gamma_sf_fd: d must be >= 1");
    }
    if (!(x >= 0.0)) {
        throw DomainError("gamma_sf_fd: x must be >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return boost::math::gamma_q(0.5 * d, 0.5 * d * x);
}

/// P(chi^2_d <= x).
inline double chisq_cdf(double x, double dof) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

/**
 * @brief P(||Z + o||^2 <= x) for Z ~ N_d(0, I) and ||o||^2 = lambda.
 *
 * Poisson(lambda/2) mixture of central chi-square CDFs with d + 2k degrees of
 * freedom, summed outward from the Poisson mode. The central terms follow the
 * recurrence P(a+1, y) = P(a, y) - y^a e^{-y} / Gamma(a+1), so each step is
 * O(1) and the whole sum costs O(sqrt(lambda)) terms. The neglected tail mass
 * is below 1e-14.
 */
inline double noncentral_chisq_cdf(double x, int d, double lambda) {
    if (d < 1) {
        throw DomainError("noncentral_chisq_cdf: d must be >= 1");
    }
    if (!(x >= 0.0) || !(lambda >= 0.0) || std::isinf(lambda)) {
        throw DomainError("noncentral_chisq_cdf: x and lambda must be finite and >= 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    const double y = 0.5 * x;
    const double a0 = 0.5 * d;
    if (lambda == 0.0) {
        return boost::math::gamma_p(a0, y);
    }
    constexpr double kTail = 1e-14;
    const double half = 0.5 * lambda;
    const double mode = std::floor(half);

    // Poisson weight at the mode: e^{-h} h^k / k! == d/dh P(k+1, h).
    const double w_mode = boost::math::gamma_p_derivative(mode + 1.0, half);
    const double a_mode = a0 + mode;
    const double f_mode = boost::math::gamma_p(a_mode, y);
    // g(a) = y^a e^{-y} / Gamma(a+1), so that P(a+1, y) = P(a, y) - g(a).
    const double g_mode = boost::math::gamma_p_derivative(a_mode + 1.0, y);

    double sum = w_mode * f_mode;

    // Upward from the mode.
    {
        double w = w_mode;
        double f = f_mode;
        double g = g_mode;
        double a = a_mode;
        for (double k = mode;; k += 1.0) {
            f -= g;
            if (f < 0.0) {
                f = 0.0;
            }
            g *= y / (a + 1.0);
            a += 1.0;
            w *= half / (k + 1.0);
            sum += w * f;
            const double ratio = half / (k + 2.0);
            if (ratio < 1.0 && w * f * ratio / (1.0 - ratio) < kTail) {
                break;
            }
            if (w == 0.0 || f == 0.0) {
                break;
            }
        }
    }
    // Downward from the mode.
    {
        double w = w_mode;
        double f = f_mode;
        double g = g_mode;
        double a = a_mode;
        for (double k = mode; k > 0.0; k -= 1.0) {
            // g(a-1) = g(a) * a / y
            g *= a / y;
            a -= 1.0;
            f += g;
            if (f > 1.0) {
                f = 1.0;
            }
            w *= k / half;
            sum += w * f;
            const double ratio = (k - 1.0) / half;
            if (ratio < 1.0 && w * ratio / (1.0 - ratio) < kTail) {
                break;
            }
            if (w == 0.0) {
                break;
            }
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

/**
 * @brief Bisection on a sign-changing bracket.
 *
 * Stops when the bracket is narrower than `tol`, when f hits an exact zero, or
 * when the midpoint no longer moves in floating point. Deterministic.
 */
template <typename F>
double find_root(F&& f, RootBracket bracket, double tol = kRootTolerance, int max_iterations = kRootMaxIterations) {
    if (!bracket.valid()) {
        std::ostringstream msg;
        msg << "find_root: no sign change on [" << bracket.lo << ", " << bracket.hi << "] (f = " << bracket.f_lo
            << ", " << bracket.f_hi << ")";
        throw BracketError(msg.str());
    }
    if (bracket.f_lo == 0.0) {
        return bracket.lo;
    }
    if (bracket.f_hi == 0.0) {
        return bracket.hi;
    }
    double lo = bracket.lo;
    double hi = bracket.hi;
    const bool lo_negative = std::signbit(bracket.f_lo);
    for (int it = 0; it < max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (hi - lo <= tol || mid <= lo || mid >= hi) {
            return mid;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if (std::signbit(fm) == lo_negative) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw NoConvergence("find_root: iteration cap reached");
}

} // namespace sgmm
