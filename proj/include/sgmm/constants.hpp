#pragma once

/**
 * @file constants.hpp
 *
 * @brief Certificate constants: c0, eta0, the UB fixed-point refinement to
 * (c*, eta*), the margin C(c, c*, eta*), the proportion bound and c_single.
 */

#include "errors.hpp"
#include "gaussian_tv.hpp"
#include "mixture.hpp"
#include "specfun.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace sgmm {

struct StabilityInputs {
    ModelClassSpec spec;
    double epsilon = 0.0;
    int d = 1;
};

namespace detail {

inline void require_feasible(double pi_min, double epsilon, const char* who) {
    if (!(epsilon >= 0.0)) {
        throw DomainError(std::string(who) + ": epsilon must be >= 0");
    }
    if (!(pi_min > 2.0 * epsilon)) {
        std::ostringstream msg;
        msg << who << ": pi_min = " << pi_min << " must exceed 2 * epsilon = " << 2.0 * epsilon;
        throw InfeasibleEpsilon(msg.str());
    }
}

} // namespace detail

/// c0 = 2 Phi^{-1}(1 - (pi_min - 2 eps) / 2).
inline double solve_c0(double pi_min, double epsilon) {
    detail::require_feasible(pi_min, epsilon, "solve_c0");
    if (pi_min > 1.0) {
        throw DomainError("solve_c0: pi_min must be <= 1");
    }
    const double rho = pi_min - 2.0 * epsilon;
    if (rho >= 1.0) {
        return 0.0;
    }
    return -2.0 * normal_quantile(0.5 * rho);
}

/// L(eta) in the eta0 equation; decreasing in eta.
inline double eta0_lhs(double eta, double c0, const StabilityInputs& in) {
    const double pi_max = in.spec.pi_max;
    return 1.0 - (in.spec.pi_min - 2.0 * in.epsilon) / pi_max +
           2.0 * (1.0 - pi_max) / pi_max * normal_cdf(-0.5 * eta * c0);
}

/// L(eta0) - tv_same_center(eta0, d); zero at the solution.
inline double eta0_residual(double eta, const StabilityInputs& in) {
    const double c0 = solve_c0(in.spec.pi_min, in.epsilon);
    return eta0_lhs(eta, c0, in) - tv_same_center(eta, in.d);
}

namespace detail {

// Root of a decreasing-minus-increasing function on [lo, hi], expanding hi by doubling.
template <typename F>
double solve_decreasing(F&& f, double lo, double hi, const char* who) {
    double f_lo = f(lo);
    if (f_lo <= 0.0) {
        return lo;
    }
    double f_hi = f(hi);
    int doublings = 0;
    while (f_hi > 0.0) {
        if (++doublings > 1000 || std::isinf(hi)) {
            throw NoConvergence(std::string(who) + ": bracket expansion failed");
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi);
    }
    return find_root(f, RootBracket{lo, hi, f_lo, f_hi}, 0.0);
}

} // namespace detail

/// eta0 >= 1 solving L(eta) = tv_same_center(eta, d), searched from the bracket [lo, hi].
inline double solve_eta0(const StabilityInputs& in, double lo, double hi) {
    const double c0 = solve_c0(in.spec.pi_min, in.epsilon);
    if (in.d < 1) {
        throw DomainError("solve_eta0: d must be >= 1");
    }
    if (!(in.spec.pi_max > 0.0 && in.spec.pi_max <= 1.0)) {
        throw DomainError("solve_eta0: pi_max must lie in (0, 1]");
    }
    if (!(lo >= 1.0 && hi > lo)) {
        throw DomainError("solve_eta0: bracket must satisfy 1 <= lo < hi");
    }
    auto f = [&](double eta) { return eta0_lhs(eta, c0, in) - tv_same_center(eta, in.d); };
    return detail::solve_decreasing(f, lo, hi, "solve_eta0");
}

inline double solve_eta0(const StabilityInputs& in) { return solve_eta0(in, 1.0, 2.0); }

/// c0 * eta0, the smallest class separation for which the certificate applies.
inline double min_separation(const StabilityInputs& in) {
    return solve_c0(in.spec.pi_min, in.epsilon) * solve_eta0(in);
}

/// rho = 2 Phi(-(c + c/eta_b - c_b)/2), the per-pair overlap entering UB.
inline double ub_overlap(double c_b, double eta_b, const StabilityInputs& in) {
    const double c = in.spec.c;
    return 2.0 * normal_cdf(-0.5 * (c + c / eta_b - c_b));
}

/**
 * @brief UB(c_b, eta_b) = 2 eps / pi_min + (2 (1 - pi_min) / pi_min) Phi(-(c + c/eta_b - c_b)/2).
 *
 * Throws RefinementInapplicable when the overlap rho exceeds
 * (pi_min - 2 eps) / (1 - pi_min), or when UB is not below 1 - pi_min + 2 eps.
 */
inline double ub(double c_b, double eta_b, const StabilityInputs& in) {
    const double pi_min = in.spec.pi_min;
    detail::require_feasible(pi_min, in.epsilon, "ub");
    if (!(eta_b >= 1.0) || !(c_b >= 0.0)) {
        throw DomainError("ub: requires c_b >= 0 and eta_b >= 1");
    }
    const double rho = ub_overlap(c_b, eta_b, in);
    if (pi_min < 1.0 && rho > (pi_min - 2.0 * in.epsilon) / (1.0 - pi_min)) {
        std::ostringstream msg;
        msg << "ub: overlap " << rho << " exceeds (pi_min - 2 eps) / (1 - pi_min)";
        throw RefinementInapplicable(msg.str());
    }
    const double value = 2.0 * in.epsilon / pi_min + (1.0 - pi_min) / pi_min * rho;
    if (!(value < 1.0 - pi_min + 2.0 * in.epsilon)) {
        std::ostringstream msg;
        msg << "ub: UB = " << value << " is not below 1 - pi_min + 2 eps";
        throw RefinementInapplicable(msg.str());
    }
    return value;
}

/// c such that 1 - 2 Phi(-c/2) = tv.
inline double c_for_tv(double tv) {
    if (!(tv >= 0.0 && tv < 1.0)) {
        throw DomainError("c_for_tv: tv must lie in [0, 1)");
    }
    return -2.0 * normal_quantile(0.5 - 0.5 * tv);
}

struct RefinementStep {
    double c = 0.0;
    double eta = 1.0;
    double ub = 0.0; ///< UB(c, eta)
};

struct RefinementTrace {
    std::vector<RefinementStep> iterates;
    bool converged = false;
    double c0 = 0.0;
    double eta0 = 1.0;
    double c_star = 0.0;
    double eta_star = 1.0;
    double residual_c = 0.0;   ///< |c* - 2 Phi^{-1}(1/2 + UB(c*, eta*)/2)|
    double residual_eta = 0.0; ///< |eta* - eta0(1 - UB(c*, eta*))|
};

inline constexpr double kRefinementStepTolerance = 1e-10;
inline constexpr int kRefinementMaxIterations = 1000;

/**
 * @brief Iterates c_{t+1} = 2 Phi^{-1}(1/2 + UB_t / 2), eta_{t+1} = eta0(1 - UB_t).
 *
 * Starts from (c0, eta0). Only strictly decreasing iterates are recorded; the
 * iteration stops when both steps fall below 1e-10 or when a step no longer
 * decreases in floating point.
 */
inline RefinementTrace refine(const StabilityInputs& in) {
    RefinementTrace trace;
    trace.c0 = solve_c0(in.spec.pi_min, in.epsilon);
    trace.eta0 = solve_eta0(in);
    if (!(in.spec.c > trace.c0 * trace.eta0)) {
        std::ostringstream msg;
        msg << "refine: c = " << in.spec.c << " does not exceed c0 * eta0 = " << trace.c0 * trace.eta0;
        throw SeparationTooSmall(msg.str());
    }
    double c = trace.c0;
    double eta = trace.eta0;
    double u = ub(c, eta, in);
    trace.iterates.push_back({c, eta, u});
    for (int it = 0; it < kRefinementMaxIterations; ++it) {
        const double c_next = c_for_tv(u);
        const double eta_next = eta_for_tv(u, in.d);
        const bool small_step =
            std::fabs(c - c_next) < kRefinementStepTolerance && std::fabs(eta - eta_next) < kRefinementStepTolerance;
        if (!(c_next < c && eta_next < eta)) {
            trace.converged = small_step;
            if (!small_step) {
                throw NoConvergence("refine: iterates stopped decreasing before the step tolerance was met");
            }
            break;
        }
        c = c_next;
        eta = eta_next;
        u = ub(c, eta, in);
        trace.iterates.push_back({c, eta, u});
        if (small_step) {
            trace.converged = true;
            break;
        }
    }
    if (!trace.converged) {
        throw NoConvergence("refine: iteration cap reached");
    }
    trace.c_star = c;
    trace.eta_star = eta;
    trace.residual_c = std::fabs(c - c_for_tv(u));
    trace.residual_eta = std::fabs(eta - eta_for_tv(u, in.d));
    return trace;
}

/**
 * @brief Margin C(c, c*, eta*) with a = c*, e = eta*:
 * sqrt(c^2 / (2 e^2) + (c - a/2)^2 / (2 e) - a^2 (1 + e)^2 / (16 e^2)) - a/2.
 */
inline double margin_C(double c, double c_star, double eta_star) {
    if (!(eta_star >= 1.0) || !(c_star >= 0.0)) {
        throw DomainError("margin_C: requires c* >= 0 and eta* >= 1");
    }
    const double e2 = eta_star * eta_star;
    const double half = c - 0.5 * c_star;
    const double radicand = c * c / (2.0 * e2) + half * half / (2.0 * eta_star) -
                            c_star * c_star * (1.0 + eta_star) * (1.0 + eta_star) / (16.0 * e2);
    if (radicand < 0.0) {
        throw DomainError("margin_C: negative radicand (c too small for c*, eta*)");
    }
    return std::sqrt(radicand) - 0.5 * c_star;
}

/// 2 eps + (1 - pi_min + pi_max) Phi(-C(c, c*, eta*)).
inline double proportion_bound(const StabilityInputs& in, double c_star, double eta_star) {
    const double m = margin_C(in.spec.c, c_star, eta_star);
    return 2.0 * in.epsilon + (1.0 - in.spec.pi_min + in.spec.pi_max) * normal_cdf(-m);
}

/// Union-bound variant: 2 eps + K (1 - (K - 1) pi_min) Phi(-C). Diagnostic only.
inline double proportion_bound_union(const StabilityInputs& in, double c_star, double eta_star) {
    const double m = margin_C(in.spec.c, c_star, eta_star);
    const double k = in.spec.K;
    return 2.0 * in.epsilon + k * (1.0 - (k - 1.0) * in.spec.pi_min) * normal_cdf(-m);
}

struct SingleCoverBound {
    double c0_prime = 0.0;
    double eta0_prime = 1.0;
    double value = 0.0;    ///< c0' * eta0'
    double residual = 0.0; ///< defining equation at eta0'
    bool excludes_single = false; ///< c > value
};

/**
 * @brief Separation above which no single spherical Gaussian lies within 2 eps of the class.
 *
 * c0' = 2 Phi^{-1}(1 - (pi_min - eps)/4); eta0' solves
 * 1 - pi_min + eps + 2 Phi(-eta c0'/2) = tv_same_center(eta, d).
 */
inline SingleCoverBound c_single(double pi_min, double epsilon, int d, double c) {
    if (!(epsilon >= 0.0)) {
        throw DomainError("c_single: epsilon must be >= 0");
    }
    if (!(epsilon < pi_min)) {
        throw InfeasibleEpsilon("c_single: epsilon must be below pi_min");
    }
    if (!(pi_min <= 1.0) || d < 1) {
        throw DomainError("c_single: requires pi_min <= 1 and d >= 1");
    }
    SingleCoverBound r;
    r.c0_prime = -2.0 * normal_quantile(0.25 * (pi_min - epsilon));
    auto f = [&](double eta) {
        return 1.0 - pi_min + epsilon + 2.0 * normal_cdf(-0.5 * eta * r.c0_prime) - tv_same_center(eta, d);
    };
    r.eta0_prime = detail::solve_decreasing(f, 1.0, 2.0, "c_single");
    r.residual = f(r.eta0_prime);
    r.value = r.c0_prime * r.eta0_prime;
    r.excludes_single = c > r.value;
    return r;
}

} // namespace sgmm
