#pragma once

/**
 * @file gaussian_tv.hpp
 *
 * @brief Total variation between two spherical Gaussians and the inverse
 * thresholds C0(rho), eta0(rho).
 *
 * For sigma_1 < sigma_2 the set {p_1 >= p_2} is a ball, so TV is the
 * difference of two shifted-ball probabilities (noncentral chi-square CDFs).
 */

#include "errors.hpp"
#include "specfun.hpp"
#include "vector.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace sgmm {

/// N_d(mean, sigma^2 I_d).
struct SphericalGaussian {
    Vector mean;
    double sigma = 1.0;

    SphericalGaussian() = default;

    SphericalGaussian(Vector mean_, double sigma_) : mean(std::move(mean_)), sigma(sigma_) {
        if (mean.empty()) {
            throw DomainError("SphericalGaussian: dimension must be >= 1");
        }
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw DomainError("SphericalGaussian: sigma must be positive and finite");
        }
        for (double m : mean) {
            if (!std::isfinite(m)) {
                throw DomainError("SphericalGaussian: mean must be finite");
            }
        }
    }

    int dim() const { return static_cast<int>(mean.size()); }

    double log_density(std::span<const double> x) const {
        const double d = static_cast<double>(mean.size());
        return -0.5 * squared_distance(x, mean) / (sigma * sigma) - d * std::log(sigma) -
               0.5 * d * std::log(2.0 * std::numbers::pi);
    }

    friend bool operator==(const SphericalGaussian&, const SphericalGaussian&) = default;
};

/// Scale-free description of a pair of spherical Gaussians.
struct GaussianPairGeometry {
    double center_distance = 0.0;  ///< ||mu_1 - mu_2||
    double eta = 1.0;              ///< max(sigma_1/sigma_2, sigma_2/sigma_1)
    double c_over_max_sigma = 0.0; ///< ||mu_1 - mu_2|| / max(sigma_1, sigma_2)
    double c_over_sum_sigma = 0.0; ///< ||mu_1 - mu_2|| / (sigma_1 + sigma_2), the separation s_ij
};

inline GaussianPairGeometry pair_geometry(const SphericalGaussian& p1, const SphericalGaussian& p2) {
    if (p1.dim() != p2.dim()) {
        throw DimensionMismatch("pair_geometry: dimensions differ");
    }
    GaussianPairGeometry g;
    g.center_distance = distance(p1.mean, p2.mean);
    const double big = std::max(p1.sigma, p2.sigma);
    const double small = std::min(p1.sigma, p2.sigma);
    g.eta = big / small;
    g.c_over_max_sigma = g.center_distance / big;
    g.c_over_sum_sigma = g.center_distance / (p1.sigma + p2.sigma);
    return g;
}

/// Below this distance from 1 the sigma ratio is treated as exactly 1.
inline constexpr double kEtaUnitTolerance = 1e-9;

/**
 * @brief TV(N(0, I_d), N(0, eta^2 I_d)).
 *
 * F_d(2 eta^2 log eta / (eta^2 - 1)) - F_d(2 log eta / (eta^2 - 1)), with the
 * 0/0 limit at eta = 1 returned as 0.
 */
inline double tv_same_center(double eta, int d) {
    if (!(eta >= 1.0)) {
        throw DomainError("tv_same_center: eta must be >= 1");
    }
    if (d < 1) {
        throw DomainError("tv_same_center: d must be >= 1");
    }
    if (eta - 1.0 < kEtaUnitTolerance) {
        return 0.0;
    }
    if (std::isinf(eta)) {
        return 1.0;
    }
    const double em1 = eta - 1.0;
    const double lo = 2.0 * std::log1p(em1) / (em1 * (eta + 1.0));
    const double hi = eta * eta * lo;
    double tv;
    if (hi <= 1.0) {
        tv = gamma_cdf_fd(hi, d) - gamma_cdf_fd(lo, d);
    } else if (lo >= 1.0) {
        tv = gamma_sf_fd(lo, d) - gamma_sf_fd(hi, d);
    } else {
        tv = (1.0 - gamma_cdf_fd(lo, d)) - gamma_sf_fd(hi, d);
    }
    return std::clamp(tv, 0.0, 1.0);
}

/// Exact TV between two Gaussians with equal sigma at normalized distance C: 1 - 2 Phi(-C/2).
inline double tv_equal_sigma(double normalized_distance) {
    if (!(normalized_distance >= 0.0)) {
        throw DomainError("tv_equal_sigma: distance must be >= 0");
    }
    return std::erf(normalized_distance / (2.0 * std::numbers::sqrt2));
}

namespace detail {

/**
 * P(||Z - o||^2 <= R^2), Z ~ N_d(0, I), ||o|| = a, given B = R^2 - a^2 and
 * R^2 separately so that neither has to be formed by subtraction.
 *
 * Conditions on the radial part s = ||Z_perp|| ~ chi_{d-1}; the axial part is
 * a 1D normal interval whose upper end sqrt(R^2 - s^2) - a is rewritten as
 * (B - s^2) / (sqrt(R^2 - s^2) + a).
 */
inline double shifted_ball_probability(double a, double b, double r_sq, int d) {
    const double r = std::sqrt(r_sq);
    auto axial = [&](double s_sq) {
        const double root = std::sqrt(std::max(r_sq - s_sq, 0.0));
        const double upper = (b - s_sq) / (root + a);
        return normal_cdf(upper) - normal_cdf(-root - a);
    };
    if (d == 1) {
        return std::clamp(axial(0.0), 0.0, 1.0);
    }
    const double k = d - 1.0;
    const double log_norm = (1.0 - 0.5 * k) * std::numbers::ln2 - std::lgamma(0.5 * k);
    auto integrand = [&](double s) {
        if (s <= 0.0) {
            return k == 1.0 ? std::exp(log_norm) * axial(0.0) : 0.0;
        }
        const double chi_density = std::exp(log_norm + (k - 1.0) * std::log(s) - 0.5 * s * s);
        return chi_density * axial(s * s);
    };
    const double upper = std::min(r, std::sqrt(k) + 12.0);
    double error = 0.0;
    const double p =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 20, 1e-13, &error);
    return std::clamp(p, 0.0, 1.0);
}

inline constexpr double kPoissonSeriesMaxLambda = 1e8;

} // namespace detail

/**
 * @brief Exact total variation distance between two spherical Gaussians.
 */
inline double tv_exact(const SphericalGaussian& p1, const SphericalGaussian& p2) {
    if (p1.dim() != p2.dim()) {
        throw DimensionMismatch("tv_exact: dimensions differ");
    }
    const int d = p1.dim();
    const double delta = distance(p1.mean, p2.mean);
    const double small = std::min(p1.sigma, p2.sigma);
    const double big = std::max(p1.sigma, p2.sigma);
    const double eta = big / small;
    if (eta - 1.0 < kEtaUnitTolerance) {
        return tv_equal_sigma(delta / (0.5 * (p1.sigma + p2.sigma)));
    }
    if (delta == 0.0) {
        return tv_same_center(eta, d);
    }
    // Coordinates scaled by the smaller sigma; A = {p_small >= p_big} is a ball.
    const double r = delta / small;
    const double em1 = eta - 1.0;
    const double e2m1 = em1 * (eta + 1.0);
    const double log_eta = std::log1p(em1);
    // Squared ball radius in units of the larger / smaller sigma.
    const double radius_sq_big = (r * r + 2.0 * d * e2m1 * log_eta) / (e2m1 * e2m1);
    const double radius_sq_small = eta * eta * radius_sq_big;
    // Ball-center offsets from each mean, in the same units.
    const double offset_small = r / e2m1;
    const double offset_big = eta * r / e2m1;

    double mass_small;
    double mass_big;
    if (offset_big * offset_big <= detail::kPoissonSeriesMaxLambda) {
        mass_small = noncentral_chisq_cdf(radius_sq_small, d, offset_small * offset_small);
        mass_big = noncentral_chisq_cdf(radius_sq_big, d, offset_big * offset_big);
    } else {
        const double b_small = (r * r + 2.0 * d * eta * eta * log_eta) / e2m1;
        const double b_big = (2.0 * d * log_eta - r * r) / e2m1;
        mass_small = detail::shifted_ball_probability(offset_small, b_small, radius_sq_small, d);
        mass_big = detail::shifted_ball_probability(offset_big, b_big, radius_sq_big, d);
    }
    return std::clamp(mass_small - mass_big, 0.0, 1.0);
}

/// C0(rho) = 2 Phi^{-1}(1 - rho/2): equal-sigma Gaussians this far apart (in sigma units) have TV 1 - rho.
inline double threshold_c0_of_rho(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw DomainError("threshold_c0_of_rho: rho must lie in (0, 1)");
    }
    return -2.0 * normal_quantile(0.5 * rho);
}

/**
 * @brief Smallest eta >= 1 with tv_same_center(eta, d) = target.
 *
 * Bracket [1 + 1e-9, 2], doubling the upper end. Targets below the TV at the
 * lower end are resolved by linear interpolation from (1, 0).
 */
inline double eta_for_tv(double target, int d) {
    if (!(target >= 0.0 && target < 1.0)) {
        throw DomainError("eta_for_tv: target must lie in [0, 1)");
    }
    if (target == 0.0) {
        return 1.0;
    }
    const double lo = 1.0 + kEtaUnitTolerance;
    auto residual = [&](double eta) { return tv_same_center(eta, d) - target; };
    const double f_lo = residual(lo);
    if (f_lo >= 0.0) {
        return 1.0 + kEtaUnitTolerance * target / (f_lo + target);
    }
    double hi = 2.0;
    double f_hi = residual(hi);
    int doublings = 0;
    while (f_hi < 0.0) {
        if (++doublings > 1000 || std::isinf(hi)) {
            throw NoConvergence("eta_for_tv: bracket expansion failed");
        }
        hi *= 2.0;
        f_hi = residual(hi);
    }
    return find_root(residual, RootBracket{lo, hi, f_lo, f_hi}, 0.0);
}

/// eta0(rho): the sigma ratio at which same-center Gaussians have TV 1 - rho.
inline double threshold_eta0_of_rho(double rho, int d) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw DomainError("threshold_eta0_of_rho: rho must lie in (0, 1)");
    }
    return eta_for_tv(1.0 - rho, d);
}

/// Points where two 1D normal densities are equal; hi is +inf when sigmas are equal.
struct OverlapBoundaries {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

inline OverlapBoundaries overlap_boundaries_1d(const SphericalGaussian& p1, const SphericalGaussian& p2) {
    if (p1.dim() != 1 || p2.dim() != 1) {
        throw DimensionMismatch("overlap_boundaries_1d: both Gaussians must be one-dimensional");
    }
    const double m1 = p1.mean[0];
    const double m2 = p2.mean[0];
    const double v1 = p1.sigma * p1.sigma;
    const double v2 = p2.sigma * p2.sigma;
    if (p1.sigma == p2.sigma) {
        return {0.5 * (m1 + m2), std::numeric_limits<double>::infinity()};
    }
    // (x - m1)^2 / v1 - (x - m2)^2 / v2 + 2 log(s1 / s2) = 0  ->  a x^2 - 2 h x + c = 0
    const double a = 1.0 / v1 - 1.0 / v2;
    const double h = m1 / v1 - m2 / v2;
    const double c = m1 * m1 / v1 - m2 * m2 / v2 + 2.0 * std::log(p1.sigma / p2.sigma);
    const double diff = m1 - m2;
    const double disc = diff * diff / (v1 * v2) + 2.0 * a * std::log(p2.sigma / p1.sigma);
    const double s = std::sqrt(std::max(disc, 0.0));
    const double q = h + std::copysign(s, h);
    double x1;
    double x2;
    if (q == 0.0) {
        x1 = s / a;
        x2 = -s / a;
    } else {
        x1 = q / a;
        x2 = c / q;
    }
    return {std::min(x1, x2), std::max(x1, x2)};
}

} // namespace sgmm
