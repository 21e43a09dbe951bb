#pragma once

/**
 * @file certify.hpp
 *
 * @brief End-to-end stability certificate for a mixture, contamination
 * studies and the built-in example distributions.
 */

#include "constants.hpp"
#include "errors.hpp"
#include "gaussian_tv.hpp"
#include "mixture.hpp"
#include "montecarlo.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgmm {

namespace condition {
inline constexpr const char* a1 = "A1";
inline constexpr const char* a2 = "A2";
inline constexpr const char* a3 = "A3";
inline constexpr const char* epsilon = "pi_min>2eps";
inline constexpr const char* k_bound = "K<=1/pi_min";
inline constexpr const char* pi_max_bound = "pi_max<=1-(K-1)pi_min";
inline constexpr const char* separation = "separation";
inline constexpr const char* refinement = "refinement";
} // namespace condition

struct ComponentBound {
    double mean_bound = 0.0;        ///< c* eta* sigma_i
    double sigma_ratio_bound = 1.0; ///< eta*
    double proportion_bound = 0.0;
};

struct StabilityCertificate {
    bool applicable = false;
    std::vector<std::string> failed_conditions;
    MembershipReport membership;
    ModelClassSpec spec;
    double epsilon = 0.0;
    int dim = 0;

    double c0 = std::numeric_limits<double>::quiet_NaN();
    double eta0 = std::numeric_limits<double>::quiet_NaN();
    double c_star = std::numeric_limits<double>::quiet_NaN();
    double eta_star = std::numeric_limits<double>::quiet_NaN();
    double margin = std::numeric_limits<double>::quiet_NaN();
    double proportion_bound = std::numeric_limits<double>::quiet_NaN();
    double proportion_bound_union = std::numeric_limits<double>::quiet_NaN();
    /// 1 - 2 Phi(-c*/2), the implied per-component TV bound.
    double component_tv_bound = std::numeric_limits<double>::quiet_NaN();
    std::vector<ComponentBound> per_component;
    bool vacuous = false;
    std::size_t trace_length = 0;
    bool converged = false;
    /// Set when a stage threw; empty otherwise.
    std::string note;

    double min_separation_required() const { return c0 * eta0; }
    double max_mean_bound() const {
        double m = std::numeric_limits<double>::quiet_NaN();
        for (const auto& b : per_component) {
            m = std::isnan(m) ? b.mean_bound : std::max(m, b.mean_bound);
        }
        return m;
    }
    /// Applicable with a TV bound below 1/2.
    bool informative() const { return applicable && !vacuous; }
};

inline constexpr double kVacuityThreshold = 0.5;
inline constexpr double kClassTolerance = 1e-12;

/**
 * @brief Decides whether the stability theorem applies to P in the given class
 * at level epsilon and, if so, fills in the bounds.
 *
 * Conditions are checked in order: A1 (K >= 2 and P has K components), A2,
 * A3, pi_min > 2 eps, K <= 1/pi_min, pi_max <= 1 - (K-1) pi_min, c > c0 eta0.
 */
inline StabilityCertificate certify(const MixtureModel& p, const ModelClassSpec& spec, double epsilon) {
    StabilityCertificate cert;
    cert.spec = spec;
    cert.epsilon = epsilon;
    cert.dim = p.dim();
    auto fail = [&](const char* id) { cert.failed_conditions.emplace_back(id); };

    cert.membership = check_class_membership(p, spec);
    if (!cert.membership.a1 || static_cast<int>(p.size()) != spec.K) {
        fail(condition::a1);
    }
    if (!cert.membership.a2) {
        fail(condition::a2);
    }
    if (cert.membership.a3 != SeparationStatus::pass) {
        fail(condition::a3);
    }
    const bool feasible = epsilon >= 0.0 && spec.pi_min > 2.0 * epsilon;
    if (!feasible) {
        fail(condition::epsilon);
    }
    if (spec.K * spec.pi_min > 1.0 + kClassTolerance) {
        fail(condition::k_bound);
    }
    if (spec.pi_max > 1.0 - (spec.K - 1) * spec.pi_min + kClassTolerance) {
        fail(condition::pi_max_bound);
    }

    const StabilityInputs in{spec, epsilon, p.dim()};
    if (feasible) {
        try {
            cert.c0 = solve_c0(spec.pi_min, epsilon);
            cert.eta0 = solve_eta0(in);
            if (!(spec.c > cert.c0 * cert.eta0)) {
                fail(condition::separation);
            }
        } catch (const Error& e) {
            cert.note = e.what();
            fail(condition::separation);
        }
    }
    if (!cert.failed_conditions.empty()) {
        return cert;
    }

    try {
        const RefinementTrace trace = refine(in);
        cert.c_star = trace.c_star;
        cert.eta_star = trace.eta_star;
        cert.trace_length = trace.iterates.size();
        cert.converged = trace.converged;
        cert.margin = margin_C(spec.c, cert.c_star, cert.eta_star);
        cert.proportion_bound = proportion_bound(in, cert.c_star, cert.eta_star);
        cert.proportion_bound_union = proportion_bound_union(in, cert.c_star, cert.eta_star);
    } catch (const Error& e) {
        cert.note = e.what();
        fail(condition::refinement);
        return cert;
    }
    cert.applicable = true;
    cert.component_tv_bound = tv_equal_sigma(cert.c_star);
    cert.vacuous = cert.component_tv_bound >= kVacuityThreshold;
    for (const auto& g : p.components()) {
        cert.per_component.push_back({cert.c_star * cert.eta_star * g.sigma, cert.eta_star, cert.proportion_bound});
    }
    return cert;
}

/// How the class spec is chosen for a contamination base mixture. Unset fields use defaults.
struct ClassSpecRule {
    std::optional<double> pi_min; ///< default: pi_min_fraction * smallest weight
    std::optional<double> pi_max; ///< default: 1 - (K - 1) pi_min
    std::optional<double> c;      ///< default ("auto"): realized min s_ij - 1e-9
    double pi_min_fraction = 0.9;

    ModelClassSpec resolve(const MixtureModel& base) const {
        ModelClassSpec s;
        s.K = static_cast<int>(base.size());
        s.pi_min = pi_min.value_or(pi_min_fraction * base.min_weight());
        s.pi_max = pi_max.value_or(1.0 - (s.K - 1) * s.pi_min);
        if (c) {
            s.c = *c;
        } else {
            s.c = check_class_membership(base, s).min_separation - 1e-9;
        }
        return s;
    }
};

/// (1 - lambda) P0 + lambda Q, with P0 and Q rebuilt for every sweep value.
struct ContaminationScenario {
    std::string name;
    std::string sweep_name = "sweep";
    double lambda = 0.0;
    std::vector<double> sweep;
    std::function<std::pair<MixtureModel, MixtureModel>(double)> build;
};

struct ContaminationRow {
    double sweep_value = 0.0;
    double lambda = 0.0;
    ModelClassSpec spec;
    TvEstimate epsilon_hat;
    std::vector<TvEstimate> componentwise_tv;
    StabilityCertificate cert;
    /// Certificate at epsilon_hat + 2 std_error.
    StabilityCertificate conservative;
    double max_mean_bound = std::numeric_limits<double>::quiet_NaN();
};

/**
 * @brief Per-component TV between P0 and the contaminated mixture.
 *
 * Each contaminant component is absorbed into the base component with the
 * nearest mean; component k of the contaminated model is then the normalized
 * sum of (1 - lambda) pi_k P0_k and the contaminant mass assigned to it.
 */
inline std::vector<TvEstimate> contamination_componentwise_tv(const MixtureModel& base, const MixtureModel& contaminant,
                                                              double lambda, std::int64_t n, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> assigned(base.size());
    for (std::size_t j = 0; j < contaminant.size(); ++j) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < base.size(); ++k) {
            const double dd = squared_distance(contaminant.component(j).mean, base.component(k).mean);
            if (dd < best_d) {
                best_d = dd;
                best = k;
            }
        }
        assigned[best].push_back(j);
    }
    std::vector<TvEstimate> out;
    for (std::size_t k = 0; k < base.size(); ++k) {
        const MixtureModel own = MixtureModel::single(base.component(k));
        if (lambda == 0.0 || assigned[k].empty()) {
            TvEstimate zero;
            zero.n_samples = n;
            zero.seed = seed;
            out.push_back(zero);
            continue;
        }
        std::vector<SphericalGaussian> comps{base.component(k)};
        std::vector<double> w{(1.0 - lambda) * base.weight(k)};
        for (std::size_t j : assigned[k]) {
            comps.push_back(contaminant.component(j));
            w.push_back(lambda * contaminant.weight(j));
        }
        double total = 0.0;
        for (double x : w) {
            total += x;
        }
        for (double& x : w) {
            x /= total;
        }
        out.push_back(mc_tv(own, MixtureModel(std::move(comps), std::move(w)), n, seed));
    }
    return out;
}

/// One row per sweep value; row i uses seed + i.
inline std::vector<ContaminationRow> run_contamination(const ContaminationScenario& scenario, const ClassSpecRule& rule,
                                                       std::int64_t n, std::uint64_t seed) {
    if (!(scenario.lambda >= 0.0 && scenario.lambda <= 1.0)) {
        throw DomainError("run_contamination: lambda must lie in [0, 1]");
    }
    if (!scenario.build) {
        throw DomainError("run_contamination: scenario has no builder");
    }
    std::vector<ContaminationRow> rows;
    for (std::size_t i = 0; i < scenario.sweep.size(); ++i) {
        const std::uint64_t row_seed = seed + i;
        ContaminationRow row;
        row.sweep_value = scenario.sweep[i];
        row.lambda = scenario.lambda;
        const auto [base, contaminant] = scenario.build(row.sweep_value);
        const MixtureModel perturbed = MixtureModel::blend(base, contaminant, scenario.lambda);
        row.spec = rule.resolve(base);
        row.epsilon_hat = mc_tv(base, perturbed, n, row_seed);
        row.componentwise_tv = contamination_componentwise_tv(base, contaminant, scenario.lambda, n, row_seed);
        row.cert = certify(base, row.spec, row.epsilon_hat.value);
        row.conservative = certify(base, row.spec, row.epsilon_hat.value + 2.0 * row.epsilon_hat.std_error);
        if (row.cert.informative()) {
            row.max_mean_bound = row.cert.max_mean_bound();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Parameters of the built-in examples; each example reads only the fields it needs.
struct ExampleParams {
    double sigma = 0.5; ///< example1: common sigma
    int K = 2;          ///< example2: number of components (also the dimension)
    double s = 5.0;     ///< example2: mean scale, mu_k = s e_k
};

inline const std::vector<std::string>& builtin_example_ids() {
    static const std::vector<std::string> ids{"example1", "example2-noise", "example2-outlier", "fig-example1-stable",
                                              "fig-example1-unstable"};
    return ids;
}

/**
 * @brief Returns (P0, Q) for the contamination examples and (P, P') for the
 * one-dimensional stable and unstable pairs.
 */
inline std::pair<MixtureModel, MixtureModel> builtin_example(const std::string& id, const ExampleParams& params = {}) {
    auto g1 = [](double mean, double sigma) { return SphericalGaussian({mean}, sigma); };
    if (id == "example1") {
        const double sigma = params.sigma;
        const double r3 = std::sqrt(3.0);
        MixtureModel base({SphericalGaussian({-1.0, -2.0 * r3 / 3.0}, sigma), SphericalGaussian({1.0, -2.0 * r3 / 3.0}, sigma)},
                          {0.5, 0.5});
        MixtureModel q = MixtureModel::single(SphericalGaussian({0.0, 4.0 * r3 / 3.0}, sigma));
        return {std::move(base), std::move(q)};
    }
    if (id == "example2-noise" || id == "example2-outlier") {
        const int k = params.K;
        if (k < 1) {
            throw DomainError("builtin_example: K must be >= 1");
        }
        std::vector<SphericalGaussian> comps;
        Vector center(static_cast<std::size_t>(k), params.s / k);
        for (int i = 0; i < k; ++i) {
            Vector mu(static_cast<std::size_t>(k), 0.0);
            mu[static_cast<std::size_t>(i)] = params.s;
            comps.emplace_back(std::move(mu), 1.0);
        }
        MixtureModel base(std::move(comps), std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
        if (id == "example2-noise") {
            return {std::move(base), MixtureModel::single(SphericalGaussian(center, 10.0))};
        }
        for (double& x : center) {
            x *= k;
        }
        return {std::move(base), MixtureModel::single(SphericalGaussian(center, 0.1))};
    }
    if (id == "fig-example1-stable") {
        MixtureModel p({g1(-3.0, 1.0), g1(3.0, 1.0)}, {0.5, 0.5});
        MixtureModel q({g1(-3.0, 1.0), g1(3.0, 1.0), g1(0.0, 1.0)}, {0.4995, 0.4995, 0.001});
        return {std::move(p), std::move(q)};
    }
    if (id == "fig-example1-unstable") {
        const double sigma = 1.5;
        MixtureModel p({g1(-3.0, sigma), g1(-1.0, sigma), g1(1.0, sigma), g1(3.0, sigma)},
                       {0.0625, 0.4375, 0.4375, 0.0625});
        MixtureModel q({g1(-4.0, sigma), g1(-2.0, sigma), g1(0.0, sigma), g1(2.0, sigma), g1(4.0, sigma)},
                       {0.0078125, 0.21875, 0.546875, 0.21875, 0.0078125});
        return {std::move(p), std::move(q)};
    }
    throw UnknownExample("unknown example id: " + id);
}

/// Default sweep for a contamination example: sigma for example1, s for example2.
inline std::vector<double> default_sweep(const std::string& id) {
    if (id == "example1") {
        return {0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
    }
    if (id == "example2-noise" || id == "example2-outlier") {
        return {2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0};
    }
    throw UnknownExample("no contamination sweep for example id: " + id);
}

inline ContaminationScenario example_scenario(const std::string& id, double lambda, std::vector<double> sweep,
                                              ExampleParams params = {}) {
    if (id != "example1" && id != "example2-noise" && id != "example2-outlier") {
        throw UnknownExample("not a contamination example: " + id);
    }
    ContaminationScenario sc;
    sc.name = id;
    sc.sweep_name = id == "example1" ? "sigma" : "s";
    sc.lambda = lambda;
    sc.sweep = sweep.empty() ? default_sweep(id) : std::move(sweep);
    sc.build = [id, params](double v) {
        ExampleParams p = params;
        if (id == "example1") {
            p.sigma = v;
        } else {
            p.s = v;
        }
        return builtin_example(id, p);
    };
    return sc;
}

/// Fixed P0 and Q; the sweep values only label rows.
inline ContaminationScenario fixed_scenario(MixtureModel base, MixtureModel contaminant, double lambda,
                                            std::vector<double> sweep = {0.0}) {
    ContaminationScenario sc;
    sc.name = "custom";
    sc.lambda = lambda;
    sc.sweep = std::move(sweep);
    sc.build = [b = std::move(base), q = std::move(contaminant)](double) { return std::make_pair(b, q); };
    return sc;
}

} // namespace sgmm
