#pragma once

/**
 * @file report.hpp
 *
 * @brief JSON and CSV serialization of certificates, estimates and sweep rows.
 *
 * CSV floats use 12 significant digits; JSON keeps full double precision.
 */

#include "certify.hpp"
#include "montecarlo.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace sgmm {

/// 12 significant digits; NaN becomes an empty field.
inline std::string fmt12(double x) {
    if (std::isnan(x)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace detail {

inline nlohmann::json number_or_null(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return nullptr;
}

} // namespace detail

inline nlohmann::json to_json(const TvEstimate& e) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

inline nlohmann::json to_json(const StabilityCertificate& c) {
    using detail::number_or_null;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& b : c.per_component) {
        per.push_back({{"mean_bound", b.mean_bound},
                       {"sigma_ratio_bound", b.sigma_ratio_bound},
                       {"proportion_bound", b.proportion_bound}});
    }
    return {
        {"applicable", c.applicable},
        {"failed_conditions", c.failed_conditions},
        {"K", c.spec.K},
        {"pi_min", c.spec.pi_min},
        {"pi_max", c.spec.pi_max},
        {"c", c.spec.c},
        {"epsilon", c.epsilon},
        {"dim", c.dim},
        {"A1", c.membership.a1},
        {"A2", c.membership.a2},
        {"A3", to_string(c.membership.a3)},
        {"min_separation_realized", number_or_null(c.membership.min_separation)},
        {"min_separation_pair", {c.membership.min_pair.first, c.membership.min_pair.second}},
        {"c0", number_or_null(c.c0)},
        {"eta0", number_or_null(c.eta0)},
        {"c0_eta0", number_or_null(c.c0 * c.eta0)},
        {"c_star", number_or_null(c.c_star)},
        {"eta_star", number_or_null(c.eta_star)},
        {"margin", number_or_null(c.margin)},
        {"proportion_bound", number_or_null(c.proportion_bound)},
        {"proportion_bound_union", number_or_null(c.proportion_bound_union)},
        {"component_tv_bound", number_or_null(c.component_tv_bound)},
        {"vacuous", c.vacuous},
        {"per_component", per},
        {"trace_length", c.trace_length},
        {"converged", c.converged},
        {"note", c.note},
    };
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

inline const char* contamination_csv_header() {
    return "sweep_value,lambda,pi_min,pi_max,c,epsilon_hat,epsilon_se,componentwise_tv,applicable,vacuous,"
           "failed_conditions,c_star,eta_star,component_tv_bound,max_mean_bound,proportion_bound,"
           "conservative_epsilon,conservative_applicable,conservative_vacuous,conservative_max_mean_bound";
}

inline void write_contamination_csv(std::ostream& out, const std::vector<ContaminationRow>& rows, bool header = true) {
    if (header) {
        out << contamination_csv_header() << '\n';
    }
    for (const auto& r : rows) {
        std::vector<std::string> cw;
        for (const auto& e : r.componentwise_tv) {
            cw.push_back(fmt12(e.value));
        }
        const auto& c = r.cert;
        const auto& k = r.conservative;
        out << fmt12(r.sweep_value) << ',' << fmt12(r.lambda) << ',' << fmt12(r.spec.pi_min) << ','
            << fmt12(r.spec.pi_max) << ',' << fmt12(r.spec.c) << ',' << fmt12(r.epsilon_hat.value) << ','
            << fmt12(r.epsilon_hat.std_error) << ',' << join(cw, ';') << ',' << (c.applicable ? 1 : 0) << ','
            << (c.vacuous ? 1 : 0) << ',' << join(c.failed_conditions, ';') << ',' << fmt12(c.c_star) << ','
            << fmt12(c.eta_star) << ',' << fmt12(c.component_tv_bound) << ',' << fmt12(r.max_mean_bound) << ','
            << fmt12(c.proportion_bound) << ',' << fmt12(k.epsilon) << ',' << (k.applicable ? 1 : 0) << ','
            << (k.vacuous ? 1 : 0) << ',' << fmt12(k.informative() ? k.max_mean_bound() : NAN) << '\n';
    }
}

} // namespace sgmm
