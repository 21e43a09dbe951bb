#pragma once

/**
 * @file mixture.hpp
 *
 * @brief Mixture model, model-class membership, pairwise separations and the
 * parameter divergence d_param.
 */

#include "errors.hpp"
#include "gaussian_tv.hpp"
#include "vector.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sgmm {

inline constexpr double kWeightSumTolerance = 1e-12;
inline constexpr double kWeightRenormalizeTolerance = 1e-9;

/// sum_k pi_k N_d(mu_k, sigma_k^2 I_d)
class MixtureModel {
public:
    MixtureModel() = default;

    /// Weights within 1e-9 of summing to one are renormalized; anything else is rejected.
    MixtureModel(std::vector<SphericalGaussian> components, std::vector<double> weights)
        : components_(std::move(components)), weights_(std::move(weights)) {
        if (components_.empty()) {
            throw DomainError("MixtureModel: at least one component required");
        }
        if (components_.size() != weights_.size()) {
            throw SizeMismatch("MixtureModel: number of weights differs from number of components");
        }
        dim_ = components_.front().dim();
        for (const auto& c : components_) {
            if (c.dim() != dim_) {
                throw DimensionMismatch("MixtureModel: components have different dimensions");
            }
        }
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw DomainError("MixtureModel: weights must be finite and nonnegative");
            }
            total += w;
        }
        if (std::fabs(total - 1.0) > kWeightRenormalizeTolerance) {
            std::ostringstream msg;
            msg << "MixtureModel: weights sum to " << total << ", not 1";
            throw DomainError(msg.str());
        }
        if (std::fabs(total - 1.0) > kWeightSumTolerance) {
            for (double& w : weights_) {
                w /= total;
            }
        }
    }

    static MixtureModel single(SphericalGaussian g) { return MixtureModel({std::move(g)}, {1.0}); }

    std::size_t size() const { return components_.size(); }
    int dim() const { return dim_; }
    const std::vector<SphericalGaussian>& components() const { return components_; }
    const std::vector<double>& weights() const { return weights_; }
    const SphericalGaussian& component(std::size_t k) const { return components_.at(k); }
    double weight(std::size_t k) const { return weights_.at(k); }

    double min_weight() const { return *std::min_element(weights_.begin(), weights_.end()); }
    double max_weight() const { return *std::max_element(weights_.begin(), weights_.end()); }

    /// log p(x), combined with a streaming log-sum-exp.
    double log_density(std::span<const double> x) const {
        double best = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (std::size_t k = 0; k < components_.size(); ++k) {
            if (weights_[k] <= 0.0) {
                continue;
            }
            const double t = std::log(weights_[k]) + components_[k].log_density(x);
            if (t <= best) {
                sum += std::exp(t - best);
            } else {
                sum = (std::isinf(best) ? 0.0 : sum * std::exp(best - t)) + 1.0;
                best = t;
            }
        }
        if (std::isinf(best)) {
            return best;
        }
        return best + std::log(sum);
    }

    /// (1 - lambda) * a + lambda * b, components concatenated; zero-weight parts are dropped.
    static MixtureModel blend(const MixtureModel& a, const MixtureModel& b, double lambda) {
        if (!(lambda >= 0.0 && lambda <= 1.0)) {
            throw DomainError("MixtureModel::blend: lambda must lie in [0, 1]");
        }
        if (a.dim() != b.dim()) {
            throw DimensionMismatch("MixtureModel::blend: dimensions differ");
        }
        std::vector<SphericalGaussian> comps;
        std::vector<double> w;
        auto append = [&](const MixtureModel& m, double scale) {
            if (scale == 0.0) {
                return;
            }
            for (std::size_t k = 0; k < m.size(); ++k) {
                comps.push_back(m.component(k));
                w.push_back(scale * m.weight(k));
            }
        };
        append(a, 1.0 - lambda);
        append(b, lambda);
        return MixtureModel(std::move(comps), std::move(w));
    }

    friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

private:
    std::vector<SphericalGaussian> components_;
    std::vector<double> weights_;
    int dim_ = 0;
};

/// M(K, pi_min, pi_max, c).
struct ModelClassSpec {
    int K = 2;
    double pi_min = 0.5;
    double pi_max = 0.5;
    double c = 0.0;

    /// pi_max = 1 - (K - 1) pi_min.
    static ModelClassSpec with_default_pi_max(int K, double pi_min, double c) {
        return ModelClassSpec{K, pi_min, 1.0 - (K - 1) * pi_min, c};
    }
};

inline double separation(const SphericalGaussian& a, const SphericalGaussian& b) {
    return distance(a.mean, b.mean) / (a.sigma + b.sigma);
}

/// s_ij = ||mu_i - mu_j|| / (sigma_i + sigma_j), zero diagonal.
inline std::vector<std::vector<double>> separation_matrix(const MixtureModel& p) {
    const std::size_t k = p.size();
    std::vector<std::vector<double>> s(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            s[i][j] = s[j][i] = separation(p.component(i), p.component(j));
        }
    }
    return s;
}

enum class SeparationStatus { pass, fail_at_equality, fail };

inline const char* to_string(SeparationStatus s) {
    switch (s) {
    case SeparationStatus::pass:
        return "pass";
    case SeparationStatus::fail_at_equality:
        return "fail-at-equality";
    case SeparationStatus::fail:
        return "fail";
    }
    return "?";
}

struct MembershipReport {
    bool a1 = false; ///< K >= 2
    bool a2 = false; ///< pi_min <= pi_k <= pi_max
    std::vector<std::size_t> a2_violations;
    SeparationStatus a3 = SeparationStatus::fail;
    double min_separation = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> min_pair{0, 0};

    bool passes() const { return a1 && a2 && a3 == SeparationStatus::pass; }
};

/// Relative tolerance under which min s_ij and c are reported as equal.
inline constexpr double kSeparationEqualityTolerance = 1e-12;

inline MembershipReport check_class_membership(const MixtureModel& p, const ModelClassSpec& spec) {
    MembershipReport r;
    r.a1 = p.size() >= 2;
    r.a2 = true;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double w = p.weight(k);
        if (w < spec.pi_min || w > spec.pi_max) {
            r.a2 = false;
            r.a2_violations.push_back(k);
        }
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double s = separation(p.component(i), p.component(j));
            if (s < r.min_separation) {
                r.min_separation = s;
                r.min_pair = {i, j};
            }
        }
    }
    if (p.size() < 2) {
        r.a3 = SeparationStatus::pass;
    } else if (std::fabs(r.min_separation - spec.c) <= kSeparationEqualityTolerance * std::max(1.0, spec.c)) {
        r.a3 = SeparationStatus::fail_at_equality;
    } else if (r.min_separation > spec.c) {
        r.a3 = SeparationStatus::pass;
    } else {
        r.a3 = SeparationStatus::fail;
    }
    return r;
}

/// The three parts of one matched-pair d_param term.
struct DparamTerm {
    double proportion = 0.0; ///< |pi - pi'| / min(pi, pi')
    double mean = 0.0;       ///< ||mu - mu'|| / max(sigma, sigma')
    double variance = 0.0;   ///< |sigma^2 - sigma'^2| / min(sigma^2, sigma'^2)
    double total() const { return proportion + mean + variance; }
};

inline DparamTerm dparam_term(double pi_a, const SphericalGaussian& a, double pi_b, const SphericalGaussian& b) {
    DparamTerm t;
    const double pi_lo = std::min(pi_a, pi_b);
    if (pi_a != pi_b) {
        t.proportion = pi_lo > 0.0 ? std::fabs(pi_a - pi_b) / pi_lo : std::numeric_limits<double>::infinity();
    }
    t.mean = distance(a.mean, b.mean) / std::max(a.sigma, b.sigma);
    const double va = a.sigma * a.sigma;
    const double vb = b.sigma * b.sigma;
    t.variance = std::fabs(va - vb) / std::min(va, vb);
    return t;
}

struct MatchingResult {
    /// Pairs (i, perm(i)) in increasing i.
    std::vector<std::pair<std::size_t, std::size_t>> permutation;
    std::vector<double> per_pair_dparam;
    std::vector<DparamTerm> per_pair_terms;
    double dparam = 0.0;
};

inline constexpr std::size_t kMaxExhaustiveComponents = 10;

/// min over permutations of max over k of the d_param term; exhaustive over K!.
inline MatchingResult dparam(const MixtureModel& p, const MixtureModel& q) {
    if (p.size() != q.size()) {
        throw SizeMismatch("dparam: mixtures have different numbers of components");
    }
    if (p.dim() != q.dim()) {
        throw DimensionMismatch("dparam: mixtures have different dimensions");
    }
    const std::size_t k = p.size();
    if (k > kMaxExhaustiveComponents) {
        throw TooManyComponents("dparam: exhaustive matching is limited to K <= 10");
    }
    std::vector<std::vector<double>> cost(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            cost[i][j] = dparam_term(p.weight(i), p.component(i), q.weight(j), q.component(j)).total();
        }
    }
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < k && worst < best; ++i) {
            worst = std::max(worst, cost[i][perm[i]]);
        }
        if (worst < best) {
            best = worst;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    MatchingResult r;
    r.dparam = best;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = best_perm[i];
        r.permutation.emplace_back(i, j);
        r.per_pair_terms.push_back(dparam_term(p.weight(i), p.component(i), q.weight(j), q.component(j)));
        r.per_pair_dparam.push_back(cost[i][j]);
    }
    return r;
}

// JSON: {"dim": int, "components": [{"mean": [...], "sigma": f, "weight": f}, ...]}

inline nlohmann::json to_json(const MixtureModel& m) {
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t k = 0; k < m.size(); ++k) {
        comps.push_back({{"mean", m.component(k).mean}, {"sigma", m.component(k).sigma}, {"weight", m.weight(k)}});
    }
    return {{"dim", m.dim()}, {"components", comps}};
}

inline MixtureModel mixture_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || !j.contains("components") || !j.at("components").is_array()) {
            throw ParseError("mixture JSON: expected an object with a \"components\" array");
        }
        std::vector<SphericalGaussian> comps;
        std::vector<double> weights;
        for (const auto& c : j.at("components")) {
            comps.emplace_back(c.at("mean").get<std::vector<double>>(), c.at("sigma").get<double>());
            weights.push_back(c.at("weight").get<double>());
        }
        MixtureModel m(std::move(comps), std::move(weights));
        if (j.contains("dim") && j.at("dim").get<int>() != m.dim()) {
            throw DimensionMismatch("mixture JSON: \"dim\" disagrees with the component means");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mixture JSON: ") + e.what());
    }
}

inline MixtureModel parse_mixture(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mixture JSON: ") + e.what());
    }
    return mixture_from_json(j);
}

inline MixtureModel load_mixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_mixture(buf.str());
}

} // namespace sgmm
