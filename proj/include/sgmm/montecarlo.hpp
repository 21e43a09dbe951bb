#pragma once

/**
 * @file montecarlo.hpp
 *
 * @brief Seeded sampling from mixtures and Monte Carlo total variation.
 *
 * Randomness is counter based: sample i draws from a SplitMix64 stream whose
 * state is derived from (seed, i) alone, so results do not depend on the
 * order in which samples are generated.
 */

#include "errors.hpp"
#include "mixture.hpp"
#include "vector.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

namespace sgmm {

struct TvEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// SplitMix64 with a Box-Muller normal cache.
class CounterRng {
public:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    CounterRng(std::uint64_t seed, std::uint64_t index)
        : state_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^ (index * 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform on (0, 1].
    double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {

inline std::size_t pick_component(const MixtureModel& p, double u) {
    double acc = 0.0;
    const std::size_t k = p.size();
    for (std::size_t i = 0; i + 1 < k; ++i) {
        acc += p.weight(i);
        if (u <= acc) {
            return i;
        }
    }
    return k - 1;
}

inline void draw(const MixtureModel& p, CounterRng& rng, Vector& out) {
    const SphericalGaussian& g = p.component(pick_component(p, rng.uniform()));
    out.resize(g.mean.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = g.mean[j] + g.sigma * rng.normal();
    }
}

// Fixed order so that the estimator is exactly symmetric in its arguments.
inline bool canonical_less(const MixtureModel& a, const MixtureModel& b) {
    auto key = [](const MixtureModel& m) {
        std::vector<double> flat;
        for (std::size_t k = 0; k < m.size(); ++k) {
            flat.push_back(m.weight(k));
            flat.push_back(m.component(k).sigma);
            flat.insert(flat.end(), m.component(k).mean.begin(), m.component(k).mean.end());
        }
        return std::make_tuple(m.size(), flat);
    };
    return key(a) < key(b);
}

} // namespace detail

/// n i.i.d. draws: categorical on the weights, then the chosen spherical normal.
inline std::vector<Vector> sample(const MixtureModel& p, std::int64_t n, std::uint64_t seed) {
    if (n < 1) {
        throw DomainError("sample: n must be >= 1");
    }
    std::vector<Vector> out(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        detail::draw(p, rng, out[static_cast<std::size_t>(i)]);
    }
    return out;
}

/**
 * @brief TV(P, Q) as E_{x ~ M}[ |p - q| / (p + q) ] with M = (P + Q) / 2.
 *
 * The integrand is |tanh((log p - log q) / 2)|, bounded by 1.
 */
inline TvEstimate mc_tv(const MixtureModel& p_in, const MixtureModel& q_in, std::int64_t n, std::uint64_t seed) {
    if (p_in.dim() != q_in.dim()) {
        throw DimensionMismatch("mc_tv: dimensions differ");
    }
    if (n < 1) {
        throw DomainError("mc_tv: n must be >= 1");
    }
    const bool swap = detail::canonical_less(q_in, p_in);
    const MixtureModel& p = swap ? q_in : p_in;
    const MixtureModel& q = swap ? p_in : q_in;

    TvEstimate est;
    est.n_samples = n;
    est.seed = seed;
    if (p == q) {
        return est;
    }
    constexpr std::int64_t kChunk = 4096;
    double sum = 0.0;
    double sum_sq = 0.0;
    Vector x;
    for (std::int64_t start = 0; start < n; start += kChunk) {
        const std::int64_t stop = std::min(n, start + kChunk);
        double chunk_sum = 0.0;
        double chunk_sq = 0.0;
        for (std::int64_t i = start; i < stop; ++i) {
            CounterRng rng(seed, static_cast<std::uint64_t>(i));
            detail::draw(rng.uniform() <= 0.5 ? p : q, rng, x);
            const double lp = p.log_density(x);
            const double lq = q.log_density(x);
            double v;
            if (std::isinf(lp) && std::isinf(lq)) {
                v = 0.0;
            } else {
                v = std::fabs(std::tanh(0.5 * (lp - lq)));
            }
            chunk_sum += v;
            chunk_sq += v * v;
        }
        sum += chunk_sum;
        sum_sq += chunk_sq;
    }
    const double nd = static_cast<double>(n);
    const double mean = sum / nd;
    est.value = std::clamp(mean, 0.0, 1.0);
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
        est.std_error = std::sqrt(var / nd);
    }
    return est;
}

/// mc_tv between matched component distributions (P_i, Q_perm(i)), same seed for every pair.
inline std::vector<TvEstimate> componentwise_tv(const MixtureModel& p, const MixtureModel& q,
                                                std::span<const std::size_t> perm, std::int64_t n,
                                                std::uint64_t seed) {
    if (p.size() != q.size() || perm.size() != p.size()) {
        throw SizeMismatch("componentwise_tv: component counts and matching size must agree");
    }
    std::vector<bool> seen(p.size(), false);
    for (std::size_t j : perm) {
        if (j >= p.size() || seen[j]) {
            throw DomainError("componentwise_tv: matching is not a permutation");
        }
        seen[j] = true;
    }
    std::vector<TvEstimate> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        out.push_back(mc_tv(MixtureModel::single(p.component(i)), MixtureModel::single(q.component(perm[i])), n, seed));
    }
    return out;
}

} // namespace sgmm
