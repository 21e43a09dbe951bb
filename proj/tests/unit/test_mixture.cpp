#include <sgmm/mixture.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

using namespace sgmm;

namespace {

MixtureModel two_point(double w1 = 0.5) {
    return MixtureModel({SphericalGaussian({-3.0}, 1.0), SphericalGaussian({3.0}, 1.0)}, {w1, 1.0 - w1});
}

MixtureModel random_mixture(std::mt19937_64& gen, int k, int d) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.2, 2.0);
    std::vector<SphericalGaussian> comps;
    std::vector<double> w;
    for (int i = 0; i < k; ++i) {
        Vector mu(static_cast<std::size_t>(d));
        for (auto& m : mu) {
            m = 3.0 * z(gen);
        }
        comps.emplace_back(mu, u(gen));
        w.push_back(u(gen));
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) {
        x /= total;
    }
    return MixtureModel(comps, w);
}

MixtureModel reorder(const MixtureModel& m, const std::vector<std::size_t>& order) {
    std::vector<SphericalGaussian> comps;
    std::vector<double> w;
    for (std::size_t i : order) {
        comps.push_back(m.component(i));
        w.push_back(m.weight(i));
    }
    return MixtureModel(comps, w);
}

// Recursive enumeration of all assignments, independent of std::next_permutation.
double brute_force_dparam(const MixtureModel& p, const MixtureModel& q) {
    const std::size_t k = p.size();
    std::vector<bool> used(k, false);
    double best = INFINITY;
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double worst) {
        if (worst >= best) {
            return;
        }
        if (i == k) {
            best = worst;
            return;
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (used[j]) {
                continue;
            }
            const double pi = p.weight(i);
            const double pj = q.weight(j);
            const double s1 = p.component(i).sigma;
            const double s2 = q.component(j).sigma;
            double dist = 0.0;
            for (std::size_t t = 0; t < p.component(i).mean.size(); ++t) {
                const double diff = p.component(i).mean[t] - q.component(j).mean[t];
                dist += diff * diff;
            }
            const double term = std::fabs(pi - pj) / std::min(pi, pj) + std::sqrt(dist) / std::max(s1, s2) +
                                std::fabs(s1 * s1 - s2 * s2) / std::min(s1 * s1, s2 * s2);
            used[j] = true;
            rec(i + 1, std::max(worst, term));
            used[j] = false;
        }
    };
    rec(0, 0.0);
    return best;
}

} // namespace

TEST(MixtureModel, WeightNormalization) {
    const MixtureModel ok({SphericalGaussian({0.0}, 1.0), SphericalGaussian({1.0}, 1.0)}, {0.5 + 4e-10, 0.5});
    EXPECT_NEAR(ok.weight(0) + ok.weight(1), 1.0, 1e-15);
    EXPECT_THROW(MixtureModel({SphericalGaussian({0.0}, 1.0), SphericalGaussian({1.0}, 1.0)}, {0.5, 0.49}),
                 DomainError);
    EXPECT_THROW(MixtureModel({SphericalGaussian({0.0}, 1.0)}, {-0.1}), DomainError);
    EXPECT_THROW(MixtureModel({SphericalGaussian({0.0}, 1.0), SphericalGaussian({1.0, 2.0}, 1.0)}, {0.5, 0.5}),
                 DimensionMismatch);
    EXPECT_THROW(MixtureModel({SphericalGaussian({0.0}, 1.0)}, {0.5, 0.5}), SizeMismatch);
    EXPECT_THROW(MixtureModel({}, {}), DomainError);
}

TEST(MixtureModel, LogDensityIsStable) {
    const MixtureModel m = two_point();
    const double x0[] = {0.0};
    const double expected = std::log(std::exp(-4.5) / std::sqrt(2.0 * std::numbers::pi));
    EXPECT_NEAR(m.log_density(x0), expected, 1e-14);
    const double far[] = {1e5};
    EXPECT_TRUE(std::isfinite(m.log_density(far)));
}

TEST(Membership, StablePairAtEquality) {
    const auto r = check_class_membership(two_point(), ModelClassSpec{2, 0.45, 0.55, 3.0});
    EXPECT_TRUE(r.a1);
    EXPECT_TRUE(r.a2);
    EXPECT_EQ(r.a3, SeparationStatus::fail_at_equality);
    EXPECT_DOUBLE_EQ(r.min_separation, 3.0);
    EXPECT_EQ(r.min_pair, std::make_pair(std::size_t{0}, std::size_t{1}));
    EXPECT_FALSE(r.passes());
    const auto below = check_class_membership(two_point(), ModelClassSpec{2, 0.45, 0.55, 3.0 - 1e-9});
    EXPECT_EQ(below.a3, SeparationStatus::pass);
    EXPECT_TRUE(below.passes());
    const auto above = check_class_membership(two_point(), ModelClassSpec{2, 0.45, 0.55, 3.5});
    EXPECT_EQ(above.a3, SeparationStatus::fail);
}

TEST(Membership, A1AndA2Failures) {
    const auto single = MixtureModel::single(SphericalGaussian({0.0}, 1.0));
    EXPECT_FALSE(check_class_membership(single, ModelClassSpec{2, 0.45, 0.55, 1.0}).a1);
    const auto r = check_class_membership(two_point(0.6), ModelClassSpec{2, 0.45, 0.55, 1.0});
    EXPECT_FALSE(r.a2);
    ASSERT_EQ(r.a2_violations.size(), 2u);
    EXPECT_EQ(r.a2_violations[1], 1u);
    const auto lo_only = check_class_membership(two_point(0.6), ModelClassSpec{2, 0.45, 0.6, 1.0});
    ASSERT_EQ(lo_only.a2_violations.size(), 1u);
    EXPECT_EQ(lo_only.a2_violations[0], 1u);
}

TEST(SeparationMatrix, Values) {
    const auto s = separation_matrix(two_point());
    EXPECT_DOUBLE_EQ(s[0][1], 3.0);
    EXPECT_EQ(s[0][0], 0.0);
    const MixtureModel same({SphericalGaussian({1.0, 1.0}, 1.0), SphericalGaussian({1.0, 1.0}, 2.0)}, {0.5, 0.5});
    EXPECT_EQ(separation_matrix(same)[0][1], 0.0);

    const double sc = 4.0;
    std::vector<SphericalGaussian> comps;
    for (int k = 0; k < 5; ++k) {
        Vector mu(5, 0.0);
        mu[k] = sc;
        comps.emplace_back(mu, 1.0);
    }
    const auto s5 = separation_matrix(MixtureModel(comps, std::vector<double>(5, 0.2)));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            EXPECT_NEAR(s5[i][j], i == j ? 0.0 : sc * std::sqrt(2.0) / 2.0, 1e-14);
            EXPECT_EQ(s5[i][j], s5[j][i]);
        }
    }
}

TEST(SeparationMatrix, RotationInvariant) {
    std::mt19937_64 gen(17);
    const MixtureModel m = random_mixture(gen, 4, 2);
    const double t = 0.731;
    std::vector<SphericalGaussian> rotated;
    for (const auto& g : m.components()) {
        rotated.emplace_back(Vector{std::cos(t) * g.mean[0] - std::sin(t) * g.mean[1],
                                    std::sin(t) * g.mean[0] + std::cos(t) * g.mean[1]},
                             g.sigma);
    }
    const auto a = separation_matrix(m);
    const auto b = separation_matrix(MixtureModel(rotated, m.weights()));
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_NEAR(a[i][j], b[i][j], 1e-12);
        }
    }
}

TEST(Dparam, IdentityAndRelabeling) {
    std::mt19937_64 gen(19);
    for (int k = 1; k <= 6; ++k) {
        const MixtureModel m = random_mixture(gen, k, 3);
        const auto self = dparam(m, m);
        EXPECT_EQ(self.dparam, 0.0);
        for (int i = 0; i < k; ++i) {
            EXPECT_EQ(self.permutation[i].second, static_cast<std::size_t>(i));
        }
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), gen);
        const auto shuffled = dparam(m, reorder(m, order));
        EXPECT_EQ(shuffled.dparam, 0.0);
        for (int i = 0; i < k; ++i) {
            EXPECT_EQ(order[shuffled.permutation[i].second], static_cast<std::size_t>(i));
        }
    }
}

TEST(Dparam, MatchesBruteForce) {
    std::mt19937_64 gen(23);
    for (int k = 1; k <= 6; ++k) {
        for (int rep = 0; rep < 5; ++rep) {
            const MixtureModel p = random_mixture(gen, k, 2);
            const MixtureModel q = random_mixture(gen, k, 2);
            const auto r = dparam(p, q);
            EXPECT_NEAR(r.dparam, brute_force_dparam(p, q), 1e-12);
            EXPECT_DOUBLE_EQ(r.dparam, *std::max_element(r.per_pair_dparam.begin(), r.per_pair_dparam.end()));
            for (std::size_t i = 0; i < r.per_pair_terms.size(); ++i) {
                EXPECT_DOUBLE_EQ(r.per_pair_terms[i].total(), r.per_pair_dparam[i]);
            }
        }
    }
}

TEST(Dparam, KTwoPerturbation) {
    const MixtureModel p = two_point();
    const MixtureModel q({SphericalGaussian({3.1}, 1.05), SphericalGaussian({-3.0}, 1.0)}, {0.52, 0.48});
    const double id0 = 0.02 / 0.48 + 0.0 + 0.0;
    const double id1 = 0.02 / 0.5 + 0.1 / 1.05 + (1.05 * 1.05 - 1.0);
    const auto r = dparam(p, q);
    EXPECT_NEAR(r.dparam, std::max(id0, id1), 1e-14);
    EXPECT_EQ(r.permutation[0].second, 1u);
}

TEST(Dparam, SymmetricAndZeroOnlyWhenEqual) {
    std::mt19937_64 gen(29);
    for (int rep = 0; rep < 20; ++rep) {
        const int k = 1 + rep % 5;
        const MixtureModel p = random_mixture(gen, k, 2);
        const MixtureModel q = random_mixture(gen, k, 2);
        EXPECT_NEAR(dparam(p, q).dparam, dparam(q, p).dparam, 1e-14);
        EXPECT_GT(dparam(p, q).dparam, 0.0);
    }
}

TEST(Dparam, RescalingInvariant) {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 20; ++rep) {
        const MixtureModel p = random_mixture(gen, 3, 4);
        const MixtureModel q = random_mixture(gen, 3, 4);
        const double s = 0.1 + 5.0 * rep;
        auto scale = [s](const MixtureModel& m) {
            std::vector<SphericalGaussian> comps;
            for (const auto& g : m.components()) {
                Vector mu = g.mean;
                for (auto& x : mu) {
                    x *= s;
                }
                comps.emplace_back(mu, g.sigma * s);
            }
            return MixtureModel(comps, m.weights());
        };
        const double a = dparam(p, q).dparam;
        EXPECT_NEAR(dparam(scale(p), scale(q)).dparam, a, 1e-12 * std::max(1.0, a));
    }
}

TEST(Dparam, Errors) {
    std::mt19937_64 gen(37);
    EXPECT_THROW(dparam(random_mixture(gen, 2, 1), random_mixture(gen, 3, 1)), SizeMismatch);
    EXPECT_THROW(dparam(random_mixture(gen, 11, 1), random_mixture(gen, 11, 1)), TooManyComponents);
    EXPECT_THROW(dparam(random_mixture(gen, 2, 1), random_mixture(gen, 2, 2)), DimensionMismatch);
}

TEST(MassCenter, Identity) {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const int d = 1 + rep % 10;
        auto point = [&] {
            Vector v(static_cast<std::size_t>(d));
            for (auto& x : v) {
                x = 5.0 * u(gen);
            }
            return v;
        };
        const Vector x1 = point(), x2 = point(), y1 = point(), y2 = point();
        const double a = w(gen);
        const double b = w(gen);
        const double lhs = squared_distance(weighted_center(x1, x2, a), weighted_center(y1, y2, b));
        const double rhs = a * b * squared_distance(x1, y1) + (1 - a) * (1 - b) * squared_distance(x2, y2) +
                           (1 - a) * b * squared_distance(x2, y1) + a * (1 - b) * squared_distance(x1, y2) -
                           a * (1 - a) * squared_distance(x1, x2) - b * (1 - b) * squared_distance(y1, y2);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, lhs));
    }
}

TEST(MixtureJson, RoundTrip) {
    std::mt19937_64 gen(43);
    const MixtureModel m = random_mixture(gen, 3, 2);
    const MixtureModel back = parse_mixture(to_json(m).dump());
    EXPECT_EQ(back, m);
}

TEST(MixtureJson, Malformed) {
    EXPECT_THROW(parse_mixture("{not json"), ParseError);
    EXPECT_THROW(parse_mixture(R"({"dim": 1})"), ParseError);
    EXPECT_THROW(parse_mixture(R"({"dim": 1, "components": [{"mean": [0], "weight": 1}]})"), ParseError);
    EXPECT_THROW(parse_mixture(R"({"dim": 2, "components": [{"mean": [0], "sigma": 1, "weight": 1}]})"),
                 DimensionMismatch);
    EXPECT_THROW(load_mixture("/nonexistent/file.json"), ParseError);
}
