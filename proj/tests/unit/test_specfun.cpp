#include <sgmm/specfun.hpp>

#include <gtest/gtest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

using namespace sgmm;

namespace {

double phi_oracle(double x) {
    using big = boost::multiprecision::cpp_bin_float_50;
    const big v = big(x) / boost::multiprecision::sqrt(big(2));
    return static_cast<double>(boost::multiprecision::erfc(-v) / 2);
}

} // namespace

TEST(NormalCdf, KnownValues) {
    EXPECT_EQ(normal_cdf(0.0), 0.5);
    EXPECT_EQ(normal_cdf(40.0), 1.0);
    EXPECT_EQ(normal_cdf(-40.0), 0.0);
    EXPECT_NEAR(normal_cdf(1.3596), 0.91309, 1e-4);
}

TEST(NormalCdf, MatchesHighPrecisionErfc) {
    for (double x = -30.0; x <= 30.0; x += 0.173) {
        EXPECT_NEAR(normal_cdf(x), phi_oracle(x), 1e-14) << "x=" << x;
    }
}

TEST(NormalCdf, SymmetricAndMonotone) {
    double prev = 0.0;
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        const double v = normal_cdf(x);
        EXPECT_GE(v, prev);
        prev = v;
        EXPECT_NEAR(normal_cdf(-x) + v, 1.0, 1e-14);
    }
}

TEST(NormalCdf, RejectsNan) { EXPECT_THROW(normal_cdf(std::nan("")), DomainError); }

TEST(NormalQuantile, KnownValues) {
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_NEAR(normal_quantile(0.75), 0.674490, 1e-5);
    EXPECT_NEAR(normal_quantile(normal_cdf(1.7)), 1.7, 1e-10);
}

TEST(NormalQuantile, ResidualBelow1e12) {
    for (double p = 1e-300; p < 1.0; p *= 3.7) {
        EXPECT_LE(std::fabs(normal_cdf(normal_quantile(p)) - p), 1e-12) << "p=" << p;
    }
    for (double p = 0.001; p < 1.0; p += 0.001) {
        EXPECT_LE(std::fabs(normal_cdf(normal_quantile(p)) - p), 1e-12) << "p=" << p;
    }
}

TEST(NormalQuantile, RoundTrip) {
    // Above x ~ 5, Phi(x) is too close to 1 for the round trip to hold in double.
    for (double x = -8.0; x <= 5.0; x += 0.01) {
        EXPECT_NEAR(normal_quantile(normal_cdf(x)), x, 1e-10) << "x=" << x;
    }
    for (double x = 0.0; x <= 8.0; x += 0.01) {
        EXPECT_NEAR(-normal_quantile(normal_cdf(-x)), x, 1e-10) << "x=" << x;
    }
}

TEST(NormalQuantile, DomainErrors) {
    EXPECT_THROW(normal_quantile(0.0), DomainError);
    EXPECT_THROW(normal_quantile(1.0), DomainError);
    EXPECT_THROW(normal_quantile(-0.2), DomainError);
    EXPECT_THROW(normal_quantile(std::nan("")), DomainError);
}

TEST(GammaCdfFd, KnownValues) {
    EXPECT_EQ(gamma_cdf_fd(0.0, 1), 0.0);
    EXPECT_EQ(gamma_cdf_fd(0.0, 7), 0.0);
    EXPECT_NEAR(gamma_cdf_fd(1.8484, 1), 0.8262, 1e-3);
    EXPECT_THROW(gamma_cdf_fd(-1.0, 2), DomainError);
    EXPECT_THROW(gamma_cdf_fd(1.0, 0), DomainError);
}

TEST(GammaCdfFd, ChiSquareOneIdentity) {
    for (int i = 1; i <= 100; ++i) {
        const double x = 0.08 * i;
        EXPECT_NEAR(gamma_cdf_fd(x, 1), 2.0 * normal_cdf(std::sqrt(x)) - 1.0, 1e-10) << "x=" << x;
    }
}

TEST(GammaCdfFd, MonotoneAndComplement) {
    for (int d : {1, 2, 5, 20, 100}) {
        double prev = 0.0;
        for (double x = 0.0; x <= 5.0; x += 0.02) {
            const double v = gamma_cdf_fd(x, d);
            EXPECT_GE(v, prev);
            prev = v;
            EXPECT_NEAR(v + gamma_sf_fd(x, d), 1.0, 1e-14);
        }
    }
}

TEST(NoncentralChisq, CentralReduction) {
    for (int d : {1, 2, 3, 10, 50}) {
        for (double x = 0.1; x <= 120.0; x *= 1.7) {
            EXPECT_NEAR(noncentral_chisq_cdf(x, d, 0.0), gamma_cdf_fd(x / d, d), 1e-10);
        }
        EXPECT_EQ(noncentral_chisq_cdf(0.0, d, 3.0), 0.0);
    }
}

TEST(NoncentralChisq, MatchesBoostDistribution) {
    for (int d : {1, 2, 5, 20, 60}) {
        for (double lambda : {0.01, 0.5, 3.0, 25.0, 400.0, 1e4, 2.5e5}) {
            boost::math::non_central_chi_squared dist(d, lambda);
            const double mean = d + lambda;
            const double sd = std::sqrt(2.0 * (d + 2.0 * lambda));
            for (double z = -6.0; z <= 6.0; z += 0.75) {
                const double x = mean + z * sd;
                if (x <= 0.0) {
                    continue;
                }
                EXPECT_NEAR(noncentral_chisq_cdf(x, d, lambda), boost::math::cdf(dist, x), 1e-10)
                    << "d=" << d << " lambda=" << lambda << " x=" << x;
            }
        }
    }
}

TEST(NoncentralChisq, MonteCarloOracle) {
    std::mt19937_64 gen(20240611);
    std::normal_distribution<double> z;
    const int n = 10'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const double a = z(gen) + 1.0;
        const double b = z(gen);
        hits += (a * a + b * b <= 3.0);
    }
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_NEAR(noncentral_chisq_cdf(3.0, 2, 1.0), p, 3.0 * se);
}

TEST(NoncentralChisq, NonincreasingInLambda) {
    for (int d : {1, 3, 12}) {
        for (double x : {0.5, 4.0, 15.0, 60.0}) {
            double prev = 1.0;
            for (double lambda = 0.0; lambda <= 80.0; lambda += 0.5) {
                const double v = noncentral_chisq_cdf(x, d, lambda);
                EXPECT_LE(v, prev + 1e-15);
                prev = v;
            }
        }
    }
}

TEST(NoncentralChisq, DomainErrors) {
    EXPECT_THROW(noncentral_chisq_cdf(-1.0, 2, 1.0), DomainError);
    EXPECT_THROW(noncentral_chisq_cdf(1.0, 2, -1.0), DomainError);
    EXPECT_THROW(noncentral_chisq_cdf(1.0, 0, 1.0), DomainError);
}

TEST(FindRoot, Examples) {
    auto lin = [](double x) { return x - 2.0; };
    EXPECT_NEAR(find_root(lin, RootBracket::of(lin, 0.0, 5.0), 1e-12), 2.0, 1e-12);
    auto q = [](double x) { return normal_cdf(x) - 0.75; };
    EXPECT_NEAR(find_root(q, RootBracket::of(q, 0.0, 3.0)), 0.674490, 1e-6);
    EXPECT_NEAR(find_root(q, RootBracket::of(q, 0.0, 3.0)), normal_quantile(0.75), 1e-10);
    auto sq = [](double x) { return x * x - 2.0; };
    EXPECT_NEAR(find_root(sq, RootBracket::of(sq, 1.0, 2.0)), std::sqrt(2.0), 1e-10);
}

TEST(FindRoot, Errors) {
    auto f = [](double x) { return x * x + 1.0; };
    EXPECT_THROW(find_root(f, RootBracket::of(f, -1.0, 1.0)), BracketError);
    auto lin = [](double x) { return x - 0.3; };
    EXPECT_THROW(find_root(lin, RootBracket::of(lin, 0.0, 1.0), 0.0, 5), NoConvergence);
}

TEST(FindRoot, Deterministic) {
    auto f = [](double x) { return std::cos(x) - x; };
    const auto br = RootBracket::of(f, 0.0, 1.0);
    EXPECT_EQ(find_root(f, br), find_root(f, br));
}
