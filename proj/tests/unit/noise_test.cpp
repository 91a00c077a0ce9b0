#include "qi/noise.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

using namespace qi;

TEST(Reflectivity, DetectionExamples) {
    EXPECT_NEAR(detection_with_reflectivity(1.0, 1.0, 0.0, 0.1), 0.9, 1e-15);
    EXPECT_NEAR(detection_with_reflectivity(0.0, 1.0, 0.0, 0.1), 0.225, 1e-15);
    EXPECT_DOUBLE_EQ(detection_with_reflectivity(0.3, 0.8, 1.1, 0.0), one_arm_detection(0.3, 0.8, 1.1));
    EXPECT_THROW(detection_with_reflectivity(0.3, 0.8, 1.1, 1.0), DomainError);
    EXPECT_THROW(detection_with_reflectivity(0.3, 0.8, 1.1, -0.1), DomainError);
}

TEST(Reflectivity, IProbExamples) {
    EXPECT_NEAR(i_prob_reflectivity(0.0, 1.0, 0.1), 0.675, 1e-15);
    EXPECT_NEAR(i_prob_reflectivity(1.0, 1.0, 0.1), 0.45, 1e-15);
    EXPECT_LT(i_prob_reflectivity(1.0, 1.0, 0.1), 0.5);
    EXPECT_DOUBLE_EQ(i_prob_reflectivity(0.4, 0.7, 0.0), i_prob(0.4, 0.7));
}

TEST(Jitter, Examples) {
    EXPECT_NEAR(dmax_with_jitter(1.0, 1.0, 0.1), 0.975, 1e-15);
    EXPECT_NEAR(dmax_with_jitter(0.0, 1.0, 0.1), 0.25, 1e-15);
    EXPECT_NEAR(dmax_with_jitter(0.36, 0.5, 0.0), 0.25 * (1.0 + 0.36 + 2.0 * 0.5 * 0.6), 1e-15);
    EXPECT_NEAR(i_prob_jitter(0.0, 1.0, 0.1), 0.725, 1e-15);
    EXPECT_NEAR(i_prob_jitter(0.5, 0.9, 0.1), 0.55, 1e-15);
    EXPECT_DOUBLE_EQ(i_prob_jitter(0.4, 0.7, 0.0), i_prob(0.4, 0.7));
    EXPECT_THROW(dmax_with_jitter(0.5, 1.0, 0.51), DomainError);
    EXPECT_THROW(i_prob_jitter(0.5, 1.0, -0.01), DomainError);
    EXPECT_NO_THROW(i_prob_jitter(0.5, 1.0, 0.5));
}

TEST(ScalingLaws, HoldOnRandomGrid) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> lam(0.0, 0.99);
    std::uniform_real_distribution<double> var(0.0, 0.5);
    for (int i = 0; i < 10000; ++i) {
        const double mu = unit(rng), eps = unit(rng), l = lam(rng), d = var(rng);
        EXPECT_NEAR(i_prob_reflectivity(mu, eps, l) / i_prob(mu, eps), 1.0 - l, 1e-12);
        EXPECT_NEAR(i_prob(mu, eps) - i_prob_jitter(mu, eps, d), d / 4.0, 1e-12);
    }
}

TEST(NoiseSpec, ValidateWarnsAndRejects) {
    NoiseSpec ok{0.1, 0.1, {0.05, 0.05}};
    EXPECT_TRUE(ok.validate().empty());
    NoiseSpec loose{0.1, 0.3, {}};
    EXPECT_EQ(loose.validate().size(), 1u);
    EXPECT_THROW((NoiseSpec{0.1, 0.6, {}}).validate(), DomainError);
    EXPECT_THROW((NoiseSpec{1.0, 0.0, {}}).validate(), DomainError);
    EXPECT_THROW((NoiseSpec{0.0, 0.0, {0.6, 0.5}}).validate(), DomainError);
    EXPECT_THROW((NoiseSpec{0.0, 0.0, {-0.1}}).validate(), DomainError);
}

TEST(AugmentWithReflection, Examples) {
    const auto rho = make_initial(0.6);
    const auto none = augment_with_reflection(rho, {});
    EXPECT_LE(max_abs_diff(none.forward.matrix(), rho.matrix()), 0.0);
    EXPECT_DOUBLE_EQ(none.reflected_prob, 0.0);

    const std::vector<double> two{0.05, 0.05};
    const auto split = augment_with_reflection(rho, two);
    EXPECT_NEAR(split.forward.trace(), 0.9, 1e-15);
    EXPECT_NEAR(split.reflected_prob, 0.1, 1e-15);

    const auto half = apply(make_absorber(0.0, 0.0), make_initial(0.0));
    const std::vector<double> one{0.1};
    EXPECT_NEAR(augment_with_reflection(half, one).forward.trace(), 0.45, 1e-15);

    const std::vector<double> too_much{0.5, 0.5};
    EXPECT_THROW(augment_with_reflection(rho, too_much), DomainError);
}

TEST(AugmentWithReflection, ConservesProbability) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> small(0.0, 0.1);
    for (int i = 0; i < 2000; ++i) {
        const auto rho = apply(make_absorber(unit(rng), unit(rng)), apply(make_hwp(unit(rng)), make_initial(unit(rng))));
        std::vector<double> lambdas(1 + i % 5);
        for (double& l : lambdas) l = small(rng);
        const auto split = augment_with_reflection(rho, lambdas);
        EXPECT_NEAR(split.forward.trace() + split.reflected_prob, rho.trace(), 1e-12);
    }
}

// Gaussian phase noise with variance v: the exact average of the constructive maximum is
// 1/4 (1 + mu + 2 eps sqrt(mu) exp(-v/2)); it differs from the second-order law by at most
// (eps sqrt(mu) / 2) v^2 / 8 <= v^2 / 16, so C = 1/16. The Monte Carlo error is allowed 4 sigma.
TEST(Jitter, MonteCarloMatchesSecondOrderLaw) {
    constexpr double kC = 1.0 / 16.0;
    constexpr int kSamples = 1'000'000;
    std::mt19937_64 rng(2024);
    for (double v : {0.001, 0.01, 0.05, 0.1}) {
        for (double mu : {0.25, 0.526, 1.0}) {
            for (double eps : {0.77, 1.0}) {
                std::normal_distribution<double> phase(0.0, std::sqrt(v));
                double sum = 0.0, sum2 = 0.0;
                for (int k = 0; k < kSamples; ++k) {
                    const double d = one_arm_detection(mu, eps, phase(rng));
                    sum += d;
                    sum2 += d * d;
                }
                const double mean = sum / kSamples;
                const double sd = std::sqrt(std::max(0.0, sum2 / kSamples - mean * mean));
                const double allowance = kC * v * v + 4.0 * sd / std::sqrt(static_cast<double>(kSamples));
                EXPECT_NEAR(mean, dmax_with_jitter(mu, eps, v), allowance) << "v=" << v << " mu=" << mu;
            }
        }
    }
}
