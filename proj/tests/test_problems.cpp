#include <gtest/gtest.h>

#include <random>

#include "ntr/problems.hpp"

using namespace ntr;

TEST(Quadratic, OneDimensionalExample) {
    const auto p = make_quadratic(Shape::vector(1), 1.0, 0, ParamPoint::vector({0}));
    EXPECT_DOUBLE_EQ(p.value(ParamPoint::vector({3})), 4.5);
    EXPECT_NEAR(p.gradient(ParamPoint::vector({3}))[0], 3.0, 1e-14);
    EXPECT_EQ(*p.lipschitz(NormKind::Euclidean), 1.0);
    EXPECT_EQ(*p.hessian_lipschitz(NormKind::Euclidean), 0.0);
}

TEST(Quadratic, OptimumAndConstants) {
    const auto p = make_quadratic(Shape::vector(6), 10.0, 3);
    ASSERT_TRUE(p.x_star && p.F_star && p.star_convex);
    EXPECT_LT(euclid_norm(p.gradient(*p.x_star)), 1e-12);
    EXPECT_NEAR(p.value(*p.x_star), 0.0, 1e-14);
    EXPECT_DOUBLE_EQ(*p.lipschitz(NormKind::Euclidean), 10.0);
    EXPECT_LE(estimate_L(p, NormKind::Euclidean, 2000), 10.0 * (1 + 1e-9));
    EXPECT_LE(estimate_L(p, NormKind::Infinity, 2000), *p.lipschitz(NormKind::Infinity) * (1 + 1e-9));
    EXPECT_THROW(make_quadratic(Shape::vector(2), 0.5, 0), std::invalid_argument);
}

TEST(Quadratic, StarConvexAtHalf) {
    const auto p = make_quadratic(Shape::vector(5), 8.0, 4);
    Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const auto x = detail::random_normal(p.shape, rng, 3.0);
        const double lhs = p.value(axpby(0.5, *p.x_star, 0.5, x));
        EXPECT_LE(lhs, 0.5 * *p.F_star + 0.5 * p.value(x) + 1e-12);
    }
}

TEST(MatrixLayer, HandEvaluatedExample) {
    // a = (1, 0), b = 0, X = I: F = 0.5 and grad = (Xa - b) a^T = [[1, 0], [0, 0]].
    const detail::MatrixLayerData d{2, 2, {Eigen::Vector2d(1, 0)}, {Eigen::Vector2d(0, 0)}, LossKind::Quadratic};
    const auto X = ParamPoint::diag({1, 1});
    EXPECT_DOUBLE_EQ(detail::layer_value(d, X), 0.5);
    EXPECT_EQ(detail::layer_gradient(d, X), ParamPoint::matrix({{1, 0}, {0, 0}}));
}

TEST(MatrixLayer, AnalyticLipschitz) {
    MatrixLayerProblem mp;
    mp.m = 2;
    mp.n = 2;
    mp.a = {Eigen::Vector2d(2, 0)};
    mp.lambda = 1.0;
    EXPECT_DOUBLE_EQ(mp.analytic_L(), 4.0);
}

TEST(MatrixLayer, LogisticConstantsAgainstGrid) {
    double lam = 0.0, lam_h = 0.0;
    for (int i = -200000; i <= 200000; ++i) {
        const double s = detail::sigmoid(i * 1e-4);
        lam = std::max(lam, s * (1 - s));
        lam_h = std::max(lam_h, std::abs(s * (1 - s) * (1 - 2 * s)));
    }
    EXPECT_NEAR(lam, kLogisticGradLipschitz, 1e-9);
    EXPECT_NEAR(lam_h, kLogisticHessLipschitz, 1e-9);
    EXPECT_LE(lam_h, kLogisticHessLipschitz);
}

TEST(MatrixLayer, GradientMatchesFiniteDifferences) {
    for (LossKind loss : {LossKind::Quadratic, LossKind::Logistic}) {
        const auto p = make_matrix_layer(3, 4, 10, loss, 21).problem;
        Rng rng(2);
        const auto x = p.x0 + detail::random_normal(p.shape, rng);
        const auto g = p.gradient(x);
        const double h = 1e-5;
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::vector<double> a(x.values()), b(x.values());
            a[i] += h;
            b[i] -= h;
            const double fd = (p.value(ParamPoint(x.shape(), a)) - p.value(ParamPoint(x.shape(), b))) / (2 * h);
            EXPECT_NEAR(fd, g[i], 1e-6);
        }
    }
}

TEST(MatrixLayer, SampledConstantsBelowAnalytic) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto mp = make_matrix_layer(3, 4, 12, LossKind::Logistic, seed);
        const auto& p = mp.problem;
        EXPECT_DOUBLE_EQ(*p.lipschitz(NormKind::Spectral), mp.analytic_L());
        EXPECT_LE(estimate_L(p, NormKind::Spectral, 2000, seed), mp.analytic_L() * (1 + 1e-9));
        EXPECT_LE(estimate_H(p, NormKind::Spectral, 200, seed), mp.analytic_H() * (1 + 1e-3));
    }
    const auto q = make_matrix_layer(3, 4, 12, LossKind::Quadratic, 9).problem;
    EXPECT_LE(estimate_H(q, NormKind::Spectral, 200), 1e-4);
    ASSERT_TRUE(q.x_star && q.star_convex);
    EXPECT_LT(euclid_norm(q.gradient(*q.x_star)), 1e-10);
}

TEST(Estimate, ConstantProblemIsZero) {
    Problem p;
    p.shape = Shape::vector(3);
    p.value = [](const ParamPoint&) { return 1.0; };
    p.gradient = [](const ParamPoint& x) { return ParamPoint::zeros(x.shape()); };
    p.x0 = ParamPoint::zeros(p.shape);
    EXPECT_EQ(estimate_L(p, NormKind::Euclidean, 100), 0.0);
    EXPECT_THROW(estimate_L(p, NormKind::Euclidean, 0), std::invalid_argument);
}

TEST(NoisyOracle, ZeroSigmaIsExact) {
    const auto p = make_quadratic(Shape::vector(4), 5.0, 1);
    Rng rng(3);
    const auto x = ParamPoint::vector({1, 2, 3, 4});
    EXPECT_EQ(noisy_oracle(p, 0.0, x, rng), p.gradient(x));
    EXPECT_THROW(noisy_oracle(p, -1.0, x, rng), std::invalid_argument);
}

TEST(NoisyOracle, MeanAndVarianceMonteCarlo) {
    const auto p = make_quadratic(Shape::vector(4), 5.0, 1);
    const auto x = ParamPoint::vector({1, -2, 0.5, 0});
    const auto g = p.gradient(x);
    const double sigma = 0.7;
    const int n = 100000;
    Rng rng(4);
    std::vector<double> mean(4, 0.0);
    double sq = 0.0;
    for (int t = 0; t < n; ++t) {
        const auto e = noisy_oracle(p, sigma, x, rng) - g;
        for (std::size_t i = 0; i < 4; ++i) mean[i] += e[i] / n;
        sq += inner(e, e) / n;
    }
    // Per-coordinate noise sd is sigma / 2; 5 standard errors.
    for (double m : mean) EXPECT_LT(std::abs(m), 5 * (sigma / 2) / std::sqrt(n));
    EXPECT_NEAR(sq, sigma * sigma, 0.03 * sigma * sigma);
}
