#include <gtest/gtest.h>

#include <random>

#include "ntr/vspace.hpp"

using ntr::ParamPoint;
using ntr::Shape;

TEST(Shape, RejectsZeroDims) {
    EXPECT_THROW(Shape::vector(0), ntr::ShapeError);
    EXPECT_THROW(Shape::matrix(2, 0), ntr::ShapeError);
    EXPECT_EQ(Shape::matrix(3, 4).size(), 12u);
}

TEST(ParamPoint, ValidatesLengthAndFiniteness) {
    EXPECT_THROW(ParamPoint(Shape::vector(3), {1.0, 2.0}), ntr::ShapeError);
    EXPECT_THROW(ParamPoint::vector({1.0, std::numeric_limits<double>::quiet_NaN()}), std::domain_error);
    EXPECT_THROW(ParamPoint::vector({std::numeric_limits<double>::infinity()}), std::domain_error);
}

TEST(ParamPoint, MatrixIsRowMajor) {
    const auto m = ParamPoint::matrix({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(m.shape(), Shape::matrix(2, 3));
    EXPECT_EQ(m[1], 2.0);
    EXPECT_EQ(m[3], 4.0);
    EXPECT_EQ(m.at(1, 2), 6.0);
}

TEST(Inner, Examples) {
    EXPECT_DOUBLE_EQ(ntr::inner(ParamPoint::vector({1, 2}), ParamPoint::vector({3, 4})), 11.0);
    EXPECT_DOUBLE_EQ(ntr::inner(ParamPoint::vector({0, 0}), ParamPoint::vector({5, -7})), 0.0);
    EXPECT_DOUBLE_EQ(ntr::inner(ParamPoint::matrix({{1, 0}, {0, 1}}), ParamPoint::matrix({{2, 3}, {4, 5}})), 7.0);
}

TEST(Inner, ShapeMismatchMessage) {
    try {
        (void)ntr::inner(ParamPoint::vector({1, 2, 3, 4}), ParamPoint::matrix({{1, 2}, {3, 4}}));
        FAIL() << "expected ShapeError";
    } catch (const ntr::ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("incompatible shapes"), std::string::npos);
    }
}

TEST(EuclidNorm, Examples) {
    EXPECT_DOUBLE_EQ(ntr::euclid_norm(ParamPoint::vector({3, 4})), 5.0);
    EXPECT_EQ(ntr::euclid_norm(ParamPoint::zeros(Shape::matrix(3, 2))), 0.0);
    EXPECT_DOUBLE_EQ(ntr::euclid_norm(ParamPoint::matrix({{1, 1}, {1, 1}})), 2.0);
}

TEST(Axpby, Examples) {
    EXPECT_EQ(ntr::axpby(1, ParamPoint::vector({1, 2}), 1, ParamPoint::vector({3, 4})), ParamPoint::vector({4, 6}));
    const auto r = ntr::axpby(0.9, ParamPoint::vector({10, 10}), 0.1, ParamPoint::vector({0, 0}));
    EXPECT_DOUBLE_EQ(r[0], 9.0);
    EXPECT_DOUBLE_EQ(r[1], 9.0);
    const auto x = ParamPoint::vector({0.3, -1.7, 2.2});
    EXPECT_EQ(ntr::axpby(1, x, -1, x), ParamPoint::zeros(x.shape()));
    EXPECT_EQ(ntr::axpby(1, x, 0, ParamPoint::vector({5, 6, 7})), x);
    EXPECT_THROW(ntr::axpby(1, x, 1, ParamPoint::vector({1, 2})), ntr::ShapeError);
}

namespace {

ParamPoint random_point(std::mt19937_64& rng, const Shape& s) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(s.size());
    for (double& e : v) e = n(rng);
    return {s, v};
}

}  // namespace

TEST(Properties, InnerSymmetricBilinear) {
    std::mt19937_64 rng(1);
    const Shape s = Shape::matrix(3, 4);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_point(rng, s), b = random_point(rng, s), c = random_point(rng, s);
        const double alpha = 0.7, beta = -1.3;
        const double ab = ntr::inner(a, b);
        EXPECT_NEAR(ab, ntr::inner(b, a), 1e-12 * std::max(1.0, std::abs(ab)));
        const double lhs = ntr::inner(ntr::axpby(alpha, a, beta, b), c);
        const double rhs = alpha * ntr::inner(a, c) + beta * ntr::inner(b, c);
        EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Properties, NormTriangleAndHomogeneity) {
    std::mt19937_64 rng(2);
    const Shape s = Shape::vector(7);
    for (int t = 0; t < 200; ++t) {
        const auto a = random_point(rng, s), b = random_point(rng, s);
        EXPECT_LE(ntr::euclid_norm(a + b), ntr::euclid_norm(a) + ntr::euclid_norm(b) + 1e-12);
        EXPECT_NEAR(ntr::euclid_norm(ntr::scale(-2.5, a)), 2.5 * ntr::euclid_norm(a), 1e-12);
    }
}
