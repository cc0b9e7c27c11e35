#include <gtest/gtest.h>

#include <random>

#include "ntr/geometry.hpp"

using namespace ntr;

namespace {

NormGeometry geo(NormKind k, const Shape& s) { return NormGeometry::make(k, s); }

void expect_near(const ParamPoint& a, const ParamPoint& b, double tol) {
    ASSERT_EQ(a.shape(), b.shape());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

ParamPoint random_point(std::mt19937_64& rng, const Shape& s) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(s.size());
    for (double& e : v) e = n(rng);
    return {s, v};
}

}  // namespace

TEST(Norms, PrimalExamples) {
    const auto v = ParamPoint::vector({-2, 0, 5});
    EXPECT_DOUBLE_EQ(primal_norm(geo(NormKind::Infinity, v.shape()), v), 5.0);
    const auto d = ParamPoint::diag({2, 3});
    EXPECT_NEAR(primal_norm(geo(NormKind::Spectral, d.shape()), d), 3.0, 1e-14);
    const auto e = ParamPoint::vector({3, 4});
    EXPECT_DOUBLE_EQ(primal_norm(geo(NormKind::Euclidean, e.shape()), e), 5.0);
}

TEST(Norms, DualExamples) {
    const auto v = ParamPoint::vector({-2, 0, 5});
    EXPECT_DOUBLE_EQ(dual_norm(geo(NormKind::Infinity, v.shape()), v), 7.0);
    const auto d = ParamPoint::diag({2, 3});
    EXPECT_NEAR(dual_norm(geo(NormKind::Spectral, d.shape()), d), 5.0, 1e-14);
    for (NormKind k : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
        const auto z = ParamPoint::zeros(Shape::matrix(2, 3));
        EXPECT_EQ(dual_norm(geo(k, z.shape()), z), 0.0);
    }
}

TEST(Norms, SpectralOnVectorThrows) {
    const auto v = ParamPoint::vector({1, 2});
    const NormGeometry g{NormKind::Spectral, 1.0};
    EXPECT_THROW((void)primal_norm(g, v), ShapeError);
    EXPECT_THROW((void)dual_norm(g, v), ShapeError);
    EXPECT_THROW((void)lmo(g, v), ShapeError);
    EXPECT_THROW((void)rho_constant(NormKind::Spectral, v.shape()), ShapeError);
}

TEST(Lmo, Examples) {
    expect_near(lmo(geo(NormKind::Euclidean, Shape::vector(2)), ParamPoint::vector({3, 4})),
                ParamPoint::vector({0.6, 0.8}), 1e-15);
    EXPECT_EQ(lmo(geo(NormKind::Infinity, Shape::vector(3)), ParamPoint::vector({-2, 0, 5})),
              ParamPoint::vector({-1, 0, 1}));
    expect_near(lmo(geo(NormKind::Spectral, Shape::matrix(2, 2)), ParamPoint::matrix({{0, 2}, {0, 0}})),
                ParamPoint::matrix({{0, 1}, {0, 0}}), 1e-14);
}

TEST(Lmo, EuclideanZeroIsZero) {
    const auto z = ParamPoint::zeros(Shape::vector(4));
    EXPECT_EQ(lmo(geo(NormKind::Euclidean, z.shape()), z), z);
}

TEST(Lmo, AttainsDualNormInsideUnitBall) {
    std::mt19937_64 rng(5);
    for (NormKind k : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
        for (int t = 0; t < 50; ++t) {
            const Shape s = Shape::matrix(3, 5);
            const auto g = geo(k, s);
            const auto m = random_point(rng, s);
            const auto u = lmo(g, m);
            EXPECT_LE(primal_norm(g, u), 1.0 + 1e-12);
            EXPECT_NEAR(inner(m, u), dual_norm(g, m), 1e-10 * dual_norm(g, m));
        }
    }
}

TEST(Orth, Examples) {
    expect_near(orth(ParamPoint::diag({1, 1})), ParamPoint::diag({1, 1}), 1e-15);
    expect_near(orth(ParamPoint::diag({5, 0.1})), ParamPoint::diag({1, 1}), 1e-14);
    expect_near(orth(ParamPoint::matrix({{0, 2}, {0, 0}})), ParamPoint::matrix({{0, 1}, {0, 0}}), 1e-14);
    const auto z = ParamPoint::zeros(Shape::matrix(3, 2));
    EXPECT_EQ(orth(z), z);
}

TEST(Orth, IdempotentWithUnitSingularValues) {
    std::mt19937_64 rng(6);
    for (const Shape& s : {Shape::matrix(4, 4), Shape::matrix(3, 6), Shape::matrix(6, 2)}) {
        const auto O = orth(random_point(rng, s));
        expect_near(orth(O), O, 1e-12);
        for (double sv : singular_values(O)) EXPECT_NEAR(sv, 1.0, 1e-12);
    }
}

TEST(Orth, RankDeficientKeepsZeroSingularValues) {
    const auto r1 = ParamPoint::matrix({{1, 2, 3}, {2, 4, 6}});
    const auto sv = singular_values(orth(r1));
    ASSERT_EQ(sv.size(), 2u);
    EXPECT_NEAR(sv[0], 1.0, 1e-12);
    EXPECT_NEAR(sv[1], 0.0, 1e-12);
}

TEST(Orth, NewtonSchulzApproximatesWellConditioned) {
    std::mt19937_64 rng(7);
    OrthConfig ns;
    ns.method = OrthMethod::NewtonSchulz;
    ns.ns_steps = 10;
    for (int t = 0; t < 10; ++t) {
        const auto G = random_point(rng, Shape::matrix(4, 4)) + ParamPoint::diag({5, 5, 5, 5});
        expect_near(orth(G, ns), orth(G), 1e-3);
    }
}

TEST(Orth, RejectsBadConfig) {
    OrthConfig bad;
    bad.method = OrthMethod::NewtonSchulz;
    bad.ns_steps = 0;
    EXPECT_THROW((void)orth(ParamPoint::diag({1, 1}), bad), std::invalid_argument);
}

TEST(Rho, Examples) {
    EXPECT_EQ(rho_constant(NormKind::Euclidean, Shape::vector(17)), 1.0);
    EXPECT_DOUBLE_EQ(rho_constant(NormKind::Infinity, Shape::vector(9)), 3.0);
    EXPECT_DOUBLE_EQ(rho_constant(NormKind::Spectral, Shape::matrix(4, 7)), 2.0);
}

TEST(Rho, DualBoundedByRhoTimesEuclidean) {
    std::mt19937_64 rng(8);
    for (NormKind k : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
        const Shape s = Shape::matrix(4, 7);
        const auto g = geo(k, s);
        for (int t = 0; t < 100; ++t) {
            const auto x = random_point(rng, s);
            EXPECT_LE(dual_norm(g, x), g.rho * euclid_norm(x) * (1 + 1e-12));
        }
    }
    const auto ones = ParamPoint::filled(Shape::vector(9), 1.0);
    EXPECT_DOUBLE_EQ(dual_norm(geo(NormKind::Infinity, ones.shape()), ones), 3.0 * euclid_norm(ones));
}

TEST(Holder, InnerBoundedByPrimalTimesDual) {
    std::mt19937_64 rng(9);
    for (NormKind k : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
        const Shape s = Shape::matrix(3, 3);
        const auto g = geo(k, s);
        for (int t = 0; t < 200; ++t) {
            const auto a = random_point(rng, s), b = random_point(rng, s);
            EXPECT_LE(std::abs(inner(a, b)), primal_norm(g, a) * dual_norm(g, b) * (1 + 1e-12));
        }
    }
}

TEST(NormKindNames, RoundTrip) {
    for (NormKind k : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral})
        EXPECT_EQ(norm_kind_from_string(to_string(k)), k);
    EXPECT_THROW(norm_kind_from_string("l1"), std::invalid_argument);
}
