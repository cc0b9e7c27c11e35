#include <gtest/gtest.h>

#include <random>

#include "ntr/optimizers.hpp"

using namespace ntr;

namespace {

OptimizerConfig config(Variant v, NormKind g = NormKind::Euclidean, double eta = 0.1, double alpha = 1.0,
                       double beta = 0.0, double gamma = 1.0) {
    OptimizerConfig c;
    c.variant = v;
    c.geometry = g;
    c.eta = eta;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.K = 10;
    return c;
}

ParamPoint random_point(std::mt19937_64& rng, const Shape& s) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(s.size());
    for (double& e : v) e = n(rng);
    return {s, v};
}

}  // namespace

TEST(Init, Examples) {
    const auto x0 = ParamPoint::vector({1, 1});
    const auto s = init(config(Variant::Momentum), x0, ParamPoint::vector({0.5, 0.5}));
    EXPECT_EQ(s.k, 0);
    EXPECT_EQ(s.x, x0);
    EXPECT_EQ(s.m, ParamPoint::vector({0.5, 0.5}));
    EXPECT_EQ(init(config(Variant::Extrapolation, NormKind::Euclidean, 0.1, 0.1, 0, 10), x0, x0).x_bar, x0);
}

TEST(Init, RejectsInfeasibleStart) {
    auto c = config(Variant::DetTR, NormKind::Infinity);
    c.regularizer = Regularizer::clip_ball(NormKind::Infinity, 1.0);
    EXPECT_THROW(init(c, ParamPoint::vector({2, 0}), ParamPoint::vector({1, 1})), InfeasiblePointError);
}

TEST(Step, MomentumAverage) {
    const auto c = config(Variant::Momentum, NormKind::Euclidean, 0.1, 0.1);
    OptimizerState s{0, ParamPoint::vector({0, 0}), ParamPoint::vector({0, 0}), ParamPoint::vector({0, 0})};
    const auto n = step(c, s, ParamPoint::vector({1, 1}));
    EXPECT_DOUBLE_EQ(n.m[0], 0.1);
    EXPECT_DOUBLE_EQ(n.m[1], 0.1);
    EXPECT_EQ(n.k, 1);
}

TEST(Step, DeterministicIgnoresMomentumField) {
    const auto c = config(Variant::DetTR);
    OptimizerState s{0, ParamPoint::vector({0, 0}), ParamPoint::vector({100, -100}), ParamPoint::vector({0, 0})};
    const auto n = step(c, s, ParamPoint::vector({3, 4}));
    EXPECT_NEAR(n.x[0], -0.06, 1e-15);
    EXPECT_NEAR(n.x[1], -0.08, 1e-15);
}

TEST(Step, ExtrapolationArithmetic) {
    // gamma = 10, x = 0, x+ = (0.1, 0) gives xbar+ = (1, 0).
    const auto c = config(Variant::Extrapolation, NormKind::Euclidean, 0.1, 0.1, 0.0, 10.0);
    OptimizerState s{0, ParamPoint::vector({0, 0}), ParamPoint::vector({-1, 0}), ParamPoint::vector({0, 0})};
    const auto n = step(c, s, ParamPoint::vector({-1, 0}));
    EXPECT_NEAR(n.x[0], 0.1, 1e-15);
    EXPECT_NEAR(n.x_bar[0], 1.0, 1e-14);
    EXPECT_EQ(n.x_bar[1], 0.0);
    EXPECT_EQ(&gradient_point(c, n), &n.x_bar);
}

TEST(Step, SpectralMomentumMatchesMuonBitwise) {
    std::mt19937_64 rng(4);
    const Shape sh = Shape::matrix(3, 4);
    const auto c = config(Variant::Momentum, NormKind::Spectral, 0.05, 0.3);
    OptimizerState a{0, random_point(rng, sh), random_point(rng, sh), {}};
    a.x_bar = a.x;
    OptimizerState b = a;
    for (int t = 0; t < 5; ++t) {
        const auto g = random_point(rng, sh);
        a = step(c, a, g);
        b = muon_ref_step(b, g, c.eta, c.alpha);
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.m, b.m);
    }
}

TEST(ReferenceSteps, Examples) {
    const Shape sh = Shape::matrix(2, 2);
    const auto X = ParamPoint::matrix({{3, 1}, {0, 2}});
    const OptimizerState s{0, X, ParamPoint::zeros(sh), X};
    const auto G = ParamPoint::diag({2, 0.5});
    const auto expected = X - ParamPoint::diag({1, 1});
    const auto mu = muon_ref_step(s, G, 1.0, 1.0);
    const auto os = osgdm_ref_step(s, G, 1.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(mu.x[i], expected[i], 1e-14);
        EXPECT_NEAR(os.x[i], expected[i], 1e-14);
    }
    EXPECT_EQ(mu.m, G);
}

TEST(ReferenceSteps, OrderOfMomentumAndOrthDiffers) {
    std::mt19937_64 rng(5);
    const Shape sh = Shape::matrix(3, 3);
    OptimizerState a{0, random_point(rng, sh), random_point(rng, sh), {}};
    OptimizerState b = a;
    const auto g = random_point(rng, sh);
    a = muon_ref_step(a, g, 0.1, 0.5);
    b = osgdm_ref_step(b, g, 0.1, 0.5);
    EXPECT_GT(euclid_norm(a.x - b.x), 1e-6);
}

TEST(Validate, ParameterDomains) {
    const Shape v = Shape::vector(2);
    auto c = config(Variant::DetTR);
    c.K = 0;
    EXPECT_THROW(c.validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::DetTR, NormKind::Euclidean, -1).validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::Momentum, NormKind::Euclidean, 0.1, 0.0).validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::Momentum, NormKind::Euclidean, 0.1, 1.5).validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::DetTR, NormKind::Euclidean, 0.1, 1, 0.1).validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::DetTRDecay).validate(v), std::invalid_argument);
    EXPECT_THROW(config(Variant::DetTR, NormKind::Spectral).validate(v), ShapeError);
    EXPECT_THROW(config(Variant::MuonRef, NormKind::Euclidean).validate(Shape::matrix(2, 2)), std::invalid_argument);
    auto clip = config(Variant::DetTR, NormKind::Euclidean);
    clip.regularizer = Regularizer::clip_ball(NormKind::Infinity, 1);
    EXPECT_THROW(clip.validate(v), UnsupportedPairError);
    EXPECT_NO_THROW(config(Variant::DetTRDecay, NormKind::Infinity, 0.1, 1, 0.1).validate(v));
}

TEST(Validate, ExtrapolationGammaWarning) {
    EXPECT_TRUE(config(Variant::Extrapolation, NormKind::Euclidean, 0.1, 0.1, 0, 10).warnings().empty());
    EXPECT_EQ(config(Variant::Extrapolation, NormKind::Euclidean, 0.1, 0.1, 0, 5).warnings().size(), 1u);
    EXPECT_TRUE(config(Variant::Momentum, NormKind::Euclidean, 0.1, 0.1, 0, 5).warnings().empty());
}

TEST(Schedule, C1) {
    ScheduleInputs in;
    in.eps = 0.1;
    in.L = 1;
    in.delta0 = 10;
    const auto s = schedule(Corollary::C1, in);
    EXPECT_DOUBLE_EQ(s.eta, 0.1);
    EXPECT_EQ(s.K, 1000);
}

TEST(Schedule, C2AllOnes) {
    ScheduleInputs in;
    in.eps = 1;
    in.L = 1;
    in.rho = 1;
    in.sigma = 1;
    in.delta0 = 1;
    const auto s = schedule(Corollary::C2, in);
    EXPECT_DOUBLE_EQ(s.eta, 1.0);
    EXPECT_DOUBLE_EQ(s.alpha, 1.0);
    EXPECT_EQ(s.K, 1);
}

TEST(Schedule, C4) {
    ScheduleInputs in;
    in.eps = 0.1;
    in.L = 1;
    in.D = 2;
    const auto s = schedule(Corollary::C4, in);
    EXPECT_DOUBLE_EQ(s.beta, 0.025);
    EXPECT_DOUBLE_EQ(s.eta, 0.05);
    // 40 times ceil(ln 10 + 1) = 40 * 4
    EXPECT_EQ(s.K, 160);
}

TEST(Schedule, ExtrapolationSetsGamma) {
    ScheduleInputs in;
    in.eps = 0.5;
    in.L = 1;
    in.H = 1;
    in.rho = 2;
    in.sigma = 1;
    in.delta0 = 1;
    const auto s = schedule(Corollary::C6, in);
    EXPECT_DOUBLE_EQ(s.gamma * s.alpha, 1.0);
    EXPECT_LE(s.alpha, 1.0);
    in.D = 1;
    const auto s7 = schedule(Corollary::C7, in);
    EXPECT_DOUBLE_EQ(s7.eta, s7.beta * *in.D);
}

TEST(Schedule, MissingInputNamed) {
    ScheduleInputs in;
    in.eps = 0.1;
    in.L = 1;
    try {
        (void)schedule(Corollary::C1, in);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("delta0"), std::string::npos);
    }
    in.delta0 = 1;
    in.eps = 0;
    EXPECT_THROW((void)schedule(Corollary::C1, in), std::invalid_argument);
}

TEST(Names, RoundTrip) {
    for (Variant v : {Variant::DetTR, Variant::DetTRDecay, Variant::Momentum, Variant::MomentumDecay,
                      Variant::Extrapolation, Variant::MuonRef, Variant::OSGDMRef})
        EXPECT_EQ(variant_from_string(to_string(v)), v);
    EXPECT_EQ(corollary_from_string("C9"), Corollary::C9);
    EXPECT_THROW(corollary_from_string("C3"), std::invalid_argument);
}
