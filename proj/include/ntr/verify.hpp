#pragma once

// Canned invariant suites behind `ntr verify`: geometry, trstep, lemmas and
// theorems. Every experiment uses fixed seeds, and reports carry no timings,
// so a report is a pure function of the code.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/harness.hpp"
#include "ntr/io.hpp"
#include "ntr/optimizers.hpp"
#include "ntr/problems.hpp"
#include "ntr/trstep.hpp"
#include "ntr/vspace.hpp"

namespace ntr {

struct CheckItem {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
    /// Wall time of the check body; not part of the formatted report.
    double seconds = 0.0;
};

struct VerifyReport {
    std::vector<CheckItem> items;
    /// Informational tables printed after the checks.
    std::vector<std::string> tables;

    [[nodiscard]] bool all_pass() const {
        return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
    }
};

struct VerifyOptions {
    int jobs = 1;
};

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> s{"geometry", "trstep", "lemmas", "theorems"};
    return s;
}

namespace vdetail {

using detail::RowMajorMatrix;

inline std::string kv(const std::string& k, double v) { return k + "=" + sci(v, 4); }

/// Runs a check body, turning exceptions into failures.
inline CheckItem check(const std::string& suite, const std::string& name,
                       const std::function<bool(std::string&)>& body) {
    CheckItem item{suite, name, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        item.pass = body(item.detail);
    } catch (const std::exception& e) {
        item.pass = false;
        item.detail = std::string("exception: ") + e.what();
    }
    item.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return item;
}

inline ParamPoint mat_to_point(const Eigen::MatrixXd& M) {
    std::vector<double> v(static_cast<std::size_t>(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) v[static_cast<std::size_t>(r * M.cols() + c)] = M(r, c);
    return {Shape::matrix(static_cast<std::size_t>(M.rows()), static_cast<std::size_t>(M.cols())), std::move(v)};
}

/// G = U diag(s) V^T with s drawn uniformly from [smin, smax].
inline ParamPoint conditioned_matrix(std::size_t m, std::size_t n, double smin, double smax, Rng& rng) {
    const auto U = detail::random_orthogonal(m, rng);
    const auto V = detail::random_orthogonal(n, rng);
    std::uniform_real_distribution<double> u(smin, smax);
    const std::size_t r = std::min(m, n);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < r; ++i) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = u(rng);
    return mat_to_point(U * S * V.transpose());
}

/// (G G^T)^{+/2} G through an eigendecomposition of G G^T.
inline ParamPoint orth_eigen_oracle(const ParamPoint& g, double rel_tol = 1e-10) {
    const auto G = detail::as_matrix(g);
    const Eigen::MatrixXd A = G * G.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd inv(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        const double lam = es.eigenvalues()(i);
        inv(i) = lam > rel_tol * top ? 1.0 / std::sqrt(lam) : 0.0;
    }
    const Eigen::MatrixXd P = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    return mat_to_point(P * G);
}

inline double max_abs_diff(const ParamPoint& a, const ParamPoint& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Frobenius distance between the Newton-Schulz and exact orthogonalizations.
inline double ns_distance(const ParamPoint& g, int steps) {
    OrthConfig cfg;
    cfg.method = OrthMethod::NewtonSchulz;
    cfg.ns_steps = steps;
    return euclid_norm(orth(g, cfg) - orth(g));
}

struct GeoCase {
    NormKind kind;
    Shape shape;
};

inline std::vector<GeoCase> geometry_cases() {
    return {{NormKind::Euclidean, Shape::vector(7)},     {NormKind::Infinity, Shape::vector(7)},
            {NormKind::Euclidean, Shape::matrix(4, 3)},  {NormKind::Infinity, Shape::matrix(4, 3)},
            {NormKind::Spectral, Shape::matrix(4, 3)},   {NormKind::Spectral, Shape::matrix(3, 5)},
            {NormKind::Spectral, Shape::matrix(5, 5)}};
}

// ---------------------------------------------------------------------------

inline void geometry_suite(VerifyReport& rep) {
    const std::string S = "geometry";
    const auto cases = geometry_cases();
    const int n = 200;

    rep.items.push_back(check(S, "lmo_attains_dual_norm", [&](std::string& d) {
        Rng rng(101);
        double worst = 0.0;
        for (const auto& c : cases) {
            const auto geo = NormGeometry::make(c.kind, c.shape);
            for (int t = 0; t < n; ++t) {
                const auto m = detail::random_normal(c.shape, rng);
                const double dn = dual_norm(geo, m);
                worst = std::max(worst, std::abs(inner(m, lmo(geo, m)) - dn) / std::max(1.0, dn));
            }
        }
        d = kv("max_rel_gap", worst);
        return worst <= 1e-10;
    }));

    rep.items.push_back(check(S, "lmo_in_unit_ball", [&](std::string& d) {
        Rng rng(102);
        double worst = 0.0;
        for (const auto& c : cases) {
            const auto geo = NormGeometry::make(c.kind, c.shape);
            for (int t = 0; t < n; ++t) {
                const auto m = detail::random_normal(c.shape, rng);
                worst = std::max(worst, std::abs(primal_norm(geo, lmo(geo, m)) - 1.0));
            }
        }
        d = kv("max_|norm-1|", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "holder_inequality", [&](std::string& d) {
        Rng rng(103);
        double worst = -1.0;
        for (const auto& c : cases) {
            const auto geo = NormGeometry::make(c.kind, c.shape);
            for (int t = 0; t < n; ++t) {
                const auto x = detail::random_normal(c.shape, rng);
                const auto y = detail::random_normal(c.shape, rng);
                const double bound = primal_norm(geo, x) * dual_norm(geo, y);
                worst = std::max(worst, (inner(x, y) - bound) / std::max(1.0, bound));
            }
        }
        d = kv("max_rel_excess", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "rho_equivalence", [&](std::string& d) {
        Rng rng(104);
        double worst = 0.0;
        for (const auto& c : cases) {
            const auto geo = NormGeometry::make(c.kind, c.shape);
            for (int t = 0; t < n; ++t) {
                const auto x = detail::random_normal(c.shape, rng);
                worst = std::max(worst, dual_norm(geo, x) / (geo.rho * euclid_norm(x)));
            }
        }
        d = kv("max_ratio", worst);
        return worst <= 1.0 + 1e-12;
    }));

    rep.items.push_back(check(S, "lmo_vs_sampled_ball", [&](std::string& d) {
        // 1000 samples from the boundary of each unit ball in low dimension
        Rng rng(109);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::bernoulli_distribution coin(0.5);
        double worst_excess = -1.0, worst_shortfall = 0.0;
        for (NormKind kind : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
            const Shape sh = kind == NormKind::Spectral ? Shape::matrix(2, 2) : Shape::vector(3);
            const auto geo = NormGeometry::make(kind, sh);
            for (int t = 0; t < 20; ++t) {
                const auto x = detail::random_normal(sh, rng);
                double best = -std::numeric_limits<double>::infinity();
                for (int i = 0; i < 1000; ++i) {
                    ParamPoint u = ParamPoint::zeros(sh);
                    if (kind == NormKind::Euclidean) {
                        const auto z = detail::random_normal(sh, rng);
                        u = scale(1.0 / euclid_norm(z), z);
                    } else if (kind == NormKind::Infinity) {
                        u = ParamPoint::vector({coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0, coin(rng) ? 1.0 : -1.0});
                    } else {
                        u = mat_to_point(detail::random_orthogonal(2, rng));
                    }
                    best = std::max(best, inner(x, u));
                }
                const double dn = dual_norm(geo, x);
                worst_excess = std::max(worst_excess, best - dn);
                worst_shortfall = std::max(worst_shortfall, (dn - best) / dn);
                worst_excess = std::max(worst_excess, std::abs(inner(x, lmo(geo, x)) - dn) - 1e-9);
            }
        }
        d = kv("max_excess", worst_excess) + " " + kv("max_rel_shortfall", worst_shortfall);
        return worst_excess <= 1e-9 && worst_shortfall <= 0.05;
    }));

    rep.items.push_back(check(S, "rho_witness_tight", [&](std::string& d) {
        double worst = 0.0;
        for (std::size_t dim : {1, 4, 9}) {
            const auto ones = ParamPoint::filled(Shape::vector(dim), 1.0);
            const auto geo = NormGeometry::make(NormKind::Infinity, ones.shape());
            worst = std::max(worst, std::abs(dual_norm(geo, ones) - geo.rho * euclid_norm(ones)));
        }
        for (auto [m, k] : {std::pair{4, 7}, std::pair{3, 3}, std::pair{5, 2}}) {
            RowMajorMatrix E = RowMajorMatrix::Identity(m, k);
            const auto x = detail::from_matrix(Shape::matrix(m, k), E);
            const auto geo = NormGeometry::make(NormKind::Spectral, x.shape());
            worst = std::max(worst, std::abs(dual_norm(geo, x) - geo.rho * euclid_norm(x)));
        }
        d = kv("max_gap", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "lmo_zero_and_sign_ties", [&](std::string& d) {
        bool ok = true;
        for (const auto& c : cases) {
            const auto geo = NormGeometry::make(c.kind, c.shape);
            const auto z = lmo(geo, ParamPoint::zeros(c.shape));
            ok = ok && z == ParamPoint::zeros(c.shape);
        }
        const auto s = lmo(NormGeometry::make(NormKind::Infinity, Shape::vector(3)), ParamPoint::vector({0.0, -2.0, 3.0}));
        ok = ok && s == ParamPoint::vector({0.0, -1.0, 1.0});
        d = ok ? "lmo(0)=0, sign(0)=0" : "mismatch";
        return ok;
    }));

    rep.items.push_back(check(S, "orth_matches_eigen_oracle", [&](std::string& d) {
        // The oracle squares the condition number, so the tolerance scales with kappa^2.
        Rng rng(105);
        double worst = 0.0;
        auto compare = [&](const ParamPoint& g, std::size_t rank) {
            const auto sv = singular_values(g);
            const double kappa = sv.front() / sv[rank - 1];
            worst = std::max(worst, max_abs_diff(orth(g), orth_eigen_oracle(g)) / (1e-12 * std::max(1.0, kappa * kappa)));
        };
        for (auto [m, k] : {std::pair{4, 3}, std::pair{3, 5}, std::pair{5, 5}, std::pair{2, 2}}) {
            for (int t = 0; t < 50; ++t) compare(detail::random_normal(Shape::matrix(m, k), rng), std::min(m, k));
        }
        // rank-deficient: product of thin factors
        for (int t = 0; t < 20; ++t) {
            const auto a = detail::random_normal(Shape::matrix(5, 2), rng);
            const auto b = detail::random_normal(Shape::matrix(2, 4), rng);
            const RowMajorMatrix P = detail::as_matrix(a) * detail::as_matrix(b);
            compare(detail::from_matrix(Shape::matrix(5, 4), P), 2);
        }
        d = kv("max_diff/(1e-12*kappa^2)", worst);
        return worst <= 1.0;
    }));

    rep.items.push_back(check(S, "orth_properties", [&](std::string& d) {
        Rng rng(106);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const auto g = detail::random_normal(Shape::matrix(4, 6), rng);
            const auto o = orth(g);
            for (double s : singular_values(o)) worst = std::max(worst, std::abs(s - 1.0));
            worst = std::max(worst, max_abs_diff(orth(o), o));
            const double nuc = dual_norm(NormGeometry::make(NormKind::Spectral, g.shape()), g);
            worst = std::max(worst, std::abs(inner(g, o) - nuc) / nuc);
        }
        d = kv("max_dev", worst);
        return worst <= 1e-10;
    }));

    rep.items.push_back(check(S, "newton_schulz_accuracy", [&](std::string& d) {
        Rng rng(107);
        double worst = 0.0;
        for (auto [m, k] : {std::pair{4, 4}, std::pair{3, 6}, std::pair{6, 3}}) {
            for (int t = 0; t < 20; ++t) {
                const auto g = conditioned_matrix(m, k, 0.1, 1.0, rng);
                worst = std::max(worst, ns_distance(g, 5));
            }
        }
        d = kv("max_frobenius_dist(5 steps, cond<=10)", worst);
        return worst <= 1e-2;
    }));

    rep.items.push_back(check(S, "newton_schulz_monotone", [&](std::string& d) {
        Rng rng(108);
        int violations = 0;
        for (int t = 0; t < 20; ++t) {
            const auto g = conditioned_matrix(4, 5, 0.1, 1.0, rng);
            double prev = ns_distance(g, 1);
            for (int s = 2; s <= 10; ++s) {
                const double e = ns_distance(g, s);
                if (e > prev + 1e-12) ++violations;
                prev = e;
            }
        }
        d = "violations=" + std::to_string(violations);
        return violations == 0;
    }));

    rep.items.push_back(check(S, "spectral_requires_matrix", [&](std::string& d) {
        try {
            (void)primal_norm(NormGeometry{NormKind::Spectral, 1.0}, ParamPoint::vector({1.0, 2.0}));
        } catch (const ShapeError&) {
            d = "ShapeError raised";
            return true;
        }
        d = "no error";
        return false;
    }));
}

// ---------------------------------------------------------------------------

/// Minimum of <m, x> over a finite candidate set.
inline double grid_min(const std::vector<ParamPoint>& pts, const ParamPoint& m) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, inner(m, p));
    return best;
}

/// Points covering the trust region around c for brute-force search:
/// Euclidean uses a fine angular grid of the sphere, the infinity ball (with
/// an optional box clip) a tensor grid that contains every vertex.
inline std::vector<ParamPoint> region_samples(NormKind kind, const ParamPoint& c, double eta, double clip) {
    const std::size_t d = c.size();
    std::vector<ParamPoint> out;
    if (kind == NormKind::Euclidean) {
        if (d == 1) {
            out.push_back(ParamPoint::vector({c[0] - eta}));
            out.push_back(ParamPoint::vector({c[0] + eta}));
        } else if (d == 2) {
            const int N = 200000;
            for (int i = 0; i < N; ++i) {
                const double th = 2.0 * std::numbers::pi * i / N;
                out.push_back(ParamPoint::vector({c[0] + eta * std::cos(th), c[1] + eta * std::sin(th)}));
            }
        } else {
            const int N1 = 600, N2 = 1200;
            for (int i = 0; i <= N1; ++i) {
                const double ph = std::numbers::pi * i / N1;
                for (int j = 0; j < N2; ++j) {
                    const double th = 2.0 * std::numbers::pi * j / N2;
                    out.push_back(ParamPoint::vector({c[0] + eta * std::sin(ph) * std::cos(th),
                                                      c[1] + eta * std::sin(ph) * std::sin(th),
                                                      c[2] + eta * std::cos(ph)}));
                }
            }
        }
        return out;
    }
    const int G = 21;
    std::vector<double> lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        lo[i] = std::max(c[i] - eta, -clip);
        hi[i] = std::min(c[i] + eta, clip);
    }
    std::vector<int> idx(d, 0);
    for (;;) {
        std::vector<double> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (G - 1);
        out.emplace_back(c.shape(), std::move(v));
        std::size_t p = 0;
        while (p < d && ++idx[p] == G) idx[p++] = 0;
        if (p == d) break;
    }
    return out;
}

inline void trstep_suite(VerifyReport& rep) {
    const std::string S = "trstep";

    rep.items.push_back(check(S, "spectral_step_is_orth_update", [&](std::string& d) {
        Rng rng(201);
        double worst = 0.0;
        for (double beta : {0.0, 0.3}) {
            for (int t = 0; t < 50; ++t) {
                const Shape sh = Shape::matrix(4, 3);
                const auto x = detail::random_normal(sh, rng), m = detail::random_normal(sh, rng);
                const TrustRegionSpec spec{NormGeometry::make(NormKind::Spectral, sh), Regularizer::none(), 0.2, beta};
                const auto ref = axpby(1.0 - beta, x, -0.2, orth(m));
                worst = std::max(worst, max_abs_diff(tr_step(spec, x, m), ref));
            }
        }
        d = kv("max_abs_diff", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "euclidean_step_is_normalized_gradient", [&](std::string& d) {
        Rng rng(202);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const Shape sh = Shape::vector(6);
            const auto x = detail::random_normal(sh, rng), m = detail::random_normal(sh, rng);
            const TrustRegionSpec spec{NormGeometry::make(NormKind::Euclidean, sh), Regularizer::none(), 0.3, 0.1};
            const auto ref = axpby(0.9, x, -0.3 / euclid_norm(m), m);
            worst = std::max(worst, max_abs_diff(tr_step(spec, x, m), ref));
        }
        d = kv("max_abs_diff", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "infinity_step_is_sign_update", [&](std::string& d) {
        Rng rng(203);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const Shape sh = Shape::vector(6);
            const auto x = detail::random_normal(sh, rng), m = detail::random_normal(sh, rng);
            const TrustRegionSpec spec{NormGeometry::make(NormKind::Infinity, sh), Regularizer::none(), 0.3, 0.0};
            std::vector<double> ref(6);
            for (std::size_t i = 0; i < 6; ++i) ref[i] = x[i] - 0.3 * (m[i] > 0 ? 1.0 : -1.0);
            worst = std::max(worst, max_abs_diff(tr_step(spec, x, m), ParamPoint(sh, ref)));
        }
        d = kv("max_abs_diff", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "brute_force_vector_subproblem", [&](std::string& d) {
        Rng rng(204);
        double worst = 0.0;
        int cases = 0;
        for (std::size_t dim = 1; dim <= 3; ++dim) {
            const Shape sh = Shape::vector(dim);
            for (int t = 0; t < 6; ++t) {
                const auto m = detail::random_normal(sh, rng);
                for (auto [kind, clip] : {std::pair{NormKind::Euclidean, 0.0}, std::pair{NormKind::Infinity, 0.0},
                                          std::pair{NormKind::Infinity, 1.0}}) {
                    ParamPoint x = detail::random_normal(sh, rng, 0.5);
                    Regularizer reg = Regularizer::none();
                    double bound = std::numeric_limits<double>::infinity();
                    if (clip > 0.0) {
                        reg = Regularizer::clip_ball(NormKind::Infinity, clip);
                        std::vector<double> v(x.values());
                        for (double& e : v) e = std::clamp(e, -clip, clip);
                        x = ParamPoint(sh, v);
                        bound = clip;
                    }
                    const double eta = 0.4, beta = t % 2 ? 0.2 : 0.0;
                    const TrustRegionSpec spec{NormGeometry::make(kind, sh), reg, eta, beta};
                    const auto xp = tr_step(spec, x, m);
                    const double brute = grid_min(region_samples(kind, scale(1.0 - beta, x), eta, bound), m);
                    worst = std::max(worst, std::abs(inner(m, xp) - brute));
                    ++cases;
                }
            }
        }
        d = "cases=" + std::to_string(cases) + " " + kv("max_gap", worst);
        return worst <= 1e-3;
    }));

    rep.items.push_back(check(S, "brute_force_spectral_2x2", [&](std::string& d) {
        // Extreme points of the 2x2 spectral ball are the orthogonal matrices.
        Rng rng(205);
        double worst = 0.0;
        const Shape sh = Shape::matrix(2, 2);
        const int N = 100000;
        for (int t = 0; t < 10; ++t) {
            const auto x = detail::random_normal(sh, rng), m = detail::random_normal(sh, rng);
            const double eta = 0.3;
            const TrustRegionSpec spec{NormGeometry::make(NormKind::Spectral, sh), Regularizer::none(), eta, 0.0};
            const auto xp = tr_step(spec, x, m);
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < N; ++i) {
                const double th = 2.0 * std::numbers::pi * i / N, c = std::cos(th), s = std::sin(th);
                best = std::max(best, inner(m, ParamPoint::matrix({{c, -s}, {s, c}})));
                best = std::max(best, inner(m, ParamPoint::matrix({{c, s}, {s, -c}})));
            }
            worst = std::max(worst, std::abs(inner(m, xp) - (inner(m, x) - eta * best)));
        }
        d = kv("max_gap", worst);
        return worst <= 1e-3;
    }));

    rep.items.push_back(check(S, "prox_inequality", [&](std::string& d) {
        Rng rng(206);
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 100; ++t) {
            const Shape vs = Shape::vector(5), ms = Shape::matrix(3, 4);
            const double beta = t % 2 ? 0.25 : 0.0;
            for (NormKind k : {NormKind::Euclidean, NormKind::Infinity}) {
                const auto x = detail::random_normal(vs, rng), m = detail::random_normal(vs, rng);
                const TrustRegionSpec spec{NormGeometry::make(k, vs), Regularizer::none(), 0.2, beta};
                worst = std::min(worst, prox_inequality_check(spec, x, tr_step(spec, x, m), m).slack);
            }
            {
                const auto x = detail::random_normal(ms, rng), m = detail::random_normal(ms, rng);
                const TrustRegionSpec spec{NormGeometry::make(NormKind::Spectral, ms), Regularizer::none(), 0.2, beta};
                worst = std::min(worst, prox_inequality_check(spec, x, tr_step(spec, x, m), m).slack);
            }
            {
                std::vector<double> v(5);
                std::uniform_real_distribution<double> u(-1.0, 1.0);
                for (double& e : v) e = u(rng);
                const ParamPoint x(vs, v);
                const auto m = detail::random_normal(vs, rng);
                const TrustRegionSpec spec{NormGeometry::make(NormKind::Infinity, vs),
                                           Regularizer::clip_ball(NormKind::Infinity, 1.0), 0.5, beta};
                worst = std::min(worst, prox_inequality_check(spec, x, tr_step(spec, x, m), m).slack);
            }
        }
        d = kv("min_slack", worst);
        return worst >= -1e-8;
    }));

    rep.items.push_back(check(S, "clip_feasibility", [&](std::string& d) {
        Rng rng(207);
        const Shape sh = Shape::vector(4);
        const Regularizer reg = Regularizer::clip_ball(NormKind::Infinity, 0.5);
        const TrustRegionSpec spec{NormGeometry::make(NormKind::Infinity, sh), reg, 0.7, 0.1};
        ParamPoint x = ParamPoint::zeros(sh);
        for (int t = 0; t < 200; ++t) {
            x = tr_step(spec, x, detail::random_normal(sh, rng));
            if (!is_feasible(reg, x)) {
                d = "left the domain";
                return false;
            }
        }
        try {
            (void)tr_step(spec, ParamPoint::filled(sh, 2.0), ParamPoint::filled(sh, 1.0));
        } catch (const InfeasiblePointError&) {
            d = "iterates feasible; infeasible start rejected";
            return true;
        }
        d = "infeasible start accepted";
        return false;
    }));

    rep.items.push_back(check(S, "residual_brute_force", [&](std::string& d) {
        Rng rng(208);
        double worst = 0.0;
        const double D = 1.0;
        for (std::size_t dim = 1; dim <= 3; ++dim) {
            const Shape sh = Shape::vector(dim);
            const TrustRegionSpec spec{NormGeometry::make(NormKind::Infinity, sh),
                                       Regularizer::clip_ball(NormKind::Infinity, D), 0.1, 0.0};
            std::uniform_int_distribution<int> face(-1, 1);
            std::uniform_real_distribution<double> u(-0.9, 0.9);
            for (int t = 0; t < 20; ++t) {
                std::vector<double> xv(dim);
                for (double& e : xv) {
                    const int f = face(rng);
                    e = f == 0 ? u(rng) : f * D;
                }
                const ParamPoint x(sh, xv);
                const auto g = detail::random_normal(sh, rng);
                // normal cone: v_i >= 0 at +D, v_i <= 0 at -D, 0 inside; grid each active coordinate
                const int G = 4001;
                std::vector<std::vector<double>> choices(dim);
                for (std::size_t i = 0; i < dim; ++i) {
                    if (std::abs(x[i]) < D) {
                        choices[i] = {0.0};
                        continue;
                    }
                    const double span = 2.0 * std::abs(g[i]) + 1.0;
                    for (int j = 0; j < G; ++j) choices[i].push_back((x[i] > 0 ? 1.0 : -1.0) * span * j / (G - 1));
                }
                // the l1 objective separates over coordinates
                double brute = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    double best = std::numeric_limits<double>::infinity();
                    for (double v : choices[i]) best = std::min(best, std::abs(g[i] + v));
                    brute += best;
                }
                worst = std::max(worst, std::abs(stationarity_residual(spec, x, g) - brute));
            }
        }
        d = kv("max_gap", worst);
        return worst <= 1e-3;
    }));

    rep.items.push_back(check(S, "unsupported_pair_rejected", [&](std::string& d) {
        const Shape sh = Shape::vector(3);
        const TrustRegionSpec spec{NormGeometry::make(NormKind::Euclidean, sh),
                                   Regularizer::clip_ball(NormKind::Infinity, 1.0), 0.1, 0.0};
        try {
            (void)tr_step(spec, ParamPoint::zeros(sh), ParamPoint::filled(sh, 1.0));
        } catch (const UnsupportedPairError&) {
            d = "UnsupportedPairError raised";
            return true;
        }
        d = "no error";
        return false;
    }));

    // Special-case reductions of the momentum variant, trajectory against a
    // directly coded reference.
    auto trajectory_gap = [](const Problem& p, const OptimizerConfig& cfg,
                             const std::function<ParamPoint(const ParamPoint&, ParamPoint&, const ParamPoint&)>& ref,
                             std::uint64_t seed) {
        const auto rec = run(cfg, p, seed, {true});
        Rng rng(seed);
        ParamPoint x = p.x0;
        ParamPoint m = noisy_oracle(p, p.sigma, x, rng);
        double worst = 0.0;
        for (int k = 0; k < cfg.K; ++k) {
            const auto g = noisy_oracle(p, p.sigma, x, rng);
            x = ref(x, m, g);
            worst = std::max(worst, max_abs_diff(x, rec.iterates[static_cast<std::size_t>(k) + 1]));
        }
        return worst;
    };

    rep.items.push_back(check(S, "momentum_reductions", [&](std::string& d) {
        const auto layer = make_matrix_layer(4, 3, 16, LossKind::Quadratic, 21).problem;
        Problem p = layer;
        p.sigma = 0.5;
        const double eta = 0.05, alpha = 0.3;
        OptimizerConfig cfg;
        cfg.variant = Variant::Momentum;
        cfg.eta = eta;
        cfg.alpha = alpha;
        cfg.K = 30;

        cfg.geometry = NormKind::Euclidean;
        const double ngd = trajectory_gap(
            p, cfg,
            [&](const ParamPoint& x, ParamPoint& m, const ParamPoint& g) {
                m = axpby(1 - alpha, m, alpha, g);
                return x - scale(eta / euclid_norm(m), m);
            },
            1);
        cfg.geometry = NormKind::Infinity;
        const double sgn = trajectory_gap(
            p, cfg,
            [&](const ParamPoint& x, ParamPoint& m, const ParamPoint& g) {
                m = axpby(1 - alpha, m, alpha, g);
                std::vector<double> v(x.values());
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= eta * ((m[i] > 0) - (m[i] < 0));
                return ParamPoint(x.shape(), v);
            },
            2);
        cfg.geometry = NormKind::Spectral;
        OptimizerConfig muon = cfg;
        muon.variant = Variant::MuonRef;
        const auto a = run(cfg, p, 3), b = run(muon, p, 3);
        bool bitwise = a.rows.size() == b.rows.size();
        for (std::size_t i = 0; bitwise && i < a.rows.size(); ++i) {
            bitwise = a.rows[i].F == b.rows[i].F && a.rows[i].x_norm == b.rows[i].x_norm;
        }
        d = kv("ngd_gap", ngd) + " " + kv("sign_gap", sgn) + " muon_bitwise=" + (bitwise ? "yes" : "no");
        return ngd <= 1e-12 && sgn <= 1e-12 && bitwise;
    }));

    rep.items.push_back(check(S, "degenerate_variants", [&](std::string& d) {
        Problem p = make_quadratic(Shape::vector(5), 5.0, 31);
        OptimizerConfig det;
        det.variant = Variant::DetTR;
        det.eta = 0.05;
        det.K = 40;
        OptimizerConfig mom = det;
        mom.variant = Variant::Momentum;
        mom.alpha = 1.0;
        const bool det_eq = same_trajectory_values(run(det, p, 4), run(mom, p, 4));
        p.sigma = 0.3;
        OptimizerConfig ext = mom;
        ext.variant = Variant::Extrapolation;
        ext.gamma = 1.0;
        const bool ext_eq = same_trajectory_values(run(mom, p, 5), run(ext, p, 5));
        d = std::string("sigma0_momentum_eq_dettr=") + (det_eq ? "yes" : "no") +
            " extrapolation_alpha1_gamma1_eq_momentum=" + (ext_eq ? "yes" : "no");
        return det_eq && ext_eq;
    }));
}

// ---------------------------------------------------------------------------

inline std::string report_detail(const BoundReport& r) {
    std::string s = kv("lhs", r.lhs) + " " + kv("rhs", r.rhs) + " " + kv("margin", r.margin) +
                    " seeds=" + std::to_string(r.seeds);
    if (r.worst_k >= 0) s += " worst_k=" + std::to_string(r.worst_k);
    return s;
}

inline CheckItem bound_item(const std::string& suite, const std::string& name, const BoundReport& r) {
    return {suite, name, r.holds, report_detail(r)};
}

inline Problem layer_problem(LossKind loss, double sigma, std::uint64_t seed = 7) {
    Problem p = make_matrix_layer(4, 4, 16, loss, seed).problem;
    p.sigma = sigma;
    return p;
}

inline Problem quadratic_problem(std::size_t d, double sigma, std::uint64_t seed = 11) {
    Problem p = make_quadratic(Shape::vector(d), 10.0, seed);
    p.sigma = sigma;
    return p;
}

/// Quadratic with minimizer strictly inside the box [-radius/2, radius/2].
inline Problem clipped_quadratic(std::size_t d, double radius, double sigma, std::uint64_t seed = 13) {
    Rng rng(seed + 1000);
    std::uniform_real_distribution<double> u(-0.5 * radius, 0.5 * radius);
    std::vector<double> xs(d);
    for (double& e : xs) e = u(rng);
    Problem p = make_quadratic(Shape::vector(d), 10.0, seed, ParamPoint(Shape::vector(d), xs));
    p.sigma = sigma;
    return p;
}

inline OptimizerConfig make_config(Variant v, NormKind geo, double eta, double alpha, double beta, int K) {
    OptimizerConfig c;
    c.variant = v;
    c.geometry = geo;
    c.eta = eta;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = 1.0 / alpha;
    c.K = K;
    return c;
}

inline void lemmas_suite(VerifyReport& rep, const VerifyOptions& opt) {
    const std::string S = "lemmas";
    const auto seeds20 = seed_range(0, 20);

    rep.items.push_back(check(S, "L2_momentum_error_envelope", [&](std::string& d) {
        const Problem p = layer_problem(LossKind::Quadratic, 1.0);
        const auto cfg = make_config(Variant::Momentum, NormKind::Spectral, 0.01, 0.1, 0.0, 200);
        const auto r = momentum_error_check(run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
        d = report_detail(r);
        return r.holds;
    }));

    rep.items.push_back(check(S, "L2_sigma0_per_run", [&](std::string& d) {
        const Problem p = layer_problem(LossKind::Quadratic, 0.0);
        const auto cfg = make_config(Variant::Momentum, NormKind::Spectral, 0.01, 0.1, 0.0, 200);
        const auto recs = run_seeds(cfg, p, seed_range(0, 3), opt.jobs);
        const double cap = *p.lipschitz(NormKind::Spectral) * cfg.eta / cfg.alpha;
        double worst = 0.0;
        for (const auto& r : recs)
            for (std::size_t k = 1; k < r.rows.size(); ++k) worst = std::max(worst, r.rows[k].momentum_err);
        const auto rep2 = momentum_error_check(recs, constants_for(p, cfg));
        d = kv("max_err", worst) + " " + kv("L*eta/alpha", cap);
        return worst <= cap && rep2.holds;
    }));

    rep.items.push_back(check(S, "L5_decay_momentum_error", [&](std::string& d) {
        const Problem p = quadratic_problem(10, 0.5);
        const double D = std::max(primal_norm(NormGeometry::make(NormKind::Euclidean, p.shape), *p.x_star), 1e-12);
        const auto cfg = make_config(Variant::MomentumDecay, NormKind::Euclidean, 0.01 * D, 0.1, 0.01, 300);
        const auto r = momentum_error_check(run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
        d = report_detail(r);
        return r.holds;
    }));

    rep.items.push_back(check(S, "L7_extrapolation_error", [&](std::string& d) {
        const Problem p = layer_problem(LossKind::Logistic, 0.5);
        const auto cfg = make_config(Variant::Extrapolation, NormKind::Spectral, 0.01, 0.1, 0.0, 200);
        const auto r = momentum_error_check(run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
        d = report_detail(r);
        return r.holds;
    }));

    rep.items.push_back(check(S, "L8_extrapolation_decay_error", [&](std::string& d) {
        const Problem p = layer_problem(LossKind::Logistic, 0.5);
        const double x0n = primal_norm(NormGeometry::make(NormKind::Spectral, p.shape), p.x0);
        const double beta = 0.01;
        auto cfg = make_config(Variant::Extrapolation, NormKind::Spectral, std::max(0.01, beta * x0n), 0.1, beta, 200);
        const auto r = momentum_error_check(run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
        d = report_detail(r);
        return r.holds;
    }));

    rep.items.push_back(check(S, "decay_iterates_bounded", [&](std::string& d) {
        const Problem p = quadratic_problem(10, 0.0);
        const auto geo = NormGeometry::make(NormKind::Infinity, p.shape);
        const double D = std::max(primal_norm(geo, p.x0), primal_norm(geo, *p.x_star));
        double worst_decay = 0.0, worst_step = 0.0;
        for (double beta : {0.01, 0.05, 0.2}) {
            const auto cfg = make_config(Variant::DetTRDecay, NormKind::Infinity, beta * D, 1.0, beta, 300);
            const auto r = run(cfg, p, 0);
            worst_decay = std::max(worst_decay, r.summary.max_decay_norm / cfg.eta);
            worst_step = std::max(worst_step, r.summary.max_step / (2.0 * cfg.eta));
        }
        d = kv("max beta||x||/eta", worst_decay) + " " + kv("max step/(2 eta)", worst_step);
        return worst_decay <= 1.0 + 1e-12 && worst_step <= 1.0 + 1e-12;
    }));

    rep.items.push_back(check(S, "deterministic_descent_inequality", [&](std::string& d) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const Problem& p : {quadratic_problem(10, 0.0), layer_problem(LossKind::Quadratic, 0.0),
                                 layer_problem(LossKind::Logistic, 0.0)}) {
            for (NormKind g : {NormKind::Euclidean, NormKind::Infinity, NormKind::Spectral}) {
                if (g == NormKind::Spectral && !p.shape.is_matrix()) continue;
                const auto L = p.lipschitz(g);
                if (!L) continue;
                const double eta = 0.1 / *L;
                const auto r = run(make_config(Variant::DetTR, g, eta, 1.0, 0.0, 200), p, 0);
                for (std::size_t k = 0; k + 1 < r.rows.size(); ++k) {
                    const double rhs = r.rows[k].F - eta * r.rows[k + 1].residual + 1.5 * *L * eta * eta;
                    worst = std::max(worst, (r.rows[k + 1].F - rhs) / std::max(1.0, std::abs(rhs)));
                }
            }
        }
        d = kv("max_rel_violation", worst);
        return worst <= 1e-12;
    }));

    rep.items.push_back(check(S, "smoothness_constants", [&](std::string& d) {
        double worst = 0.0;
        int pairs = 0;
        for (int inst = 0; inst < 10; ++inst) {
            const std::uint64_t s = 500 + static_cast<std::uint64_t>(inst);
            std::vector<std::pair<Problem, NormKind>> cases;
            const Problem q = make_quadratic(Shape::vector(5), 20.0, s);
            const Problem mq = make_matrix_layer(3, 4, 12, LossKind::Quadratic, s).problem;
            const Problem ml = make_matrix_layer(3, 4, 12, LossKind::Logistic, s).problem;
            for (NormKind g : {NormKind::Euclidean, NormKind::Infinity}) cases.emplace_back(q, g);
            for (NormKind g : {NormKind::Euclidean, NormKind::Spectral}) {
                cases.emplace_back(mq, g);
                cases.emplace_back(ml, g);
            }
            for (const auto& [p, g] : cases) {
                const int trials = p.name == "quadratic" ? 2000 : 10000;
                worst = std::max(worst, estimate_L(p, g, trials, s) / *p.lipschitz(g));
                pairs += trials;
            }
        }
        d = "pairs=" + std::to_string(pairs) + " " + kv("max_estimate/analytic", worst);
        return worst <= 1.0 + 1e-9;
    }));

    rep.items.push_back(check(S, "hessian_lipschitz_logistic", [&](std::string& d) {
        double worst = 0.0;
        for (int inst = 0; inst < 10; ++inst) {
            const Problem ml = make_matrix_layer(3, 4, 12, LossKind::Logistic, 600 + inst).problem;
            for (NormKind g : {NormKind::Euclidean, NormKind::Spectral}) {
                worst = std::max(worst, estimate_H(ml, g, 300, inst) / *ml.hessian_lipschitz(g));
            }
        }
        d = kv("max_estimate/analytic", worst);
        return worst <= 1.0 + 1e-3;
    }));

    rep.items.push_back(check(S, "gradient_finite_differences", [&](std::string& d) {
        double worst = 0.0;
        Rng rng(301);
        for (const Problem& p : {make_quadratic(Shape::vector(6), 10.0, 2), make_quadratic(Shape::matrix(2, 3), 4.0, 3),
                                 make_matrix_layer(3, 4, 10, LossKind::Quadratic, 4).problem,
                                 make_matrix_layer(3, 4, 10, LossKind::Logistic, 5).problem}) {
            for (int t = 0; t < 5; ++t) {
                const auto x = p.x0 + detail::random_normal(p.shape, rng);
                const auto g = p.gradient(x);
                std::vector<double> fd(x.size());
                const double h = 1e-6;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    std::vector<double> a(x.values()), b(x.values());
                    a[i] += h;
                    b[i] -= h;
                    fd[i] = (p.value(ParamPoint(x.shape(), a)) - p.value(ParamPoint(x.shape(), b))) / (2 * h);
                }
                const ParamPoint f(x.shape(), fd);
                worst = std::max(worst, euclid_norm(f - g) / std::max(1.0, euclid_norm(g)));
            }
        }
        d = kv("max_rel_err", worst);
        return worst <= 1e-5;
    }));

    rep.items.push_back(check(S, "star_convexity", [&](std::string& d) {
        double worst = -std::numeric_limits<double>::infinity();
        Rng rng(302);
        std::uniform_real_distribution<double> ub(0.0, 1.0);
        for (const Problem& p : {quadratic_problem(10, 0.0), layer_problem(LossKind::Quadratic, 0.0)}) {
            if (!p.star_convex || !p.x_star) return false;
            const double fs = *p.F_star;
            for (int t = 0; t < 1000; ++t) {
                const auto x = p.x0 + detail::random_normal(p.shape, rng, 2.0);
                const double b = ub(rng);
                const double lhs = p.value(axpby(1 - b, x, b, *p.x_star));
                const double rhs = (1 - b) * p.value(x) + b * fs;
                worst = std::max(worst, lhs - rhs);
            }
        }
        d = kv("max_violation", worst);
        return worst <= 1e-10;
    }));
}

// ---------------------------------------------------------------------------

inline std::string comparison_text(const ComparisonTable& t) {
    std::string s = "muon_vs_osgdm\n";
    s += "algorithm  sigma     eta       mean_final_residual  mean_min_residual  momentum_err@k=0,K/4,K/2,3K/4,K-1\n";
    for (const auto& r : t.rows) {
        char head[160];
        std::snprintf(head, sizeof head, "%-10s %-9s %-9s %-20s %-18s ", r.algorithm.c_str(), fixed(r.sigma, 4).c_str(),
                      fixed(r.eta, 4).c_str(), sci(r.mean_final_residual, 6).c_str(),
                      sci(r.mean_min_residual, 6).c_str());
        s += head;
        const std::size_t K = r.momentum_err_trace.size();
        for (std::size_t q = 0; q <= 4; ++q) {
            const std::size_t k = q == 4 ? K - 1 : q * K / 4;
            s += (q ? "," : "") + sci(r.momentum_err_trace[k], 4);
        }
        s += '\n';
    }
    return s;
}

inline std::string comparison_csv(const ComparisonTable& t) {
    std::string s = "algorithm,sigma,eta,alpha,seeds,mean_final_residual,mean_min_residual,k,momentum_err\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.momentum_err_trace.size(); ++k) {
            s += r.algorithm + ',' + format_double(r.sigma) + ',' + format_double(r.eta) + ',' +
                 format_double(r.alpha) + ',' + std::to_string(r.final_residual.size()) + ',' +
                 format_double(r.mean_final_residual) + ',' + format_double(r.mean_min_residual) + ',' +
                 std::to_string(k) + ',' + format_double(r.momentum_err_trace[k]) + '\n';
        }
    }
    return s;
}

inline ComparisonTable standard_comparison(int jobs = 1) {
    const Problem p = layer_problem(LossKind::Quadratic, 0.0);
    const std::vector<double> sigmas{0.0, 0.5}, etas{0.01, 0.05};
    return muon_vs_osgdm(p, sigmas, etas, 0.1, 200, seed_range(0, 10), {}, jobs);
}

inline void theorems_suite(VerifyReport& rep, const VerifyOptions& opt, ComparisonTable* table_out = nullptr) {
    const std::string S = "theorems";
    const auto seeds20 = seed_range(0, 20);
    auto push = [&](const std::string& name, const std::function<BoundReport()>& f) {
        rep.items.push_back(check(S, name, [&](std::string& d) {
            const auto r = f();
            d = report_detail(r);
            return r.holds;
        }));
    };

    for (const auto& [name, problem, geo] :
         {std::tuple{std::string("T1_quadratic_d10"), quadratic_problem(10, 0.0), NormKind::Euclidean},
          std::tuple{std::string("T1_matrix_layer_4x4"), layer_problem(LossKind::Quadratic, 0.0), NormKind::Spectral}}) {
        push(name, [&, p = problem, g = geo] {
            const double L = *p.lipschitz(g);
            const auto cfg = make_config(Variant::DetTR, g, 0.1 / L, 1.0, 0.0, 1000);
            const auto r = run(cfg, p, 0);
            return check_bound(TheoremId::T1, std::vector{r}, constants_for(p, cfg));
        });
    }

    push("T2_momentum_C2_eps0.5", [&] {
        const Problem p = layer_problem(LossKind::Quadratic, 1.0);
        auto cfg = make_config(Variant::Momentum, NormKind::Spectral, 1.0, 1.0, 0.0, 1);
        const auto s = schedule(Corollary::C2, schedule_inputs(p, cfg, 0.5));
        cfg.eta = s.eta;
        cfg.alpha = s.alpha;
        cfg.K = s.K;
        return check_bound(TheoremId::T2, run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
    });

    rep.items.push_back(check(S, "T4_decay_C4_eps0.1", [&](std::string& d) {
        const Problem p = quadratic_problem(10, 0.0);
        auto cfg = make_config(Variant::DetTRDecay, NormKind::Euclidean, 1.0, 1.0, 0.5, 1);
        const auto s = schedule(Corollary::C4, schedule_inputs(p, cfg, 0.1));
        cfg.eta = s.eta;
        cfg.beta = s.beta;
        cfg.K = s.K;
        const auto r = run(cfg, p, 0);
        const auto rep4 = check_bound(TheoremId::T4, std::vector{r}, constants_for(p, cfg));
        const bool iterates = r.summary.max_decay_norm <= cfg.eta * (1.0 + 1e-12) &&
                              r.summary.max_step <= 2.0 * cfg.eta * (1.0 + 1e-12);
        d = report_detail(rep4) + " " + kv("max beta||x||/eta", r.summary.max_decay_norm / cfg.eta) + " " +
            kv("max step/(2 eta)", r.summary.max_step / (2.0 * cfg.eta));
        return rep4.holds && iterates;
    }));

    push("T5_momentum_decay", [&] {
        const Problem p = quadratic_problem(10, 0.5);
        const double D = std::max(primal_norm(NormGeometry::make(NormKind::Euclidean, p.shape), *p.x_star), 1e-12);
        const auto cfg = make_config(Variant::MomentumDecay, NormKind::Euclidean, 0.01 * D, 0.1, 0.01, 1000);
        return check_bound(TheoremId::T5, run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
    });

    push("T6_extrapolation_logistic", [&] {
        const Problem p = layer_problem(LossKind::Logistic, 0.5);
        const auto cfg = make_config(Variant::Extrapolation, NormKind::Spectral, 0.01, 0.1, 0.0, 500);
        return check_bound(TheoremId::T6, run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
    });

    push("T7_extrapolation_decay", [&] {
        const Problem p = quadratic_problem(10, 0.5);
        const double D = std::max(primal_norm(NormGeometry::make(NormKind::Euclidean, p.shape), *p.x_star), 1e-12);
        const auto cfg = make_config(Variant::Extrapolation, NormKind::Euclidean, 0.01 * D, 0.1, 0.01, 1000);
        return check_bound(TheoremId::T7, run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
    });

    push("T8_D_clipped_C8_eps0.1", [&] {
        const Problem p = clipped_quadratic(10, 1.0, 0.0);
        auto cfg = make_config(Variant::DetTR, NormKind::Infinity, 1.0, 1.0, 0.0, 1);
        cfg.regularizer = Regularizer::clip_ball(NormKind::Infinity, 1.0);
        const auto s = schedule(Corollary::C8, schedule_inputs(p, cfg, 0.1));
        cfg.eta = s.eta;
        cfg.K = s.K;
        return check_bound(TheoremId::T8_D, std::vector{run(cfg, p, 0)}, constants_for(p, cfg));
    });

    push("T9_D_clipped_momentum", [&] {
        const Problem p = clipped_quadratic(10, 1.0, 0.5);
        auto cfg = make_config(Variant::Momentum, NormKind::Infinity, 0.002, 0.1, 0.0, 2000);
        cfg.regularizer = Regularizer::clip_ball(NormKind::Infinity, 1.0);
        return check_bound(TheoremId::T9_D, run_seeds(cfg, p, seeds20, opt.jobs), constants_for(p, cfg));
    });

    rep.items.push_back(check(S, "muon_vs_osgdm_table", [&](std::string& d) {
        const ComparisonTable a = standard_comparison(opt.jobs);
        const ComparisonTable b = standard_comparison(1);
        const bool same = comparison_csv(a) == comparison_csv(b);
        // sigma = 0, alpha = 1, M0 = 0: both updates take the same first step
        const Problem p = layer_problem(LossKind::Quadratic, 0.0);
        OptimizerState s0{0, p.x0, ParamPoint::zeros(p.shape), p.x0};
        const auto g = p.gradient(p.x0);
        const double first = max_abs_diff(muon_ref_step(s0, g, 0.05, 1.0).x, osgdm_ref_step(s0, g, 0.05, 1.0).x);
        d = "rows=" + std::to_string(a.rows.size()) + " deterministic=" + (same ? "yes" : "no") + " " +
            kv("first_step_gap", first);
        rep.tables.push_back(comparison_text(a));
        if (table_out) *table_out = a;
        return same && !a.rows.empty() && first <= 1e-15;
    }));
}

}  // namespace vdetail

/// Runs one suite ("geometry", "trstep", "lemmas", "theorems") or "all".
inline VerifyReport run_verify(const std::string& suite, const VerifyOptions& opt = {},
                               ComparisonTable* table_out = nullptr) {
    VerifyReport rep;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "geometry") {
        vdetail::geometry_suite(rep);
        known = true;
    }
    if (all || suite == "trstep") {
        vdetail::trstep_suite(rep);
        known = true;
    }
    if (all || suite == "lemmas") {
        vdetail::lemmas_suite(rep, opt);
        known = true;
    }
    if (all || suite == "theorems") {
        vdetail::theorems_suite(rep, opt, table_out);
        known = true;
    }
    if (!known) throw std::invalid_argument("unknown verify suite '" + suite + "'");
    return rep;
}

inline std::string format_report(const VerifyReport& rep) {
    std::string s;
    int passed = 0;
    for (const auto& c : rep.items) {
        s += std::string(c.pass ? "PASS" : "FAIL") + "  " + c.suite + "/" + c.name + "  " + c.detail + "\n";
        passed += c.pass ? 1 : 0;
    }
    for (const auto& t : rep.tables) s += "\n" + t;
    s += "\n" + std::to_string(passed) + "/" + std::to_string(rep.items.size()) + " checks passed\n";
    return s;
}

}  // namespace ntr
