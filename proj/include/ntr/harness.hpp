#pragma once

// Seeded experiment runner, trajectory records, and evaluators for the
// convergence bounds and momentum-error envelopes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/optimizers.hpp"
#include "ntr/problems.hpp"
#include "ntr/trstep.hpp"
#include "ntr/vspace.hpp"

namespace ntr {

struct RunRow {
    int k = 0;
    double F = 0.0;
    double residual = 0.0;
    double x_norm = 0.0;
    /// ||m_k - grad f(x_{k-1})||_* for k >= 1, ||m_0 - grad f(x_0)||_* for k = 0.
    double momentum_err = 0.0;
    double wall_ms = 0.0;
};

struct RunSummary {
    double min_residual = 0.0;  // over k = 1..K
    double final_F = 0.0;
    std::optional<double> final_gap;  // F(x_K) - F*
    double max_step = 0.0;            // max ||x_{k+1} - x_k||
    double max_decay_norm = 0.0;      // max beta ||x_k||
    double min_prox_slack = std::numeric_limits<double>::infinity();
    std::map<std::string, double> bounds;

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunRecord {
    OptimizerConfig config;
    std::string problem;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<RunRow> rows;
    RunSummary summary;
    std::vector<ParamPoint> iterates;  // filled when RunOptions::keep_iterates
};

struct RunOptions {
    bool keep_iterates = false;
};

/// Row metrics excluding wall time.
inline bool same_trajectory_values(const RunRecord& a, const RunRecord& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& r = a.rows[i];
        const auto& s = b.rows[i];
        if (r.k != s.k || r.F != s.F || r.residual != s.residual || r.x_norm != s.x_norm ||
            r.momentum_err != s.momentum_err)
            return false;
    }
    return true;
}

/// Rows (excluding wall time) and summary, for reproducibility comparisons.
inline bool same_trajectory(const RunRecord& a, const RunRecord& b) {
    return same_trajectory_values(a, b) && a.summary == b.summary;
}

// ---------------------------------------------------------------------------
// Bound formulas.

enum class TheoremId { T1, T2, T4, T5, T6, T7, T8_D, T9_D };

inline std::string to_string(TheoremId t) {
    switch (t) {
        case TheoremId::T1: return "T1";
        case TheoremId::T2: return "T2";
        case TheoremId::T4: return "T4";
        case TheoremId::T5: return "T5";
        case TheoremId::T6: return "T6";
        case TheoremId::T7: return "T7";
        case TheoremId::T8_D: return "T8_D";
        case TheoremId::T9_D: return "T9_D";
    }
    return "?";
}

inline bool is_stochastic(TheoremId t) {
    return !(t == TheoremId::T1 || t == TheoremId::T4 || t == TheoremId::T8_D);
}

/// Stationarity bounds take Delta_0 = F(x0) - inf F; function-value bounds
/// take gap0 = F(x0) - F(x*).
namespace bounds {

inline double t1(double delta0, double eta, int K, double L) { return delta0 / (eta * K) + 1.5 * L * eta; }

inline double t2(double delta0, double eta, int K, double L, double rho_sigma, double alpha) {
    return delta0 / (eta * K) + 2.0 * rho_sigma / (alpha * K) + 2.0 * std::sqrt(alpha) * rho_sigma + 3.5 * L * eta +
           2.0 * L * eta / alpha;
}

inline double t4(double gap0, double beta, int K, double L, double eta) {
    return std::pow(1.0 - beta, K) * gap0 + 4.0 * L * eta * eta / beta;
}

inline double t5(double gap0, double beta, int K, double L, double eta, double rho_sigma, double alpha) {
    return std::pow(1.0 - beta, K) * gap0 + 2.0 * eta * rho_sigma * (1.0 / alpha + std::sqrt(alpha) / beta) +
           4.0 * L * eta * eta / beta * (1.0 + 1.0 / alpha);
}

inline double t6(double delta0, double eta, int K, double L, double H, double rho_sigma, double alpha) {
    return delta0 / (eta * K) + 3.5 * L * eta + H * eta * eta / (alpha * alpha) + 2.0 * rho_sigma / (alpha * K) +
           2.0 * std::sqrt(alpha) * rho_sigma;
}

inline double t7(double gap0, double beta, int K, double L, double H, double eta, double rho_sigma, double alpha) {
    return std::pow(1.0 - beta, K) * gap0 + 2.0 * eta * rho_sigma * (1.0 / alpha + std::sqrt(alpha) / beta) +
           4.0 * L * eta * eta / beta + 4.0 * H * eta * eta * eta / (alpha * alpha * beta);
}

inline double t8(double gap0, double D, double eta, int K, double L) {
    return std::pow(D / (eta + D), K) * gap0 + 1.5 * L * D * eta;
}

inline double t9(double gap0, double D, double eta, int K, double L, double rho_sigma, double alpha) {
    return std::pow(D / (eta + D), K) * gap0 + 2.0 * std::sqrt(alpha) * D * rho_sigma +
           2.0 * eta * rho_sigma / alpha + 1.5 * L * D * eta + 2.0 * L * D * eta / alpha;
}

/// Momentum-error envelope E||m_{k+1} - grad f(x_k)||_* <= lemma(k).
/// drift is L eta / alpha (momentum), 2 L eta / alpha (momentum with decay),
/// H eta^2 / (2 alpha^2) (extrapolation, beta = 0) or 2 H eta^2 / alpha^2 (beta > 0).
inline double momentum_envelope(int k, double alpha, double rho_sigma, double drift) {
    return std::pow(1.0 - alpha, k + 1) * rho_sigma + std::sqrt(alpha) * rho_sigma + drift;
}

}  // namespace bounds

struct BoundConstants {
    std::optional<double> L, H, sigma, rho, delta0, D, F_star, x0_norm, x_star_norm, F0;
};

/// Constants from the problem's analytic data under the config's geometry.
inline BoundConstants constants_for(const Problem& p, const OptimizerConfig& cfg) {
    const NormGeometry geo = NormGeometry::make(cfg.geometry, p.shape);
    BoundConstants c;
    c.L = p.lipschitz(cfg.geometry);
    c.H = p.hessian_lipschitz(cfg.geometry);
    c.sigma = p.sigma;
    c.rho = geo.rho;
    c.F0 = p.value(p.x0) + regularizer_value(cfg.regularizer, p.x0);
    c.delta0 = *c.F0 - p.F_lower;
    c.F_star = p.F_star;
    c.x0_norm = primal_norm(geo, p.x0);
    if (p.x_star) c.x_star_norm = primal_norm(geo, *p.x_star);
    if (!cfg.regularizer.is_none()) c.D = domain_diameter(cfg.regularizer);
    return c;
}

/// The bound whose hypotheses match this configuration, if any.
inline std::optional<TheoremId> applicable_theorem(const OptimizerConfig& cfg, bool star_convex) {
    const bool clip = !cfg.regularizer.is_none();
    switch (cfg.variant) {
        case Variant::DetTR:
            if (clip) return star_convex ? std::optional(TheoremId::T8_D) : std::nullopt;
            return TheoremId::T1;
        case Variant::Momentum:
            if (clip) return star_convex ? std::optional(TheoremId::T9_D) : std::nullopt;
            return TheoremId::T2;
        case Variant::DetTRDecay: return star_convex ? std::optional(TheoremId::T4) : std::nullopt;
        case Variant::MomentumDecay: return star_convex ? std::optional(TheoremId::T5) : std::nullopt;
        case Variant::Extrapolation:
            if (cfg.beta == 0.0) return TheoremId::T6;
            return star_convex ? std::optional(TheoremId::T7) : std::nullopt;
        case Variant::MuonRef: return TheoremId::T2;
        case Variant::OSGDMRef: return std::nullopt;
    }
    return std::nullopt;
}

namespace detail {

inline double need_const(const std::optional<double>& v, const char* name, const std::string& who) {
    if (!v) throw std::invalid_argument(who + " requires constant '" + name + "'");
    return *v;
}

}  // namespace detail

/// Right-hand side of a theorem for one configuration.
inline double theorem_rhs(TheoremId t, const OptimizerConfig& cfg, const BoundConstants& c) {
    using detail::need_const;
    const std::string who = to_string(t);
    const double eta = cfg.eta, alpha = cfg.alpha, beta = cfg.beta;
    const int K = cfg.K;
    const double L = need_const(c.L, "L", who);
    auto rho_sigma = [&] { return need_const(c.rho, "rho", who) * need_const(c.sigma, "sigma", who); };
    auto gap0 = [&] { return need_const(c.F0, "F0", who) - need_const(c.F_star, "F_star", who); };
    switch (t) {
        case TheoremId::T1: return bounds::t1(need_const(c.delta0, "delta0", who), eta, K, L);
        case TheoremId::T2: return bounds::t2(need_const(c.delta0, "delta0", who), eta, K, L, rho_sigma(), alpha);
        case TheoremId::T4: return bounds::t4(gap0(), beta, K, L, eta);
        case TheoremId::T5: return bounds::t5(gap0(), beta, K, L, eta, rho_sigma(), alpha);
        case TheoremId::T6:
            return bounds::t6(need_const(c.delta0, "delta0", who), eta, K, L, need_const(c.H, "H", who), rho_sigma(),
                              alpha);
        case TheoremId::T7: return bounds::t7(gap0(), beta, K, L, need_const(c.H, "H", who), eta, rho_sigma(), alpha);
        case TheoremId::T8_D: return bounds::t8(gap0(), need_const(c.D, "D", who), eta, K, L);
        case TheoremId::T9_D: return bounds::t9(gap0(), need_const(c.D, "D", who), eta, K, L, rho_sigma(), alpha);
    }
    throw std::invalid_argument("unknown theorem");
}

// ---------------------------------------------------------------------------
// Runner.

inline RunRecord run(const OptimizerConfig& config, const Problem& problem, std::uint64_t seed,
                     const RunOptions& options = {}) {
    config.validate(problem.shape);
    const TrustRegionSpec spec = config.tr_spec(problem.shape);
    const NormGeometry& geo = spec.geometry;
    const bool reference = is_reference(config.variant);
    const bool deterministic = is_deterministic(config.variant);
    using Clock = std::chrono::steady_clock;

    Rng rng(seed);
    RunRecord rec;
    rec.config = config;
    rec.problem = problem.name;
    rec.sigma = problem.sigma;
    rec.seed = seed;
    rec.rows.reserve(static_cast<std::size_t>(config.K) + 1);

    const ParamPoint& x0 = problem.x0;
    ParamPoint grad = problem.gradient(x0);
    const ParamPoint g0 = deterministic ? grad : noisy_oracle(problem, problem.sigma, x0, rng);
    OptimizerState state = init(config, x0, g0);

    auto objective = [&](const ParamPoint& x) { return problem.value(x) + regularizer_value(config.regularizer, x); };

    rec.rows.push_back({0, objective(x0), stationarity_residual(spec, x0, grad), primal_norm(geo, x0),
                        dual_norm(geo, state.m - grad), 0.0});
    if (options.keep_iterates) rec.iterates.push_back(x0);

    RunSummary& sum = rec.summary;
    sum.max_decay_norm = config.beta * rec.rows[0].x_norm;
    sum.min_residual = std::numeric_limits<double>::infinity();

    for (int k = 0; k < config.K; ++k) {
        const auto t0 = Clock::now();
        const ParamPoint& at = gradient_point(config, state);
        const ParamPoint g = deterministic ? grad : noisy_oracle(problem, problem.sigma, at, rng);
        OptimizerState next = step(config, state, g);
        const double wall = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

        if (!reference) {
            sum.min_prox_slack =
                std::min(sum.min_prox_slack, prox_inequality_check(spec, state.x, next.x, next.m).slack);
        }
        sum.max_step = std::max(sum.max_step, primal_norm(geo, next.x - state.x));

        const double m_err = dual_norm(geo, next.m - grad);
        grad = problem.gradient(next.x);
        RunRow row{k + 1, objective(next.x), stationarity_residual(spec, next.x, grad), primal_norm(geo, next.x),
                   m_err, wall};
        sum.min_residual = std::min(sum.min_residual, row.residual);
        sum.max_decay_norm = std::max(sum.max_decay_norm, config.beta * row.x_norm);
        rec.rows.push_back(row);
        if (options.keep_iterates) rec.iterates.push_back(next.x);
        state = std::move(next);
    }

    sum.final_F = rec.rows.back().F;
    if (problem.F_star) sum.final_gap = sum.final_F - *problem.F_star;
    if (auto t = applicable_theorem(config, problem.star_convex)) {
        try {
            sum.bounds[to_string(*t)] = theorem_rhs(*t, config, constants_for(problem, config));
        } catch (const std::invalid_argument&) {
            // constants unavailable for this problem; bound omitted
        }
    }
    return rec;
}

/// Runs one seed per task on up to `jobs` threads; output order follows seeds.
inline std::vector<RunRecord> run_seeds(const OptimizerConfig& config, const Problem& problem,
                                        std::span<const std::uint64_t> seeds, int jobs = 1,
                                        const RunOptions& options = {}) {
    std::vector<RunRecord> out(seeds.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, seeds.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = run(config, problem, seeds[i], options);
        return out;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard lock(mu);
                    if (next >= seeds.size() || error) return;
                    i = next++;
                }
                try {
                    out[i] = run(config, problem, seeds[i], options);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
    return s;
}

// ---------------------------------------------------------------------------
// Bound checks.

struct BoundReport {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double margin = 0.0;  // rhs - lhs
    int seeds = 0;
    int worst_k = -1;  // momentum envelopes: iteration with the smallest margin
};

namespace detail {

inline bool within(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-9) + 1e-12; }

inline void require_uniform(std::span<const RunRecord> records) {
    if (records.empty()) throw std::invalid_argument("no run records supplied");
    const auto& c0 = records.front().config;
    for (const auto& r : records) {
        const auto& c = r.config;
        if (c.variant != c0.variant || c.eta != c0.eta || c.alpha != c0.alpha || c.beta != c0.beta ||
            c.gamma != c0.gamma || c.K != c0.K || c.geometry != c0.geometry)
            throw std::invalid_argument("run records mix different configurations");
    }
}

inline void require_hypotheses(TheoremId t, const OptimizerConfig& cfg, const BoundConstants& c) {
    const std::string who = to_string(t);
    auto variant_is = [&](std::initializer_list<Variant> vs) {
        for (Variant v : vs)
            if (cfg.variant == v) return;
        throw std::invalid_argument(who + " does not apply to variant " + to_string(cfg.variant));
    };
    const bool clip = !cfg.regularizer.is_none();
    switch (t) {
        case TheoremId::T1: variant_is({Variant::DetTR}); break;
        case TheoremId::T2: variant_is({Variant::Momentum, Variant::MuonRef}); break;
        case TheoremId::T4: variant_is({Variant::DetTRDecay}); break;
        case TheoremId::T5: variant_is({Variant::MomentumDecay}); break;
        case TheoremId::T6:
            variant_is({Variant::Extrapolation});
            if (cfg.beta != 0.0) throw std::invalid_argument("T6 requires beta = 0");
            break;
        case TheoremId::T7: variant_is({Variant::Extrapolation}); break;
        case TheoremId::T8_D:
            variant_is({Variant::DetTR});
            if (!clip) throw std::invalid_argument("T8_D requires a bounded domain (clip regularizer)");
            break;
        case TheoremId::T9_D:
            variant_is({Variant::Momentum});
            if (!clip) throw std::invalid_argument("T9_D requires a bounded domain (clip regularizer)");
            break;
    }
    if (t == TheoremId::T6 || t == TheoremId::T7) {
        if (std::abs(cfg.gamma * cfg.alpha - 1.0) > 1e-12) throw std::invalid_argument(who + " requires gamma = 1/alpha");
    }
    if (t == TheoremId::T4 || t == TheoremId::T5 || t == TheoremId::T7) {
        const double need = cfg.beta * std::max(need_const(c.x0_norm, "x0_norm", who),
                                                need_const(c.x_star_norm, "x_star_norm", who));
        if (cfg.eta < need * (1.0 - 1e-12)) {
            throw std::invalid_argument(who + " requires eta >= beta * max(||x0||, ||x*||)");
        }
    }
}

}  // namespace detail

inline BoundReport check_bound(TheoremId t, std::span<const RunRecord> records, const BoundConstants& c) {
    detail::require_uniform(records);
    const OptimizerConfig& cfg = records.front().config;
    detail::require_hypotheses(t, cfg, c);
    const bool stochastic = is_stochastic(t);
    if (stochastic && records.size() < 20) {
        throw std::invalid_argument(to_string(t) + " needs at least 20 seeds, got " + std::to_string(records.size()));
    }
    const bool stationarity = t == TheoremId::T1 || t == TheoremId::T2 || t == TheoremId::T6;
    auto lhs_of = [&](const RunRecord& r) {
        if (stationarity) return r.summary.min_residual;
        return r.summary.final_F - detail::need_const(c.F_star, "F_star", to_string(t));
    };

    BoundReport rep;
    rep.id = to_string(t);
    rep.seeds = static_cast<int>(records.size());
    rep.rhs = theorem_rhs(t, cfg, c);
    if (stochastic) {
        double s = 0.0;
        for (const auto& r : records) s += lhs_of(r);
        rep.lhs = s / static_cast<double>(records.size());
    } else {
        rep.lhs = -std::numeric_limits<double>::infinity();
        for (const auto& r : records) rep.lhs = std::max(rep.lhs, lhs_of(r));
    }
    rep.holds = detail::within(rep.lhs, rep.rhs);
    rep.margin = rep.rhs - rep.lhs;
    return rep;
}

inline std::string momentum_lemma_id(const OptimizerConfig& cfg) {
    switch (cfg.variant) {
        case Variant::Momentum:
        case Variant::MuonRef: return "L2";
        case Variant::MomentumDecay: return "L5";
        case Variant::Extrapolation: return cfg.beta == 0.0 ? "L7" : "L8";
        default: throw std::invalid_argument("no momentum-error lemma for variant " + to_string(cfg.variant));
    }
}

/// Per-k envelope check. With sigma = 0 every run is checked individually;
/// otherwise the across-seed mean at each k is compared (>= 20 seeds).
inline BoundReport momentum_error_check(std::span<const RunRecord> records, const BoundConstants& c) {
    detail::require_uniform(records);
    const OptimizerConfig& cfg = records.front().config;
    const std::string id = momentum_lemma_id(cfg);
    const double sigma = detail::need_const(c.sigma, "sigma", id);
    const double rho_sigma = detail::need_const(c.rho, "rho", id) * sigma;
    const bool deterministic = sigma == 0.0;
    if (!deterministic && records.size() < 20) {
        throw std::invalid_argument(id + " needs at least 20 seeds, got " + std::to_string(records.size()));
    }
    double drift = 0.0;
    const double eta = cfg.eta, alpha = cfg.alpha;
    if (id == "L2") drift = detail::need_const(c.L, "L", id) * eta / alpha;
    if (id == "L5") drift = 2.0 * detail::need_const(c.L, "L", id) * eta / alpha;
    if (id == "L7") drift = detail::need_const(c.H, "H", id) * eta * eta / (2.0 * alpha * alpha);
    if (id == "L8") drift = 2.0 * detail::need_const(c.H, "H", id) * eta * eta / (alpha * alpha);

    BoundReport rep;
    rep.id = id;
    rep.seeds = static_cast<int>(records.size());
    rep.holds = true;
    rep.margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.K; ++k) {
        const double rhs = bounds::momentum_envelope(k, alpha, rho_sigma, drift);
        double lhs = 0.0;
        if (deterministic) {
            lhs = -std::numeric_limits<double>::infinity();
            for (const auto& r : records) lhs = std::max(lhs, r.rows[k + 1].momentum_err);
        } else {
            for (const auto& r : records) lhs += r.rows[k + 1].momentum_err;
            lhs /= static_cast<double>(records.size());
        }
        if (!detail::within(lhs, rhs)) rep.holds = false;
        if (rhs - lhs < rep.margin) {
            rep.margin = rhs - lhs;
            rep.lhs = lhs;
            rep.rhs = rhs;
            rep.worst_k = k;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Muon vs Orthogonal-SGDM.

struct ComparisonRow {
    std::string algorithm;  // "muon" or "osgdm"
    double sigma = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    std::vector<double> final_residual;  // per seed
    double mean_final_residual = 0.0;
    double mean_min_residual = 0.0;
    std::vector<double> momentum_err_trace;  // seed-mean ||M_{k+1} - grad F(X_k)||_*, k = 0..K-1
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

/// Both reference updates over a shared (sigma, eta) grid with shared seeds,
/// hence identical noise draws for the two algorithms.
inline ComparisonTable muon_vs_osgdm(const Problem& problem, std::span<const double> sigmas,
                                     std::span<const double> etas, double alpha, int K,
                                     std::span<const std::uint64_t> seeds, const OrthConfig& orth_cfg = {},
                                     int jobs = 1) {
    if (!problem.shape.is_matrix()) throw ShapeError("muon_vs_osgdm requires a matrix-shaped problem");
    ComparisonTable table;
    for (double sigma : sigmas) {
        Problem p = problem;
        p.sigma = sigma;
        for (double eta : etas) {
            for (Variant v : {Variant::MuonRef, Variant::OSGDMRef}) {
                OptimizerConfig cfg;
                cfg.variant = v;
                cfg.geometry = NormKind::Spectral;
                cfg.eta = eta;
                cfg.alpha = alpha;
                cfg.K = K;
                cfg.orth = orth_cfg;
                const auto recs = run_seeds(cfg, p, seeds, jobs);
                ComparisonRow row;
                row.algorithm = v == Variant::MuonRef ? "muon" : "osgdm";
                row.sigma = sigma;
                row.eta = eta;
                row.alpha = alpha;
                row.momentum_err_trace.assign(static_cast<std::size_t>(K), 0.0);
                for (const auto& r : recs) {
                    row.final_residual.push_back(r.rows.back().residual);
                    row.mean_final_residual += r.rows.back().residual;
                    row.mean_min_residual += r.summary.min_residual;
                    for (int k = 0; k < K; ++k) row.momentum_err_trace[k] += r.rows[k + 1].momentum_err;
                }
                const double n = static_cast<double>(recs.size());
                row.mean_final_residual /= n;
                row.mean_min_residual /= n;
                for (double& e : row.momentum_err_trace) e /= n;
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

}  // namespace ntr
