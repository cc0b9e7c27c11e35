#pragma once

// Trust-region optimizer family as pure state-transition functions.
//
//   DetTR / DetTRDecay : x+ = TR(x, grad f(x)) with center x or (1 - beta) x
//   Momentum           : m+ = (1 - alpha) m + alpha g(x);   x+ = TR(x, m+)
//   MomentumDecay      : same with the shifted center (1 - beta) x
//   Extrapolation      : m+ = (1 - alpha) m + alpha g(xbar); x+ = TR(x, m+);
//                        xbar+ = x + gamma (x+ - x)
//   MuonRef            : M+ = (1 - alpha) M + alpha G;      X+ = X - eta orth(M+)
//   OSGDMRef           : M+ = (1 - alpha) M + alpha orth(G); X+ = X - eta M+
//
// The caller evaluates the stochastic gradient at gradient_point(config, state).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/trstep.hpp"
#include "ntr/vspace.hpp"

namespace ntr {

enum class Variant { DetTR, DetTRDecay, Momentum, MomentumDecay, Extrapolation, MuonRef, OSGDMRef };

inline std::string to_string(Variant v) {
    switch (v) {
        case Variant::DetTR: return "det_tr";
        case Variant::DetTRDecay: return "det_tr_decay";
        case Variant::Momentum: return "momentum";
        case Variant::MomentumDecay: return "momentum_decay";
        case Variant::Extrapolation: return "extrapolation";
        case Variant::MuonRef: return "muon_ref";
        case Variant::OSGDMRef: return "osgdm_ref";
    }
    return "?";
}

inline Variant variant_from_string(const std::string& s) {
    for (Variant v : {Variant::DetTR, Variant::DetTRDecay, Variant::Momentum, Variant::MomentumDecay,
                      Variant::Extrapolation, Variant::MuonRef, Variant::OSGDMRef}) {
        if (to_string(v) == s) return v;
    }
    throw std::invalid_argument("unknown variant '" + s + "'");
}

inline bool is_deterministic(Variant v) { return v == Variant::DetTR || v == Variant::DetTRDecay; }
inline bool is_reference(Variant v) { return v == Variant::MuonRef || v == Variant::OSGDMRef; }

struct OptimizerConfig {
    Variant variant = Variant::DetTR;
    double eta = 0.1;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    int K = 100;
    NormKind geometry = NormKind::Euclidean;
    Regularizer regularizer;
    OrthConfig orth;

    [[nodiscard]] TrustRegionSpec tr_spec(const Shape& shape) const {
        return {NormGeometry::make(geometry, shape), regularizer, eta, beta};
    }

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate(const Shape& shape) const {
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
        if (K < 1) throw std::invalid_argument("K must be a positive integer");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
        if (variant == Variant::Extrapolation && !(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
        if ((variant == Variant::DetTR || variant == Variant::Momentum || is_reference(variant)) && beta != 0.0) {
            throw std::invalid_argument(to_string(variant) + " has no weight decay; beta must be 0");
        }
        if ((variant == Variant::DetTRDecay || variant == Variant::MomentumDecay) && beta == 0.0) {
            throw std::invalid_argument(to_string(variant) + " requires beta > 0");
        }
        if (geometry == NormKind::Spectral && !shape.is_matrix()) {
            throw ShapeError("spectral geometry requires a matrix shape");
        }
        if (is_reference(variant) && (geometry != NormKind::Spectral || !regularizer.is_none())) {
            throw std::invalid_argument(to_string(variant) + " requires spectral geometry and no regularizer");
        }
        orth.validate();
        tr_spec(shape).validate();
        if (!regularizer.is_none() && !detail::is_box_clip(tr_spec(shape))) {
            throw UnsupportedPairError("no closed-form solver for clip_ball(" + to_string(regularizer.clip_norm) +
                                       ") under " + to_string(geometry) + " geometry");
        }
    }

    /// Non-fatal deviations from the hypotheses of the convergence results.
    [[nodiscard]] std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        if (variant == Variant::Extrapolation && std::abs(gamma * alpha - 1.0) > 1e-12) {
            out.push_back("extrapolation with gamma != 1/alpha (gamma=" + std::to_string(gamma) +
                          ", 1/alpha=" + std::to_string(1.0 / alpha) + "); convergence bounds assume gamma = 1/alpha");
        }
        return out;
    }
};

struct OptimizerState {
    int k = 0;
    ParamPoint x;
    ParamPoint m;
    ParamPoint x_bar;
};

inline OptimizerState init(const OptimizerConfig& config, const ParamPoint& x0, const ParamPoint& g0) {
    require_same_shape(x0, g0);
    if (!is_feasible(config.regularizer, x0)) throw InfeasiblePointError("x0 outside dom R");
    OptimizerState s{0, x0, g0, x0};
    if (config.variant == Variant::OSGDMRef) s.m = orth(g0, config.orth);
    return s;
}

inline const ParamPoint& gradient_point(const OptimizerConfig& config, const OptimizerState& state) {
    return config.variant == Variant::Extrapolation ? state.x_bar : state.x;
}

inline OptimizerState muon_ref_step(const OptimizerState& state, const ParamPoint& G, double eta, double alpha,
                                    const OrthConfig& cfg = {}) {
    OptimizerState next = state;
    next.m = axpby(1.0 - alpha, state.m, alpha, G);
    const ParamPoint O = orth(next.m, cfg);
    std::vector<double> x(state.x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = state.x[i] - eta * O[i];
    next.x = ParamPoint(state.x.shape(), std::move(x));
    next.x_bar = next.x;
    next.k = state.k + 1;
    return next;
}

inline OptimizerState osgdm_ref_step(const OptimizerState& state, const ParamPoint& G, double eta, double alpha,
                                     const OrthConfig& cfg = {}) {
    OptimizerState next = state;
    const ParamPoint O = orth(G, cfg);
    next.m = axpby(1.0 - alpha, state.m, alpha, O);
    std::vector<double> x(state.x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = state.x[i] - eta * next.m[i];
    next.x = ParamPoint(state.x.shape(), std::move(x));
    next.x_bar = next.x;
    next.k = state.k + 1;
    return next;
}

/// One iteration. g is the (stochastic) gradient at gradient_point(config, state).
inline OptimizerState step(const OptimizerConfig& config, const OptimizerState& state, const ParamPoint& g) {
    switch (config.variant) {
        case Variant::MuonRef: return muon_ref_step(state, g, config.eta, config.alpha, config.orth);
        case Variant::OSGDMRef: return osgdm_ref_step(state, g, config.eta, config.alpha, config.orth);
        default: break;
    }
    const TrustRegionSpec spec = config.tr_spec(state.x.shape());
    OptimizerState next = state;
    next.m = is_deterministic(config.variant) ? g : axpby(1.0 - config.alpha, state.m, config.alpha, g);
    next.x = tr_step(spec, state.x, next.m, config.orth);
    if (config.variant == Variant::Extrapolation) {
        // (1 - gamma) x + gamma x+ keeps gamma = 1 exact: xbar+ == x+.
        next.x_bar = axpby(1.0 - config.gamma, state.x, config.gamma, next.x);
    } else {
        next.x_bar = next.x;
    }
    next.k = state.k + 1;
    return next;
}

// ---------------------------------------------------------------------------
// Parameter schedules from the complexity corollaries. Every O(.) constant is
// 1; every log factor hidden in a tilde-O is ceil(ln(1/eps) + 1), floored at 1.

enum class Corollary { C1, C2, C4, C5, C6, C7, C8, C9 };

inline std::string to_string(Corollary c) {
    switch (c) {
        case Corollary::C1: return "C1";
        case Corollary::C2: return "C2";
        case Corollary::C4: return "C4";
        case Corollary::C5: return "C5";
        case Corollary::C6: return "C6";
        case Corollary::C7: return "C7";
        case Corollary::C8: return "C8";
        case Corollary::C9: return "C9";
    }
    return "?";
}

inline Corollary corollary_from_string(const std::string& s) {
    for (Corollary c : {Corollary::C1, Corollary::C2, Corollary::C4, Corollary::C5, Corollary::C6, Corollary::C7,
                        Corollary::C8, Corollary::C9}) {
        if (to_string(c) == s) return c;
    }
    throw std::invalid_argument("unknown corollary '" + s + "'");
}

struct ScheduleInputs {
    std::optional<double> eps, L, H, sigma, rho, delta0, D;
};

struct Schedule {
    double eta = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    double gamma = 1.0;
    int K = 1;
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, Corollary c, bool allow_zero = false) {
    if (!v) throw std::invalid_argument("schedule " + to_string(c) + " requires input '" + name + "'");
    if (allow_zero ? !(*v >= 0.0) : !(*v > 0.0)) {
        throw std::invalid_argument(std::string("schedule input '") + name + "' must be " +
                                    (allow_zero ? "non-negative" : "positive"));
    }
    return *v;
}

inline double min_of(std::initializer_list<double> xs) { return std::min(xs); }
inline double max_of(std::initializer_list<double> xs) { return std::max(xs); }

inline int iteration_count(double k) {
    if (!std::isfinite(k)) throw std::invalid_argument("schedule produced an unbounded iteration count");
    // Absorb one ulp of rounding so that exact integers are not bumped up.
    const double rounded = std::ceil(k * (1.0 - 1e-12));
    if (rounded > static_cast<double>(std::numeric_limits<int>::max())) {
        throw std::invalid_argument("schedule produced an iteration count beyond int range");
    }
    return std::max(1, static_cast<int>(rounded));
}

inline double log_factor(double eps) { return std::max(1.0, std::ceil(std::log(1.0 / eps) + 1.0)); }

}  // namespace detail

inline Schedule schedule(Corollary c, const ScheduleInputs& in) {
    using detail::max_of;
    using detail::min_of;
    using detail::need;
    const double eps = need(in.eps, "eps", c);
    Schedule s;
    switch (c) {
        case Corollary::C1: {
            const double L = need(in.L, "L", c), d0 = need(in.delta0, "delta0", c);
            s.eta = eps / L;
            s.K = detail::iteration_count(L * d0 / (eps * eps));
            break;
        }
        case Corollary::C2: {
            const double L = need(in.L, "L", c), d0 = need(in.delta0, "delta0", c);
            const double rs = need(in.rho, "rho", c) * need(in.sigma, "sigma", c, true);
            const double e2 = eps * eps, e3 = e2 * eps, e4 = e3 * eps;
            s.eta = min_of({eps / L, e3 / (rs * rs * L)});
            s.alpha = min_of({1.0, e2 / (rs * rs)});
            s.K = detail::iteration_count(
                max_of({rs / eps, rs * rs * rs / e3, L * d0 / e2, L * d0 * rs * rs / e4}));
            break;
        }
        case Corollary::C4: {
            const double L = need(in.L, "L", c), D = need(in.D, "D", c);
            s.beta = min_of({1.0, eps / (L * D * D)});
            s.eta = s.beta * D;
            s.K = detail::iteration_count(max_of({1.0, L * D * D / eps}) * detail::log_factor(eps));
            break;
        }
        case Corollary::C5: {
            const double L = need(in.L, "L", c), D = need(in.D, "D", c);
            const double rs = need(in.rho, "rho", c) * need(in.sigma, "sigma", c, true);
            const double e3 = eps * eps * eps, Drs = D * rs;
            s.alpha = min_of({1.0, eps * eps / (Drs * Drs)});
            s.beta = min_of({1.0, eps / (L * D * D), eps / Drs, e3 / (Drs * Drs * Drs), e3 / (L * D * Drs * Drs)});
            s.eta = s.beta * D;
            s.K = detail::iteration_count(
                max_of({1.0, L * D * D / eps, Drs / eps, Drs * Drs * Drs / e3, L * D * Drs * Drs / e3}) *
                detail::log_factor(eps));
            break;
        }
        case Corollary::C6: {
            const double L = need(in.L, "L", c), H = need(in.H, "H", c, true), d0 = need(in.delta0, "delta0", c);
            const double rs = need(in.rho, "rho", c) * need(in.sigma, "sigma", c, true);
            const double sH = std::sqrt(H);
            s.eta = min_of({eps / L, std::sqrt(eps / H), std::pow(eps, 2.5) / (rs * rs * sH)});
            s.alpha = min_of({1.0, eps * eps / (rs * rs)});
            s.gamma = 1.0 / s.alpha;
            s.K = detail::iteration_count(max_of({rs / eps, rs * rs * rs / (eps * eps * eps), L * d0 / (eps * eps),
                                                  sH * d0 / std::pow(eps, 1.5),
                                                  sH * d0 * rs * rs / std::pow(eps, 3.5)}) *
                                          detail::log_factor(eps));
            break;
        }
        case Corollary::C7: {
            const double L = need(in.L, "L", c), H = need(in.H, "H", c, true), D = need(in.D, "D", c);
            const double rs = need(in.rho, "rho", c) * need(in.sigma, "sigma", c, true);
            const double sH = std::sqrt(H), Drs = D * rs;
            s.alpha = min_of({1.0, eps * eps / (Drs * Drs)});
            s.beta = min_of({1.0, eps / (L * D * D), s.alpha * eps / Drs,
                             s.alpha * std::sqrt(eps) / (sH * std::pow(D, 1.5))});
            s.eta = s.beta * D;
            s.gamma = 1.0 / s.alpha;
            s.K = detail::iteration_count(max_of({1.0, Drs / eps, Drs * Drs * Drs / (eps * eps * eps),
                                                  L * D * D / eps, sH * std::pow(D, 1.5) / std::sqrt(eps),
                                                  sH * std::pow(D, 3.5) * rs * rs / std::pow(eps, 2.5)}) *
                                          detail::log_factor(eps));
            break;
        }
        case Corollary::C8: {
            const double L = need(in.L, "L", c), D = need(in.D, "D", c);
            s.eta = eps / (L * D);
            s.K = detail::iteration_count(max_of({1.0, L * D * D / eps}) * detail::log_factor(eps));
            break;
        }
        case Corollary::C9: {
            const double L = need(in.L, "L", c), D = need(in.D, "D", c);
            const double rs = need(in.rho, "rho", c) * need(in.sigma, "sigma", c, true);
            const double e3 = eps * eps * eps;
            s.eta = min_of({eps / (L * D), eps / rs, e3 / (D * D * rs * rs * rs), e3 / (L * D * D * D * rs * rs)});
            s.alpha = min_of({1.0, eps * eps / (D * D * rs * rs)});
            s.K = detail::iteration_count(max_of({1.0, L * D * D / eps, D * rs / eps, D * D * D * rs * rs * rs / e3,
                                                  L * D * D * D * D * rs * rs / e3}) *
                                          detail::log_factor(eps));
            break;
        }
    }
    return s;
}

}  // namespace ntr
