#pragma once

// Closed-form trust-region subproblem
//
//     x+ = argmin_x <m, x> + R(x)   s.t.   ||x - (1 - beta) x|| <= eta
//
// and the generalized stationarity residual ||grad + v||_* minimized over
// v in the subdifferential of R.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/vspace.hpp"

namespace ntr {

class UnsupportedPairError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InfeasiblePointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Regularizer {
    enum class Kind { None, ClipBall };

    Kind kind = Kind::None;
    NormKind clip_norm = NormKind::Infinity;
    double radius = 0.0;

    static Regularizer none() { return {}; }
    static Regularizer clip_ball(NormKind norm, double radius) {
        if (!(radius > 0.0)) throw std::invalid_argument("clip radius must be positive");
        return {Kind::ClipBall, norm, radius};
    }

    [[nodiscard]] bool is_none() const { return kind == Kind::None; }
};

struct TrustRegionSpec {
    NormGeometry geometry;
    Regularizer regularizer;
    double eta = 1.0;
    double beta = 0.0;

    void validate() const {
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
        if (regularizer.kind == Regularizer::Kind::ClipBall && !(regularizer.radius > 0.0)) {
            throw std::invalid_argument("clip radius must be positive");
        }
    }
};

namespace detail {

inline bool is_box_clip(const TrustRegionSpec& spec) {
    return spec.regularizer.kind == Regularizer::Kind::ClipBall &&
           spec.regularizer.clip_norm == NormKind::Infinity && spec.geometry.kind == NormKind::Infinity;
}

inline void require_supported(const TrustRegionSpec& spec) {
    if (spec.regularizer.is_none() || is_box_clip(spec)) return;
    throw UnsupportedPairError("no closed-form solver for clip_ball(" + to_string(spec.regularizer.clip_norm) +
                               ") under " + to_string(spec.geometry.kind) + " geometry");
}

}  // namespace detail

inline bool is_feasible(const Regularizer& reg, const ParamPoint& x) {
    if (reg.is_none()) return true;
    return primal_norm(NormGeometry::make(reg.clip_norm, x.shape()), x) <= reg.radius;
}

/// 0 inside dom R, +inf outside.
inline double regularizer_value(const Regularizer& reg, const ParamPoint& x) {
    return is_feasible(reg, x) ? 0.0 : std::numeric_limits<double>::infinity();
}

/// Diameter of dom R measured in the clip norm (infinite for R = 0).
inline double domain_diameter(const Regularizer& reg) {
    if (reg.is_none()) return std::numeric_limits<double>::infinity();
    return 2.0 * reg.radius;
}

inline ParamPoint tr_step(const TrustRegionSpec& spec, const ParamPoint& x, const ParamPoint& m,
                          const OrthConfig& cfg = {}) {
    spec.validate();
    require_same_shape(x, m);
    detail::require_supported(spec);
    if (!is_feasible(spec.regularizer, x)) throw InfeasiblePointError("starting point outside dom R");

    const double shrink = 1.0 - spec.beta;
    std::vector<double> out(x.size());
    if (spec.regularizer.is_none()) {
        const ParamPoint u = lmo(spec.geometry, m, cfg);
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = shrink * x[i] - spec.eta * u[i];
    } else {
        const double D = spec.regularizer.radius;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double sign = static_cast<double>((m[i] > 0.0) - (m[i] < 0.0));
            out[i] = std::clamp(shrink * x[i] - spec.eta * sign, -D, D);
        }
    }
    return {x.shape(), std::move(out)};
}

inline double stationarity_residual(const TrustRegionSpec& spec, const ParamPoint& x, const ParamPoint& grad) {
    require_same_shape(x, grad);
    detail::require_supported(spec);
    if (spec.regularizer.is_none()) return dual_norm(spec.geometry, grad);
    if (!is_feasible(spec.regularizer, x)) throw InfeasiblePointError("residual requested outside dom R");

    // Normal cone of the box is a product of half-lines at active faces.
    const double D = spec.regularizer.radius;
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double g = grad[i];
        if (x[i] >= D) {
            total += std::max(0.0, g);
        } else if (x[i] <= -D) {
            total += std::max(0.0, -g);
        } else {
            total += std::abs(g);
        }
    }
    return total;
}

struct ProxCheck {
    bool holds = false;
    double slack = 0.0;
};

/// Evaluates R(z) + <m, z - x+> - R(x+) - eta * ||m + r||_* with z = (1 - beta) x
/// and r in dR(x+) taken from the step's KKT system: r_i = -m_i exactly on
/// coordinates where the clip face, not the trust-region face, stops the step.
inline ProxCheck prox_inequality_check(const TrustRegionSpec& spec, const ParamPoint& x, const ParamPoint& x_plus,
                                       const ParamPoint& m) {
    require_same_shape(x, x_plus);
    require_same_shape(x, m);
    detail::require_supported(spec);

    const ParamPoint center = scale(1.0 - spec.beta, x);
    const double lin = inner(m, center) - inner(m, x_plus);
    const double r_center = regularizer_value(spec.regularizer, center);
    const double r_plus = regularizer_value(spec.regularizer, x_plus);

    std::vector<double> shifted(m.values());
    if (!spec.regularizer.is_none()) {
        const double D = spec.regularizer.radius;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const bool upper_face = x_plus[i] >= D && m[i] < 0.0;
            const bool lower_face = x_plus[i] <= -D && m[i] > 0.0;
            if (upper_face || lower_face) shifted[i] = 0.0;
        }
    }
    const double penalty = spec.eta * dual_norm(spec.geometry, ParamPoint(m.shape(), std::move(shifted)));
    const double slack = r_center + lin - r_plus - penalty;
    return {slack >= -1e-8, slack};
}

}  // namespace ntr
