#pragma once

// Norm geometries: primal norm, its dual, the linear maximization oracle over
// the primal unit ball, and the norm-equivalence constant rho with
// ||x||_* <= rho * ||x||_2.
//
//   Euclidean : ||.||_2        / ||.||_2        / m / ||m||_2       / rho = 1
//   Infinity  : ||.||_inf      / ||.||_1        / sign(m)           / rho = sqrt(d)
//   Spectral  : sigma_max      / nuclear        / orth(m)           / rho = sqrt(min(m, n))

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntr/vspace.hpp"

namespace ntr {

enum class NormKind { Euclidean, Infinity, Spectral };

inline std::string to_string(NormKind k) {
    switch (k) {
        case NormKind::Euclidean: return "euclidean";
        case NormKind::Infinity: return "infinity";
        case NormKind::Spectral: return "spectral";
    }
    return "?";
}

inline NormKind norm_kind_from_string(const std::string& s) {
    if (s == "euclidean") return NormKind::Euclidean;
    if (s == "infinity") return NormKind::Infinity;
    if (s == "spectral") return NormKind::Spectral;
    throw std::invalid_argument("unknown norm kind '" + s + "'");
}

inline double rho_constant(NormKind kind, const Shape& shape) {
    switch (kind) {
        case NormKind::Euclidean: return 1.0;
        case NormKind::Infinity: return std::sqrt(static_cast<double>(shape.size()));
        case NormKind::Spectral:
            if (!shape.is_matrix()) throw ShapeError("spectral geometry requires a matrix shape");
            return std::sqrt(static_cast<double>(std::min(shape.rows, shape.cols)));
    }
    throw std::invalid_argument("invalid norm kind");
}

struct NormGeometry {
    NormKind kind = NormKind::Euclidean;
    double rho = 1.0;

    static NormGeometry make(NormKind kind, const Shape& shape) { return {kind, rho_constant(kind, shape)}; }
};

enum class OrthMethod { ExactSVD, NewtonSchulz };

struct OrthConfig {
    OrthMethod method = OrthMethod::ExactSVD;
    int ns_steps = 5;
    /// Singular values below rank_tol * sigma_max are treated as zero.
    double rank_tol = 1e-10;
    /// Quintic coefficients (a, b, c) of X <- aX + (b A + c A^2) X, A = X X^T,
    /// used for the first ns_warm_steps iterations (the Muon kernel triple).
    std::array<double, 3> ns_coefficients{3.4445, -4.7750, 2.0315};
    int ns_warm_steps = 1;
    /// Quintic for the remaining iterations: fixed point 1, and no singular
    /// value in (0, 1.06] moves further from 1, so the error never grows.
    std::array<double, 3> ns_polish_coefficients{2.4, -2.25, 0.85};

    void validate() const {
        if (ns_steps < 1) throw std::invalid_argument("ns_steps must be >= 1");
        if (ns_warm_steps < 0) throw std::invalid_argument("ns_warm_steps must be >= 0");
        if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw std::invalid_argument("rank_tol must lie in (0, 1)");
    }
};

namespace detail {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const RowMajorMatrix> as_matrix(const ParamPoint& p) {
    return {p.data().data(), static_cast<Eigen::Index>(p.shape().rows),
            static_cast<Eigen::Index>(p.shape().cols)};
}

inline ParamPoint from_matrix(const Shape& shape, const RowMajorMatrix& m) {
    return {shape, std::vector<double>(m.data(), m.data() + m.size())};
}

inline void require_matrix(const ParamPoint& p, const char* what) {
    if (!p.shape().is_matrix()) throw ShapeError(std::string(what) + " requires a matrix shape");
}

inline void require_kind_shape(NormKind kind, const ParamPoint& p) {
    if (kind == NormKind::Spectral) require_matrix(p, "spectral geometry");
}

inline ParamPoint orth_svd(const ParamPoint& g, double rank_tol) {
    const auto G = as_matrix(g);
    Eigen::JacobiSVD<RowMajorMatrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    RowMajorMatrix out = RowMajorMatrix::Zero(G.rows(), G.cols());
    if (s.size() == 0 || s(0) == 0.0) return from_matrix(g.shape(), out);
    const double cutoff = rank_tol * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff) out.noalias() += svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
    }
    return from_matrix(g.shape(), out);
}

inline ParamPoint orth_newton_schulz(const ParamPoint& g, const OrthConfig& cfg) {
    RowMajorMatrix X = as_matrix(g);
    const double fro = X.norm();
    if (fro == 0.0) return g;
    const bool transposed = X.rows() > X.cols();
    if (transposed) X.transposeInPlace();
    X /= fro;
    for (int step = 0; step < cfg.ns_steps; ++step) {
        const auto& c = step < cfg.ns_warm_steps ? cfg.ns_coefficients : cfg.ns_polish_coefficients;
        const RowMajorMatrix A = X * X.transpose();
        const RowMajorMatrix B = c[1] * A + c[2] * (A * A);
        X = c[0] * X + B * X;
    }
    if (transposed) X.transposeInPlace();
    return from_matrix(g.shape(), X);
}

}  // namespace detail

/// Singular values in non-increasing order.
inline std::vector<double> singular_values(const ParamPoint& x) {
    detail::require_matrix(x, "singular_values");
    Eigen::JacobiSVD<detail::RowMajorMatrix> svd(detail::as_matrix(x));
    const auto& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

inline double primal_norm(const NormGeometry& g, const ParamPoint& x) {
    detail::require_kind_shape(g.kind, x);
    switch (g.kind) {
        case NormKind::Euclidean: return euclid_norm(x);
        case NormKind::Infinity: {
            double m = 0.0;
            for (double v : x.data()) m = std::max(m, std::abs(v));
            return m;
        }
        case NormKind::Spectral: {
            const auto s = singular_values(x);
            return s.empty() ? 0.0 : s.front();
        }
    }
    throw std::invalid_argument("invalid norm kind");
}

inline double dual_norm(const NormGeometry& g, const ParamPoint& x) {
    detail::require_kind_shape(g.kind, x);
    switch (g.kind) {
        case NormKind::Euclidean: return euclid_norm(x);
        case NormKind::Infinity: {
            double s = 0.0;
            for (double v : x.data()) s += std::abs(v);
            return s;
        }
        case NormKind::Spectral: {
            double s = 0.0;
            for (double v : singular_values(x)) s += v;
            return s;
        }
    }
    throw std::invalid_argument("invalid norm kind");
}

/// (G G^T)^{+/2} G: every nonzero singular value replaced by 1.
inline ParamPoint orth(const ParamPoint& g, const OrthConfig& cfg = {}) {
    detail::require_matrix(g, "orth");
    cfg.validate();
    if (cfg.method == OrthMethod::NewtonSchulz) return detail::orth_newton_schulz(g, cfg);
    return detail::orth_svd(g, cfg.rank_tol);
}

/// argmax of <m, u> over the primal unit ball. Ties: sign(0) = 0 for the
/// infinity ball; zero input gives zero output for every geometry.
inline ParamPoint lmo(const NormGeometry& g, const ParamPoint& m, const OrthConfig& cfg = {}) {
    detail::require_kind_shape(g.kind, m);
    switch (g.kind) {
        case NormKind::Euclidean: {
            const double n = euclid_norm(m);
            if (n == 0.0) return ParamPoint::zeros(m.shape());
            return scale(1.0 / n, m);
        }
        case NormKind::Infinity: {
            std::vector<double> out(m.size());
            for (std::size_t i = 0; i < m.size(); ++i) out[i] = static_cast<double>((m[i] > 0.0) - (m[i] < 0.0));
            return {m.shape(), std::move(out)};
        }
        case NormKind::Spectral: return orth(m, cfg);
    }
    throw std::invalid_argument("invalid norm kind");
}

}  // namespace ntr
