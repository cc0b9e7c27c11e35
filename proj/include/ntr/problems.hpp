#pragma once

// Synthetic objectives with exact gradients, an isotropic Gaussian stochastic
// oracle, and smoothness constants per geometry.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/vspace.hpp"

namespace ntr {

using Rng = std::mt19937_64;

struct Problem {
    std::string name;
    Shape shape;
    std::function<double(const ParamPoint&)> value;
    std::function<ParamPoint(const ParamPoint&)> gradient;
    /// Default starting point.
    ParamPoint x0;
    /// Euclidean noise level: E||g - grad f||_2^2 = sigma^2.
    double sigma = 0.0;

    /// Upper bounds on the gradient (L) and Hessian (H) Lipschitz constants
    /// measured as ||.||_* against ||.|| of the keyed geometry.
    std::map<NormKind, double> L;
    std::map<NormKind, double> H;
    std::optional<ParamPoint> x_star;
    std::optional<double> F_star;
    /// Lower bound on inf f, so F(x0) - F_lower bounds Delta_0 from above.
    double F_lower = 0.0;
    bool star_convex = false;

    [[nodiscard]] std::optional<double> lipschitz(NormKind k) const {
        if (auto it = L.find(k); it != L.end()) return it->second;
        return std::nullopt;
    }
    [[nodiscard]] std::optional<double> hessian_lipschitz(NormKind k) const {
        if (auto it = H.find(k); it != H.end()) return it->second;
        return std::nullopt;
    }
};

/// grad f(x) plus N(0, sigma^2 / d) noise per coordinate, so that the squared
/// Euclidean noise norm has expectation exactly sigma^2.
inline ParamPoint noisy_oracle(const Problem& p, double sigma, const ParamPoint& x, Rng& rng) {
    ParamPoint g = p.gradient(x);
    if (sigma == 0.0) return g;
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    std::normal_distribution<double> normal(0.0, sigma / std::sqrt(static_cast<double>(g.size())));
    std::vector<double> out(g.values());
    for (double& v : out) v += normal(rng);
    return {g.shape(), std::move(out)};
}

namespace detail {

using DenseMatrix = Eigen::MatrixXd;

inline ParamPoint random_normal(const Shape& shape, Rng& rng, double stddev = 1.0) {
    std::normal_distribution<double> normal(0.0, stddev);
    std::vector<double> v(shape.size());
    for (double& e : v) e = normal(rng);
    return {shape, std::move(v)};
}

inline DenseMatrix random_orthogonal(std::size_t d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix M(d, d);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = normal(rng);
    Eigen::HouseholderQR<DenseMatrix> qr(M);
    DenseMatrix Q = qr.householderQ();
    // Fix column signs so Q is a deterministic function of M.
    const DenseMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        if (R(j, j) < 0) Q.col(j) *= -1.0;
    }
    return Q;
}

/// Generic geometry constants from Euclidean ones: ||v||_* <= rho ||v||_2 and
/// ||v||_2 <= rho ||v|| for all three geometries, hence L_geom <= rho^2 L_2.
inline void fill_from_euclidean(std::map<NormKind, double>& consts, double euclidean, const Shape& shape) {
    consts[NormKind::Euclidean] = euclidean;
    const double r_inf = rho_constant(NormKind::Infinity, shape);
    consts[NormKind::Infinity] = r_inf * r_inf * euclidean;
    if (shape.is_matrix()) {
        const double r_sp = rho_constant(NormKind::Spectral, shape);
        consts[NormKind::Spectral] = r_sp * r_sp * euclidean;
    }
}

}  // namespace detail

/// f(x) = 1/2 (x - x*)^T A (x - x*) with the spectrum of A spread linearly over
/// [1, condition] (a single eigenvalue equal to condition when d = 1).
inline Problem make_quadratic(const Shape& shape, double condition, std::uint64_t seed,
                              std::optional<ParamPoint> x_star = std::nullopt) {
    if (!(condition >= 1.0)) throw std::invalid_argument("condition must be >= 1");
    const std::size_t d = shape.size();
    Rng rng(seed);
    const detail::DenseMatrix Q = detail::random_orthogonal(d, rng);
    Eigen::VectorXd lambda(d);
    for (std::size_t i = 0; i < d; ++i) {
        lambda(i) = d == 1 ? condition : 1.0 + (condition - 1.0) * static_cast<double>(i) / static_cast<double>(d - 1);
    }
    auto A = std::make_shared<const detail::DenseMatrix>(Q * lambda.asDiagonal() * Q.transpose());
    ParamPoint star = x_star ? *x_star : detail::random_normal(shape, rng);
    require_same_shape(star, ParamPoint::zeros(shape));

    Problem p;
    p.name = "quadratic";
    p.shape = shape;
    auto xs = std::make_shared<const Eigen::VectorXd>(Eigen::Map<const Eigen::VectorXd>(star.data().data(), d));
    p.value = [A, xs](const ParamPoint& x) {
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data().data(), x.size()) - *xs;
        return 0.5 * r.dot(*A * r);
    };
    p.gradient = [A, xs](const ParamPoint& x) {
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(x.data().data(), x.size()) - *xs;
        const Eigen::VectorXd g = *A * r;
        return ParamPoint(x.shape(), std::vector<double>(g.data(), g.data() + g.size()));
    };
    p.x0 = ParamPoint::zeros(shape);
    detail::fill_from_euclidean(p.L, condition, shape);
    // ||A v||_1 <= (sum |A_ij|) ||v||_inf; keep the tighter of the two bounds.
    p.L[NormKind::Infinity] = std::min(p.L[NormKind::Infinity], A->cwiseAbs().sum());
    for (const auto& [k, _] : p.L) p.H[k] = 0.0;
    p.x_star = star;
    p.F_star = 0.0;
    p.F_lower = 0.0;
    p.star_convex = true;
    return p;
}

enum class LossKind { Quadratic, Logistic };

inline std::string to_string(LossKind k) { return k == LossKind::Quadratic ? "quadratic" : "logistic"; }

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "quadratic") return LossKind::Quadratic;
    if (s == "logistic") return LossKind::Logistic;
    throw std::invalid_argument("unknown loss '" + s + "'");
}

/// Gradient-Lipschitz constant of y -> log(1 + exp(-t y)) for t in {-1, +1}:
/// max of s(1 - s) over the logistic sigmoid s.
inline constexpr double kLogisticGradLipschitz = 0.25;
/// Hessian-Lipschitz constant: max |s(1 - s)(1 - 2s)|, attained at
/// s = (3 +- sqrt(3)) / 6.
inline const double kLogisticHessLipschitz = 1.0 / (6.0 * std::sqrt(3.0));

/// F(X) = (1/N) sum_i loss_i(X a_i), X in R^{m x n}.
struct MatrixLayerProblem {
    std::size_t m = 0, n = 0;
    std::vector<Eigen::VectorXd> a;        // N inputs in R^n
    std::vector<Eigen::VectorXd> targets;  // N targets in R^m (+-1 for logistic)
    LossKind loss = LossKind::Quadratic;
    double lambda = 1.0;    // gradient Lipschitz constant of each loss_i
    double lambda_H = 0.0;  // Hessian Lipschitz constant of each loss_i
    Problem problem;

    [[nodiscard]] std::size_t N() const { return a.size(); }

    /// lambda * (1/N) sum ||a_i||^2.
    [[nodiscard]] double analytic_L() const {
        double s = 0.0;
        for (const auto& ai : a) s += ai.squaredNorm();
        return lambda * s / static_cast<double>(N());
    }
    /// lambda_H * (1/N) sum ||a_i||^3.
    [[nodiscard]] double analytic_H() const {
        double s = 0.0;
        for (const auto& ai : a) s += std::pow(ai.norm(), 3);
        return lambda_H * s / static_cast<double>(N());
    }
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct MatrixLayerData {
    std::size_t m, n;
    std::vector<Eigen::VectorXd> a, targets;
    LossKind loss;
};

inline double layer_value(const MatrixLayerData& d, const ParamPoint& x) {
    const Eigen::Map<const RowMajorMatrix> X(x.data().data(), d.m, d.n);
    double total = 0.0;
    for (std::size_t i = 0; i < d.a.size(); ++i) {
        const Eigen::VectorXd y = X * d.a[i];
        if (d.loss == LossKind::Quadratic) {
            total += 0.5 * (y - d.targets[i]).squaredNorm();
        } else {
            for (Eigen::Index j = 0; j < y.size(); ++j) total += softplus(-d.targets[i](j) * y(j));
        }
    }
    return total / static_cast<double>(d.a.size());
}

inline ParamPoint layer_gradient(const MatrixLayerData& d, const ParamPoint& x) {
    const Eigen::Map<const RowMajorMatrix> X(x.data().data(), d.m, d.n);
    RowMajorMatrix G = RowMajorMatrix::Zero(d.m, d.n);
    for (std::size_t i = 0; i < d.a.size(); ++i) {
        const Eigen::VectorXd y = X * d.a[i];
        Eigen::VectorXd dy(d.m);
        if (d.loss == LossKind::Quadratic) {
            dy = y - d.targets[i];
        } else {
            for (Eigen::Index j = 0; j < y.size(); ++j) {
                const double t = d.targets[i](j);
                dy(j) = -t * sigmoid(-t * y(j));
            }
        }
        G.noalias() += dy * d.a[i].transpose();
    }
    G /= static_cast<double>(d.a.size());
    return from_matrix(x.shape(), G);
}

}  // namespace detail

/// Inputs a_i ~ N(0, I_n); quadratic targets b_i ~ N(0, I_m); logistic
/// targets uniform in {-1, +1}^m. x0 ~ N(0, 1/n) entrywise.
inline MatrixLayerProblem make_matrix_layer(std::size_t m, std::size_t n, std::size_t N, LossKind loss,
                                            std::uint64_t seed) {
    if (m == 0 || n == 0 || N == 0) throw std::invalid_argument("matrix layer dimensions must be positive");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    MatrixLayerProblem out;
    out.m = m;
    out.n = n;
    out.loss = loss;
    out.lambda = loss == LossKind::Quadratic ? 1.0 : kLogisticGradLipschitz;
    out.lambda_H = loss == LossKind::Quadratic ? 0.0 : kLogisticHessLipschitz;
    for (std::size_t i = 0; i < N; ++i) {
        Eigen::VectorXd ai(n), ti(m);
        for (auto& v : ai) v = normal(rng);
        for (auto& v : ti) v = loss == LossKind::Quadratic ? normal(rng) : (coin(rng) ? 1.0 : -1.0);
        out.a.push_back(std::move(ai));
        out.targets.push_back(std::move(ti));
    }

    const Shape shape = Shape::matrix(m, n);
    auto data = std::make_shared<const detail::MatrixLayerData>(detail::MatrixLayerData{m, n, out.a, out.targets, loss});
    Problem& p = out.problem;
    p.name = "matrix_layer_" + to_string(loss);
    p.shape = shape;
    p.value = [data](const ParamPoint& x) { return detail::layer_value(*data, x); };
    p.gradient = [data](const ParamPoint& x) { return detail::layer_gradient(*data, x); };
    p.x0 = detail::random_normal(shape, rng, 1.0 / std::sqrt(static_cast<double>(n)));

    // The bound ||grad F(X1) - grad F(X2)||_* <= L ||X1 - X2|| with
    // L = lambda (1/N) sum ||a_i||^2 holds for the spectral pair, and also for
    // the Frobenius pair since ||.||_spec <= ||.||_F.
    const double L = out.analytic_L();
    const double H = out.analytic_H();
    p.L[NormKind::Spectral] = L;
    p.L[NormKind::Euclidean] = L;
    p.L[NormKind::Infinity] = static_cast<double>(shape.size()) * L;
    p.H[NormKind::Spectral] = H;
    p.H[NormKind::Euclidean] = H;
    p.F_lower = 0.0;

    if (loss == LossKind::Quadratic) {
        // Least squares: X* (sum a a^T) = sum b a^T.
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(m, n);
        for (std::size_t i = 0; i < N; ++i) {
            S.noalias() += out.a[i] * out.a[i].transpose();
            B.noalias() += out.targets[i] * out.a[i].transpose();
        }
        const Eigen::MatrixXd Xs = S.completeOrthogonalDecomposition().solve(B.transpose()).transpose();
        std::vector<double> xs(m * n);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) xs[r * n + c] = Xs(r, c);
        p.x_star = ParamPoint(shape, std::move(xs));
        p.F_star = p.value(*p.x_star);
        p.F_lower = *p.F_star;
        p.star_convex = true;
        p.H[NormKind::Infinity] = 0.0;
    }
    return out;
}

namespace detail {

/// Random pair generator shared by the constant estimators: a base point near
/// x0 and a displacement with log-uniform length in [1e-3, 1].
inline std::pair<ParamPoint, ParamPoint> random_pair(const Problem& p, Rng& rng) {
    const ParamPoint base = p.x0 + random_normal(p.shape, rng);
    const ParamPoint dir = random_normal(p.shape, rng);
    std::uniform_real_distribution<double> u(std::log(1e-3), 0.0);
    const double len = std::exp(u(rng));
    const double n = euclid_norm(dir);
    return {base, base + scale(n > 0 ? len / n : 0.0, dir)};
}

}  // namespace detail

/// Sampling lower bound on the gradient Lipschitz constant:
/// max ||grad f(x) - grad f(x')||_* / ||x - x'|| over random pairs.
inline double estimate_L(const Problem& p, NormKind geometry, int trials, std::uint64_t seed = 0) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const NormGeometry geo = NormGeometry::make(geometry, p.shape);
    Rng rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto [x, y] = detail::random_pair(p, rng);
        const double den = primal_norm(geo, x - y);
        if (den == 0.0) continue;
        best = std::max(best, dual_norm(geo, p.gradient(x) - p.gradient(y)) / den);
    }
    return best;
}

/// Hessian-vector product by central differences of the gradient.
inline ParamPoint hessian_vector(const Problem& p, const ParamPoint& x, const ParamPoint& v, double h = 1e-4) {
    const double n = euclid_norm(v);
    if (n == 0.0) return ParamPoint::zeros(v.shape());
    const ParamPoint u = scale(h / n, v);
    return scale(n / (2.0 * h), p.gradient(x + u) - p.gradient(x - u));
}

/// Sampling lower bound on the Hessian Lipschitz constant:
/// max ||(hess f(x) - hess f(x'))(x - x')||_* / ||x - x'||^2.
inline double estimate_H(const Problem& p, NormKind geometry, int trials, std::uint64_t seed = 0) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const NormGeometry geo = NormGeometry::make(geometry, p.shape);
    Rng rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto [x, y] = detail::random_pair(p, rng);
        const ParamPoint d = x - y;
        const double den = primal_norm(geo, d);
        if (den == 0.0) continue;
        const ParamPoint diff = hessian_vector(p, x, d) - hessian_vector(p, y, d);
        best = std::max(best, dual_norm(geo, diff) / (den * den));
    }
    return best;
}

}  // namespace ntr
