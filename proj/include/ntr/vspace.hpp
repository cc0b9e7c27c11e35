#pragma once

// Finite-dimensional inner-product space of optimization points.
//
// A ParamPoint is a flat, row-major array of doubles with a Shape tag. Vector
// geometries and matrix geometries share this one point type; the shape only
// matters to operations that need matrix structure (singular values, orth).

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ntr {

/// Raised when two points of different shapes are combined, or when a point
/// of the wrong kind is handed to a shape-specific operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Shape {
    enum class Kind { Vector, Matrix };

    Kind kind = Kind::Vector;
    std::size_t rows = 1;  // d for vectors, m for matrices
    std::size_t cols = 1;  // 1 for vectors, n for matrices

    static Shape vector(std::size_t d) {
        if (d == 0) throw ShapeError("vector dimension must be positive");
        return {Kind::Vector, d, 1};
    }
    static Shape matrix(std::size_t m, std::size_t n) {
        if (m == 0 || n == 0) throw ShapeError("matrix dimensions must be positive");
        return {Kind::Matrix, m, n};
    }

    [[nodiscard]] std::size_t size() const { return rows * cols; }
    [[nodiscard]] bool is_matrix() const { return kind == Kind::Matrix; }

    [[nodiscard]] std::string str() const {
        if (is_matrix()) return "matrix(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
        return "vector(" + std::to_string(rows) + ")";
    }

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Immutable point of the optimization space.
class ParamPoint {
public:
    ParamPoint() : ParamPoint(Shape::vector(1), std::vector<double>{0.0}) {}

    ParamPoint(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.size()) {
            throw ShapeError("data length " + std::to_string(data_.size()) + " does not match " +
                             shape_.str());
        }
        for (double v : data_) {
            if (!std::isfinite(v)) throw std::domain_error("ParamPoint entries must be finite");
        }
    }

    static ParamPoint zeros(Shape shape) { return {shape, std::vector<double>(shape.size(), 0.0)}; }

    static ParamPoint filled(Shape shape, double value) {
        return {shape, std::vector<double>(shape.size(), value)};
    }

    static ParamPoint vector(std::initializer_list<double> values) {
        return {Shape::vector(values.size()), std::vector<double>(values)};
    }

    /// Row-major matrix literal, e.g. matrix({{1, 0}, {0, 1}}).
    static ParamPoint matrix(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t m = rows.size();
        const std::size_t n = m ? rows.begin()->size() : 0;
        std::vector<double> data;
        data.reserve(m * n);
        for (const auto& row : rows) {
            if (row.size() != n) throw ShapeError("ragged matrix literal");
            data.insert(data.end(), row.begin(), row.end());
        }
        return {Shape::matrix(m, n), std::move(data)};
    }

    static ParamPoint diag(std::initializer_list<double> values) {
        const std::size_t n = values.size();
        std::vector<double> data(n * n, 0.0);
        std::size_t i = 0;
        for (double v : values) {
            data[i * n + i] = v;
            ++i;
        }
        return {Shape::matrix(n, n), std::move(data)};
    }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] const std::vector<double>& values() const { return data_; }
    [[nodiscard]] double operator[](std::size_t i) const { return data_[i]; }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const ParamPoint& a, const ParamPoint& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("incompatible shapes: " + a.shape().str() + " vs " + b.shape().str());
    }
}

inline double inner(const ParamPoint& a, const ParamPoint& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double euclid_norm(const ParamPoint& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

/// alpha * a + beta * b, elementwise.
inline ParamPoint axpby(double alpha, const ParamPoint& a, double beta, const ParamPoint& b) {
    require_same_shape(a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + beta * b[i];
    return {a.shape(), std::move(out)};
}

inline ParamPoint scale(double c, const ParamPoint& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return {a.shape(), std::move(out)};
}

inline ParamPoint operator+(const ParamPoint& a, const ParamPoint& b) { return axpby(1.0, a, 1.0, b); }
inline ParamPoint operator-(const ParamPoint& a, const ParamPoint& b) { return axpby(1.0, a, -1.0, b); }

}  // namespace ntr
