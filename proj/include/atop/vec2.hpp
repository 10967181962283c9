#pragma once

#include <cmath>

namespace atop {

inline constexpr double kPi = 3.14159265358979323846;

/// 2D vector with double components; the only linear algebra the solver
/// needs besides Mat2 and the sparse CSR matrices.
struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr bool operator==(const Vec2&) const = default;

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    /// z-component of the 3D cross product; positive when r is ccw from *this.
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }

    Vec2 normalized(double eps = 0.0) const {
        const double n = norm();
        return n > eps ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Symmetric-friendly 2x2 matrix (row major). Used for BGN matrices and
/// elementwise strain tensors.
struct Mat2 {
    double a11{0.0}, a12{0.0};
    double a21{0.0}, a22{0.0};

    constexpr Mat2() = default;
    constexpr Mat2(double m11, double m12, double m21, double m22)
        : a11(m11), a12(m12), a21(m21), a22(m22) {}

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
    /// Rank-1 outer product v v^T.
    static constexpr Mat2 outer(const Vec2& v) {
        return {v.x * v.x, v.x * v.y, v.y * v.x, v.y * v.y};
    }

    constexpr Mat2 operator+(const Mat2& r) const {
        return {a11 + r.a11, a12 + r.a12, a21 + r.a21, a22 + r.a22};
    }
    constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    constexpr Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    constexpr bool operator==(const Mat2&) const = default;

    constexpr double trace() const { return a11 + a22; }
    /// Frobenius inner product A : B.
    constexpr double ddot(const Mat2& r) const {
        return a11 * r.a11 + a12 * r.a12 + a21 * r.a21 + a22 * r.a22;
    }
    constexpr double quad(const Vec2& v) const { return v.dot(*this * v); }
};

constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

}  // namespace atop
