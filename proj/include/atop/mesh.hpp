#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "atop/errors.hpp"
#include "atop/vec2.hpp"

namespace atop {

using ScalarField = std::vector<double>;  ///< one value per node
using VectorField = std::vector<double>;  ///< interleaved (x,y) per node, size 2n

enum class Side { Left, Right, Bottom, Top };

inline std::string side_name(Side s) {
    switch (s) {
        case Side::Left: return "left";
        case Side::Right: return "right";
        case Side::Bottom: return "bottom";
        case Side::Top: return "top";
    }
    return "?";
}

/// Interval [lo, hi] along one side of the rectangle boundary. The running
/// coordinate is x on Bottom/Top and y on Left/Right.
struct Segment {
    Side side{Side::Bottom};
    double lo{0.0};
    double hi{0.0};
    bool operator==(const Segment&) const = default;
};

/// Boundary condition tags. DirichletX / DirichletY clamp a single
/// displacement component ("free-slip" symmetry planes); Traction marks the
/// loaded part of the boundary.
enum class EdgeTag { Free, DirichletFull, DirichletX, DirichletY, Traction };

struct Rect {
    double x0{0.0}, x1{1.0}, y0{0.0}, y1{1.0};
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool operator==(const Rect&) const = default;
};

struct Triangle {
    std::array<int, 3> v{};  // counterclockwise
};

struct BoundaryEdge {
    int a{0}, b{0};  // node ids, ccw along the boundary
    Side side{Side::Bottom};
    EdgeTag tag{EdgeTag::Free};
};

/// Uniform Friedrichs-Keller triangulation of an axis-aligned rectangle
/// with P1 nodal data. Each cell is split along the lower-left to
/// upper-right diagonal, a fixed choice that keeps runs deterministic.
struct FeMesh {
    Rect domain;
    int nx{0}, ny{0};
    std::vector<Vec2> nodes;
    std::vector<Triangle> elements;
    std::vector<BoundaryEdge> boundary;
    std::vector<double> lumped;  ///< nodal lumped-mass weights, sum = |domain|

    int node_count() const { return static_cast<int>(nodes.size()); }
    int element_count() const { return static_cast<int>(elements.size()); }
    double hx() const { return domain.width() / nx; }
    double hy() const { return domain.height() / ny; }
    double h() const { return std::min(hx(), hy()); }
    double element_area() const { return 0.5 * hx() * hy(); }

    int node_id(int i, int j) const { return j * (nx + 1) + i; }

    /// Constant gradient of the P1 interpolant of a scalar field on element e.
    Vec2 gradient_on_element(const ScalarField& f, int e) const {
        const Triangle& t = elements[static_cast<size_t>(e)];
        const Vec2& p0 = nodes[static_cast<size_t>(t.v[0])];
        const Vec2& p1 = nodes[static_cast<size_t>(t.v[1])];
        const Vec2& p2 = nodes[static_cast<size_t>(t.v[2])];
        const double twice_area = (p1 - p0).cross(p2 - p0);
        const double f0 = f[static_cast<size_t>(t.v[0])];
        const double f1 = f[static_cast<size_t>(t.v[1])];
        const double f2 = f[static_cast<size_t>(t.v[2])];
        // grad = sum_i f_i grad(hat_i), grad(hat_i) = rot90(opposite edge)/2|e|
        const Vec2 g = (Vec2{p1.y - p2.y, p2.x - p1.x} * f0 +
                        Vec2{p2.y - p0.y, p0.x - p2.x} * f1 +
                        Vec2{p0.y - p1.y, p1.x - p0.x} * f2);
        return g / twice_area;
    }

    /// Gradients of the three hat functions on element e.
    std::array<Vec2, 3> hat_gradients(int e) const {
        const Triangle& t = elements[static_cast<size_t>(e)];
        const Vec2& p0 = nodes[static_cast<size_t>(t.v[0])];
        const Vec2& p1 = nodes[static_cast<size_t>(t.v[1])];
        const Vec2& p2 = nodes[static_cast<size_t>(t.v[2])];
        const double twice_area = (p1 - p0).cross(p2 - p0);
        return {Vec2{p1.y - p2.y, p2.x - p1.x} / twice_area,
                Vec2{p2.y - p0.y, p0.x - p2.x} / twice_area,
                Vec2{p0.y - p1.y, p1.x - p0.x} / twice_area};
    }
};

namespace detail {

inline double side_coordinate(const FeMesh& m, Side s, const Vec2& p) {
    return (s == Side::Bottom || s == Side::Top) ? p.x : p.y;
}

inline bool on_side(const Rect& d, Side s, const Vec2& p, double tol) {
    switch (s) {
        case Side::Left: return std::abs(p.x - d.x0) <= tol;
        case Side::Right: return std::abs(p.x - d.x1) <= tol;
        case Side::Bottom: return std::abs(p.y - d.y0) <= tol;
        case Side::Top: return std::abs(p.y - d.y1) <= tol;
    }
    return false;
}

}  // namespace detail

struct TagRule {
    Segment segment;
    EdgeTag tag{EdgeTag::Free};
    bool operator==(const TagRule&) const = default;
};

/// Build the uniform mesh and tag boundary edges. An edge receives a rule's
/// tag when both endpoints lie inside the rule segment; untagged boundary
/// edges stay Free. Rules must lie on the boundary and be pairwise disjoint
/// per side.
inline FeMesh build_mesh(const Rect& domain, int nx, int ny, const std::vector<TagRule>& rules = {}) {
    assert(nx >= 1 && ny >= 1);
    FeMesh m;
    m.domain = domain;
    m.nx = nx;
    m.ny = ny;

    const double scale = std::max(domain.width(), domain.height());
    const double tol = 1e-12 * scale;
    for (const TagRule& r : rules) {
        const Segment& s = r.segment;
        if (s.lo >= s.hi)
            throw InvalidTagSegment(side_name(s.side) + " segment has lo >= hi");
        const double axis_lo = (s.side == Side::Bottom || s.side == Side::Top) ? domain.x0 : domain.y0;
        const double axis_hi = (s.side == Side::Bottom || s.side == Side::Top) ? domain.x1 : domain.y1;
        if (s.hi < axis_lo - tol || s.lo > axis_hi + tol)
            throw InvalidTagSegment(side_name(s.side) + " segment lies off the boundary");
        for (const TagRule& o : rules) {
            if (&o == &r || o.segment.side != s.side) continue;
            if (s.lo < o.segment.hi - tol && o.segment.lo < s.hi - tol)
                throw InvalidTagSegment("overlapping segments on side " + side_name(s.side));
        }
    }

    m.nodes.reserve(static_cast<size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes.push_back({domain.x0 + domain.width() * i / nx,
                               domain.y0 + domain.height() * j / ny});

    m.elements.reserve(static_cast<size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n00 = m.node_id(i, j);
            const int n10 = m.node_id(i + 1, j);
            const int n01 = m.node_id(i, j + 1);
            const int n11 = m.node_id(i + 1, j + 1);
            m.elements.push_back({{n00, n10, n11}});
            m.elements.push_back({{n00, n11, n01}});
        }

    m.lumped.assign(m.nodes.size(), 0.0);
    const double third = m.element_area() / 3.0;
    for (const Triangle& t : m.elements)
        for (int v : t.v) m.lumped[static_cast<size_t>(v)] += third;

    const auto tag_of = [&](Side side, const Vec2& pa, const Vec2& pb) {
        for (const TagRule& r : rules) {
            if (r.segment.side != side) continue;
            const double ca = detail::side_coordinate(m, side, pa);
            const double cb = detail::side_coordinate(m, side, pb);
            if (ca >= r.segment.lo - tol && ca <= r.segment.hi + tol &&
                cb >= r.segment.lo - tol && cb <= r.segment.hi + tol)
                return r.tag;
        }
        return EdgeTag::Free;
    };

    for (int i = 0; i < nx; ++i) {
        const Vec2 a = m.nodes[static_cast<size_t>(m.node_id(i, 0))];
        const Vec2 b = m.nodes[static_cast<size_t>(m.node_id(i + 1, 0))];
        m.boundary.push_back({m.node_id(i, 0), m.node_id(i + 1, 0), Side::Bottom, tag_of(Side::Bottom, a, b)});
    }
    for (int j = 0; j < ny; ++j) {
        const Vec2 a = m.nodes[static_cast<size_t>(m.node_id(nx, j))];
        const Vec2 b = m.nodes[static_cast<size_t>(m.node_id(nx, j + 1))];
        m.boundary.push_back({m.node_id(nx, j), m.node_id(nx, j + 1), Side::Right, tag_of(Side::Right, a, b)});
    }
    for (int i = nx; i > 0; --i) {
        const Vec2 a = m.nodes[static_cast<size_t>(m.node_id(i, ny))];
        const Vec2 b = m.nodes[static_cast<size_t>(m.node_id(i - 1, ny))];
        m.boundary.push_back({m.node_id(i, ny), m.node_id(i - 1, ny), Side::Top, tag_of(Side::Top, a, b)});
    }
    for (int j = ny; j > 0; --j) {
        const Vec2 a = m.nodes[static_cast<size_t>(m.node_id(0, j))];
        const Vec2 b = m.nodes[static_cast<size_t>(m.node_id(0, j - 1))];
        m.boundary.push_back({m.node_id(0, j), m.node_id(0, j - 1), Side::Left, tag_of(Side::Left, a, b)});
    }
    return m;
}

/// Mass-lumped L2 inner product (f, g)^h = sum_i w_i f_i g_i.
inline double lumped_inner(const std::vector<double>& weights, const ScalarField& f, const ScalarField& g) {
    assert(weights.size() == f.size() && f.size() == g.size());
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * f[i] * g[i];
    return s;
}

inline double lumped_integral(const std::vector<double>& weights, const ScalarField& f) {
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) s += weights[i] * f[i];
    return s;
}

/// Trapezoidal quadrature of a boundary function g against the P1 traces on
/// all edges carrying `tag`; returns an interleaved nodal load vector.
inline VectorField boundary_quadrature(const FeMesh& m, EdgeTag tag,
                                       const std::function<Vec2(const Vec2&)>& g) {
    VectorField load(static_cast<size_t>(2 * m.node_count()), 0.0);
    for (const BoundaryEdge& e : m.boundary) {
        if (e.tag != tag) continue;
        const Vec2& pa = m.nodes[static_cast<size_t>(e.a)];
        const Vec2& pb = m.nodes[static_cast<size_t>(e.b)];
        const double half = 0.5 * (pb - pa).norm();
        const Vec2 ga = g(pa) * half;
        const Vec2 gb = g(pb) * half;
        load[static_cast<size_t>(2 * e.a)] += ga.x;
        load[static_cast<size_t>(2 * e.a + 1)] += ga.y;
        load[static_cast<size_t>(2 * e.b)] += gb.x;
        load[static_cast<size_t>(2 * e.b + 1)] += gb.y;
    }
    return load;
}

}  // namespace atop
