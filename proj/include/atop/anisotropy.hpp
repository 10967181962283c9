#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "atop/errors.hpp"
#include "atop/vec2.hpp"

namespace atop {

/// One-homogeneous interface energy densities gamma(q) for d = 2.
///
/// All four families are "BGN" densities: sums of terms sqrt(q . G_l q)
/// with piecewise-constant matrices G_l(q), which is what makes the
/// linearization matrix B(q) with B(q) q = D[gamma^2/2](q) available to
/// the time-discrete scheme.
enum class AnisotropyKind {
    Isotropic,            ///< gamma(q) = |q|
    ConvexOverhang,       ///< |q| above the cone, -q2/alpha inside the downward cone
    RegularizedOverhang,  ///< ConvexOverhang + delta |q|
    NonConvexOverhang,    ///< downward cone replaced by two line-supported pieces
};

/// Piecewise branch a point q falls in. Upper is the |q| branch; Lower the
/// convex downward cone; LeftCone/RightCone the two non-convex pieces.
enum class Branch { Upper, Lower, LeftCone, RightCone, Boundary, Zero };

struct Anisotropy {
    AnisotropyKind kind{AnisotropyKind::Isotropic};
    double alpha{1.0};   ///< cone opening, in (0,1]; 1 degenerates to isotropic
    double delta{0.0};   ///< regularization weight, > 0 for RegularizedOverhang
    double lambda{0.5};  ///< apex depth of the non-convex cone, in (0,1)

    static Anisotropy isotropic() { return {AnisotropyKind::Isotropic, 1.0, 0.0, 0.5}; }
    static Anisotropy convex_overhang(double alpha) {
        return {AnisotropyKind::ConvexOverhang, alpha, 0.0, 0.5};
    }
    static Anisotropy regularized_overhang(double alpha, double delta) {
        return {AnisotropyKind::RegularizedOverhang, alpha, delta, 0.5};
    }
    static Anisotropy nonconvex_overhang(double alpha, double lambda) {
        return {AnisotropyKind::NonConvexOverhang, alpha, 0.0, lambda};
    }

    bool convex() const { return kind != AnisotropyKind::NonConvexOverhang; }
    bool operator==(const Anisotropy&) const = default;
};

/// Default relative tolerance for classifying a point as lying on a branch
/// boundary. On Boundary the scheme uses the upper-branch matrix.
inline constexpr double kBranchBoundaryTol = 1e-9;

inline Branch branch_classify(const Anisotropy& a, const Vec2& q, double tol = kBranchBoundaryTol) {
    const double n = q.norm();
    if (n == 0.0) return Branch::Zero;
    if (a.kind == AnisotropyKind::Isotropic) return Branch::Upper;
    const double rim = q.y + a.alpha * n;  // zero on the cone boundary
    if (std::abs(rim) <= tol * n) return Branch::Boundary;
    if (rim > 0.0) return Branch::Upper;
    if (a.kind != AnisotropyKind::NonConvexOverhang) return Branch::Lower;
    if (std::abs(q.x) <= tol * n) return Branch::Boundary;  // seam between the two cones
    return q.x < 0.0 ? Branch::LeftCone : Branch::RightCone;
}

namespace detail {

/// Signed-form coefficients of the two non-convex cone pieces
/// gamma = |c1 x1 + c2 x2|; the inner expression is single-signed on the
/// open piece, so the modulus only matters for robustness.
inline Vec2 nonconvex_coeffs(const Anisotropy& a, bool left) {
    const double root = std::sqrt(1.0 - a.alpha * a.alpha);
    const double c1 = (1.0 - a.lambda) / (a.lambda * root);
    const double c2 = 1.0 / (a.lambda * a.alpha);
    return left ? Vec2{c1, -c2} : Vec2{c1, c2};
}

inline double gamma_convex(const Anisotropy& a, const Vec2& q) {
    const double n = q.norm();
    return q.y >= -a.alpha * n ? n : -q.y / a.alpha;
}

}  // namespace detail

/// gamma(q). Defined for every q including 0 (where it vanishes).
inline double gamma_eval(const Anisotropy& a, const Vec2& q) {
    switch (a.kind) {
        case AnisotropyKind::Isotropic:
            return q.norm();
        case AnisotropyKind::ConvexOverhang:
            return detail::gamma_convex(a, q);
        case AnisotropyKind::RegularizedOverhang:
            return detail::gamma_convex(a, q) + a.delta * q.norm();
        case AnisotropyKind::NonConvexOverhang: {
            const double n = q.norm();
            if (q.y >= -a.alpha * n) return n;
            const Vec2 c = detail::nonconvex_coeffs(a, q.x <= 0.0);
            return std::abs(c.dot(q));
        }
    }
    return 0.0;
}

/// A(q) = gamma(q)^2 / 2, the degree-two density the scheme linearizes.
inline double gl_density(const Anisotropy& a, const Vec2& q) {
    const double g = gamma_eval(a, q);
    return 0.5 * g * g;
}

namespace detail {

/// Branch-resolved matrix G(q) of the cone part (identity above the cone).
/// `branch` must be a concrete piece; Boundary and Zero fall back to Upper.
inline Mat2 cone_matrix(const Anisotropy& a, Branch branch) {
    switch (branch) {
        case Branch::Lower:
            return Mat2::diag(0.0, 1.0 / (a.alpha * a.alpha));
        case Branch::LeftCone:
            return Mat2::outer(nonconvex_coeffs(a, true));
        case Branch::RightCone:
            return Mat2::outer(nonconvex_coeffs(a, false));
        default:
            return Mat2::identity();
    }
}

}  // namespace detail

/// Linearization matrix B(q) with B(q) q = DA(q) on smooth branches.
///
/// Single-term families have B = G(q). The regularized family is the L = 2
/// sum gamma_alpha + delta |.|, giving
///   B(q) = gamma(q) (G1(q)/gamma_alpha(q) + delta I / |q|),   q != 0,
///   B(0) = 2 (1 + delta^2) I.
/// On a branch boundary the upper-branch matrix is used; the scheme only
/// needs one admissible selection there and freezes B at the old iterate.
inline Mat2 bgn_matrix(const Anisotropy& a, const Vec2& q, double tol = kBranchBoundaryTol) {
    const Branch b = branch_classify(a, q, tol);
    switch (a.kind) {
        case AnisotropyKind::Isotropic:
            return Mat2::identity();
        case AnisotropyKind::ConvexOverhang:
        case AnisotropyKind::NonConvexOverhang:
            return detail::cone_matrix(a, b);
        case AnisotropyKind::RegularizedOverhang: {
            if (b == Branch::Zero) return (2.0 * (1.0 + a.delta * a.delta)) * Mat2::identity();
            const Mat2 g1 = detail::cone_matrix(a, b);
            const double n = q.norm();
            const double ga = detail::gamma_convex(a, q);
            const double ghat = ga + a.delta * n;
            return ghat * (g1 * (1.0 / ga) + Mat2::identity() * (a.delta / n));
        }
    }
    return Mat2::identity();
}

/// Dgamma(q) on a smooth branch: zero-homogeneous, Euler identity
/// Dgamma(q) . q = gamma(q). Throws when q sits on a branch boundary
/// (the subdifferential is set-valued there) or at q = 0.
inline Vec2 dgamma(const Anisotropy& a, const Vec2& q, double tol = kBranchBoundaryTol) {
    const Branch b = branch_classify(a, q, tol);
    if (b == Branch::Zero)
        throw SubdifferentialNotSingleton("dgamma undefined at q = 0");
    if (b == Branch::Boundary)
        throw SubdifferentialNotSingleton("q lies on a branch boundary of gamma");
    switch (a.kind) {
        case AnisotropyKind::Isotropic:
            return q / q.norm();
        case AnisotropyKind::ConvexOverhang:
        case AnisotropyKind::NonConvexOverhang: {
            const Mat2 g = detail::cone_matrix(a, b);
            return (g * q) / gamma_eval(a, q);
        }
        case AnisotropyKind::RegularizedOverhang: {
            const Mat2 g1 = detail::cone_matrix(a, b);
            const double ga = detail::gamma_convex(a, q);
            return (g1 * q) / ga + q * (a.delta / q.norm());
        }
    }
    return {};
}

/// Dual density gamma*(r) = sup_{q != 0} r.q / gamma(q), convex families
/// only. Coarse equiangular scan followed by golden-section refinement of
/// the best arc; gamma* of a one-homogeneous planar density is smooth
/// enough along the circle for this to be reliable.
inline double dual_norm(const Anisotropy& a, const Vec2& r,
                        int scan_samples = 4096, double bracket_tol = 1e-10) {
    if (!a.convex()) throw NonConvexUnsupported("dual_norm");
    const double rn = r.norm();
    if (rn == 0.0) return 0.0;

    const auto ratio = [&](double theta) {
        const Vec2 q{std::cos(theta), std::sin(theta)};
        return r.dot(q) / gamma_eval(a, q);
    };

    const double two_pi = 2.0 * kPi;
    double best = -1.0;
    int best_k = 0;
    for (int k = 0; k < scan_samples; ++k) {
        const double v = ratio(two_pi * k / scan_samples);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    // Golden-section maximization on the bracketing arc.
    const double step = two_pi / scan_samples;
    double lo = step * (best_k - 1);
    double hi = step * (best_k + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = ratio(x1);
    double f2 = ratio(x2);
    while (hi - lo > bracket_tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = ratio(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = ratio(x1);
        }
    }
    return std::max(best, std::max(f1, f2));
}

/// Sampled closed curve of a Frank diagram or Wulff shape boundary.
struct DiagramSample {
    enum class Kind { Frank, Wulff };
    Kind kind{Kind::Frank};
    std::vector<Vec2> points;  // ordered, counterclockwise, not closed
};

/// Boundary of the Frank diagram {gamma <= 1}: n points omega_k / gamma(omega_k)
/// on equiangular rays.
inline DiagramSample sample_frank(const Anisotropy& a, int n) {
    assert(n >= 3);
    DiagramSample d;
    d.kind = DiagramSample::Kind::Frank;
    d.points.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double theta = 2.0 * kPi * k / n;
        const Vec2 w{std::cos(theta), std::sin(theta)};
        d.points.push_back(w / gamma_eval(a, w));
    }
    return d;
}

/// Boundary of the Wulff shape {gamma* <= 1}: equiangular rays scaled by
/// 1/gamma*(omega_k). Convex families only.
inline DiagramSample sample_wulff(const Anisotropy& a, int n) {
    assert(n >= 3);
    if (!a.convex()) throw NonConvexUnsupported("sample_wulff");
    DiagramSample d;
    d.kind = DiagramSample::Kind::Wulff;
    d.points.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double theta = 2.0 * kPi * k / n;
        const Vec2 w{std::cos(theta), std::sin(theta)};
        d.points.push_back(w / dual_norm(a, w));
    }
    return d;
}

}  // namespace atop
