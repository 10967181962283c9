#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include "atop/errors.hpp"
#include "atop/mesh.hpp"
#include "atop/sparse.hpp"
#include "atop/vec2.hpp"

namespace atop {

/// Isotropic ersatz-material model. The void tensor is C0 = ersatz^2 C1 and
/// C(phi) interpolates between them with the fixed quadratic
/// g(phi) = 1 - (1 - phi)^2 / 2, so the stiffness reduces to a scalar factor
/// s(phi) in front of the solid tensor C1 A = 2 mu A + lambda tr(A) I.
struct ElasticityModel {
    double youngs_modulus{1.0};
    double poisson_ratio{0.33};
    double ersatz_factor{1e-2};

    double mu() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
    double lambda() const {
        return youngs_modulus * poisson_ratio /
               ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
    }

    /// Quadratic interpolation g(phi), clamped outside [-1, 1].
    static double g_interp(double phi) {
        const double p = std::clamp(phi, -1.0, 1.0);
        return 1.0 - 0.5 * (1.0 - p) * (1.0 - p);
    }

    /// Scalar stiffness factor: s(-1) = 1 (solid), s(1) = ersatz^2 (void).
    double stiffness_scale(double phi) const {
        const double e2 = ersatz_factor * ersatz_factor;
        return 0.5 * g_interp(phi) * (e2 - 1.0) + 0.5 * (1.0 + e2);
    }

    /// d/dphi of the scalar factor; vanishes at phi = 1 and is negative on
    /// [-1, 1), so strain energy pulls phi toward the material phase.
    double stiffness_scale_derivative(double phi) const {
        const double p = std::clamp(phi, -1.0, 1.0);
        const double e2 = ersatz_factor * ersatz_factor;
        return 0.5 * (1.0 - p) * (e2 - 1.0);
    }

    bool operator==(const ElasticityModel&) const = default;
};

/// C(phi) applied to a symmetric 2x2 strain.
inline Mat2 stiffness_tensor_apply(const ElasticityModel& model, double phi, const Mat2& strain) {
    const double s = model.stiffness_scale(phi);
    const double tr = strain.trace();
    Mat2 out = strain * (2.0 * model.mu() * s);
    const double d = model.lambda() * s * tr;
    out.a11 += d;
    out.a22 += d;
    return out;
}

/// C(phi) E : E for an elementwise-constant strain.
inline double elastic_energy_density(const ElasticityModel& model, double phi, const Mat2& strain) {
    const double s = model.stiffness_scale(phi);
    const double tr = strain.trace();
    return s * (2.0 * model.mu() * strain.ddot(strain) + model.lambda() * tr * tr);
}

/// C'(phi) E : E, the integrand of the compliance sensitivity.
inline double elastic_energy_sensitivity(const ElasticityModel& model, double phi, const Mat2& strain) {
    const double ds = model.stiffness_scale_derivative(phi);
    const double tr = strain.trace();
    return ds * (2.0 * model.mu() * strain.ddot(strain) + model.lambda() * tr * tr);
}

struct TractionPad {
    Segment segment;
    Vec2 g;
    bool operator==(const TractionPad&) const = default;
};

/// External loads: a constant body force weighted by h(phi) = (1 - phi)/2
/// and piecewise-constant traction pads on the Traction-tagged boundary.
/// g_scale multiplies every pad (convenient for force sweeps).
struct LoadSpec {
    Vec2 body_force{0.0, 0.0};
    std::vector<TractionPad> pads;
    double g_scale{1.0};

    /// h(phi) clamped: 1 on the material phase, 0 on the void.
    static double h_interp(double phi) { return 0.5 * (1.0 - std::clamp(phi, -1.0, 1.0)); }

    bool any() const {
        if (body_force.x != 0.0 || body_force.y != 0.0) return true;
        for (const TractionPad& p : pads)
            if (g_scale * p.g.x != 0.0 || g_scale * p.g.y != 0.0) return true;
        return false;
    }

    Vec2 traction_at(const Vec2& x) const {
        constexpr double tol = 1e-12;
        for (const TractionPad& p : pads) {
            const double c = (p.segment.side == Side::Bottom || p.segment.side == Side::Top) ? x.x : x.y;
            if (c >= p.segment.lo - tol && c <= p.segment.hi + tol) return p.g * g_scale;
        }
        return {0.0, 0.0};
    }

    bool operator==(const LoadSpec&) const = default;
};

/// Assembled state system with Dirichlet rows/columns eliminated
/// symmetrically (unit diagonal, zero load).
struct LinearSystem {
    CsrMatrix matrix;
    std::vector<double> load;
    std::vector<char> constrained;  // per dof
};

namespace detail {

/// Per-dof constraint flags from the boundary tags.
inline std::vector<char> dirichlet_flags(const FeMesh& m) {
    std::vector<char> c(static_cast<size_t>(2 * m.node_count()), 0);
    for (const BoundaryEdge& e : m.boundary) {
        for (int node : {e.a, e.b}) {
            if (e.tag == EdgeTag::DirichletFull) {
                c[static_cast<size_t>(2 * node)] = 1;
                c[static_cast<size_t>(2 * node + 1)] = 1;
            } else if (e.tag == EdgeTag::DirichletX) {
                c[static_cast<size_t>(2 * node)] = 1;
            } else if (e.tag == EdgeTag::DirichletY) {
                c[static_cast<size_t>(2 * node + 1)] = 1;
            }
        }
    }
    return c;
}

}  // namespace detail

/// Assemble the ersatz elasticity system for the current phase field.
/// phi is sampled per element as the vertex mean, which keeps the tensor
/// elementwise constant and the integration exact.
inline LinearSystem assemble_state(const FeMesh& m, const ElasticityModel& model,
                                   const LoadSpec& loads, const ScalarField& phi) {
    LinearSystem sys;
    sys.constrained = detail::dirichlet_flags(m);
    if (std::find(sys.constrained.begin(), sys.constrained.end(), char(1)) == sys.constrained.end())
        throw NoDirichletConstraint();

    sys.matrix = adjacency_pattern(m, 2);
    const double mu = model.mu();
    const double lam = model.lambda();
    const double area = m.element_area();

    for (int e = 0; e < m.element_count(); ++e) {
        const Triangle& t = m.elements[static_cast<size_t>(e)];
        const auto grads = m.hat_gradients(e);
        const double phi_mean = (phi[static_cast<size_t>(t.v[0])] + phi[static_cast<size_t>(t.v[1])] +
                                 phi[static_cast<size_t>(t.v[2])]) / 3.0;
        const double s = model.stiffness_scale(phi_mean) * area;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double gg = grads[a].dot(grads[b]);
                const double da[2] = {grads[a].x, grads[a].y};
                const double db[2] = {grads[b].x, grads[b].y};
                for (int alpha = 0; alpha < 2; ++alpha) {
                    for (int beta = 0; beta < 2; ++beta) {
                        // products are parenthesized so the (a,alpha) <-> (b,beta)
                        // exchange is bitwise symmetric
                        const double k = s * (mu * ((alpha == beta ? gg : 0.0) + da[beta] * db[alpha]) +
                                              lam * (da[alpha] * db[beta]));
                        const int row = 2 * t.v[a] + alpha;
                        const int colidx = 2 * t.v[b] + beta;
                        if (sys.constrained[static_cast<size_t>(row)] ||
                            sys.constrained[static_cast<size_t>(colidx)])
                            continue;  // zero Dirichlet data: drop symmetrically
                        sys.matrix.add_at(row, colidx, k);
                    }
                }
            }
        }
    }
    for (int d = 0; d < sys.matrix.n; ++d)
        if (sys.constrained[static_cast<size_t>(d)]) sys.matrix.add_at(d, d, 1.0);

    sys.load = boundary_quadrature(m, EdgeTag::Traction,
                                   [&](const Vec2& x) { return loads.traction_at(x); });
    if (loads.body_force.x != 0.0 || loads.body_force.y != 0.0) {
        for (int i = 0; i < m.node_count(); ++i) {
            const double w = m.lumped[static_cast<size_t>(i)] * LoadSpec::h_interp(phi[static_cast<size_t>(i)]);
            sys.load[static_cast<size_t>(2 * i)] += w * loads.body_force.x;
            sys.load[static_cast<size_t>(2 * i + 1)] += w * loads.body_force.y;
        }
    }
    for (int d = 0; d < sys.matrix.n; ++d)
        if (sys.constrained[static_cast<size_t>(d)]) sys.load[static_cast<size_t>(d)] = 0.0;
    return sys;
}

/// Solve the assembled state system by preconditioned CG. `u` may carry a
/// warm start from the previous time step.
inline CgResult solve_state(const LinearSystem& sys, VectorField& u, double tol = 1e-10) {
    if (u.size() == static_cast<size_t>(sys.matrix.n)) {
        for (int d = 0; d < sys.matrix.n; ++d)
            if (sys.constrained[static_cast<size_t>(d)]) u[static_cast<size_t>(d)] = 0.0;
    }
    return cg_solve(sys.matrix, sys.load, u, tol);
}

/// Mean compliance: lumped body-force work plus boundary traction work.
/// Assembled independently of the stiffness so tests can compare it with
/// the energy form <E(u), E(u)>_{C(phi)}.
inline double compliance(const FeMesh& m, const LoadSpec& loads,
                         const ScalarField& phi, const VectorField& u) {
    double c = 0.0;
    const VectorField tload = boundary_quadrature(m, EdgeTag::Traction,
                                                  [&](const Vec2& x) { return loads.traction_at(x); });
    for (size_t d = 0; d < tload.size(); ++d) c += tload[d] * u[d];
    if (loads.body_force.x != 0.0 || loads.body_force.y != 0.0) {
        for (int i = 0; i < m.node_count(); ++i) {
            const double w = m.lumped[static_cast<size_t>(i)] * LoadSpec::h_interp(phi[static_cast<size_t>(i)]);
            c += w * (loads.body_force.x * u[static_cast<size_t>(2 * i)] +
                      loads.body_force.y * u[static_cast<size_t>(2 * i + 1)]);
        }
    }
    return c;
}

/// Elementwise-constant strain of a P1 displacement field.
inline Mat2 strain_on_element(const FeMesh& m, const VectorField& u, int e) {
    const Triangle& t = m.elements[static_cast<size_t>(e)];
    const auto grads = m.hat_gradients(e);
    Mat2 grad_u;  // (grad u)_{ij} = d u_i / d x_j
    for (int a = 0; a < 3; ++a) {
        const double ux = u[static_cast<size_t>(2 * t.v[a])];
        const double uy = u[static_cast<size_t>(2 * t.v[a] + 1)];
        grad_u.a11 += ux * grads[a].x;
        grad_u.a12 += ux * grads[a].y;
        grad_u.a21 += uy * grads[a].x;
        grad_u.a22 += uy * grads[a].y;
    }
    const double off = 0.5 * (grad_u.a12 + grad_u.a21);
    return {grad_u.a11, off, off, grad_u.a22};
}

/// Energy form <E(u), E(v)>_{C(phi)} with the same elementwise phi sampling
/// as the assembly.
inline double energy_form(const FeMesh& m, const ElasticityModel& model,
                          const ScalarField& phi, const VectorField& u, const VectorField& v) {
    double s = 0.0;
    const double area = m.element_area();
    for (int e = 0; e < m.element_count(); ++e) {
        const Triangle& t = m.elements[static_cast<size_t>(e)];
        const double phi_mean = (phi[static_cast<size_t>(t.v[0])] + phi[static_cast<size_t>(t.v[1])] +
                                 phi[static_cast<size_t>(t.v[2])]) / 3.0;
        const Mat2 eu = strain_on_element(m, u, e);
        const Mat2 ev = strain_on_element(m, v, e);
        s += area * stiffness_tensor_apply(model, phi_mean, eu).ddot(ev);
    }
    return s;
}

/// Nodal compliance sensitivity: the pairing of C'(phi) E(u):E(u) with the
/// P1 hat functions (one third of each incident element).
inline ScalarField sensitivity_density(const FeMesh& m, const ElasticityModel& model,
                                       const ScalarField& phi, const VectorField& u) {
    ScalarField s(static_cast<size_t>(m.node_count()), 0.0);
    const double third = m.element_area() / 3.0;
    for (int e = 0; e < m.element_count(); ++e) {
        const Triangle& t = m.elements[static_cast<size_t>(e)];
        const double phi_mean = (phi[static_cast<size_t>(t.v[0])] + phi[static_cast<size_t>(t.v[1])] +
                                 phi[static_cast<size_t>(t.v[2])]) / 3.0;
        const Mat2 eu = strain_on_element(m, u, e);
        const double dens = elastic_energy_sensitivity(model, phi_mean, eu) * third;
        for (int v : t.v) s[static_cast<size_t>(v)] += dens;
    }
    return s;
}

}  // namespace atop
