#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "atop/anisotropy.hpp"
#include "atop/errors.hpp"
#include "atop/mesh.hpp"
#include "atop/sparse.hpp"

namespace atop {

/// Double obstacle potential on [-1, 1] (the +infinity part is enforced by
/// the solver clamp, never evaluated).
inline double obstacle_potential(double s) { return 0.5 * (1.0 - s * s); }

/// The sin transition profile: -1 below -pi/2, sin on [-pi/2, pi/2], 1 above.
inline double optimal_profile(double s) {
    if (s >= 0.5 * kPi) return 1.0;
    if (s <= -0.5 * kPi) return -1.0;
    return std::sin(s);
}

/// Equipartition defect psi'(s)^2 / 2 - Psi0(psi(s)); identically zero on
/// the smooth branch.
inline double equipartition_residual(double s) {
    const double c = std::cos(s);
    return 0.5 * c * c - obstacle_potential(std::sin(s));
}

/// Discrete Ginzburg-Landau energy
///   E^h(phi) = sum_e eps A(grad phi|_e) |e| + sum_i w_i Psi0(phi_i) / eps
/// with A = gamma^2 / 2; the gradient term is elementwise constant so the
/// vertex quadrature is exact on it.
inline double gl_energy(const FeMesh& m, const Anisotropy& aniso, double eps, const ScalarField& phi) {
    double e_grad = 0.0;
    const double area = m.element_area();
    for (int e = 0; e < m.element_count(); ++e)
        e_grad += area * gl_density(aniso, m.gradient_on_element(phi, e));
    double e_pot = 0.0;
    for (size_t i = 0; i < phi.size(); ++i) e_pot += m.lumped[i] * obstacle_potential(phi[i]);
    return eps * e_grad + e_pot / eps;
}

/// One time step of the mass-constrained variational inequality in nodal
/// form: find phi in [-1,1]^N with (phi,1)^h = m |Omega| such that
///   A phi = rhs0 - mu w   on inactive nodes,
/// where A = (eps/tau - alpha_hat/eps) diag(w) + alpha_hat eps K_B and
/// K_B is the P1 stiffness with the frozen matrix B(grad phi^{n-1}).
struct ViProblem {
    CsrMatrix matrix;
    std::vector<double> rhs0;
    std::vector<double> weights;      // lumped masses
    double domain_area{0.0};
    double diag_shift{0.0};           // (eps/tau - alpha_hat/eps)
    double potential_scale{0.0};      // alpha_hat/eps, seeds the secant bracket
};

/// Assemble the VI for one step. `sens` is the nodal compliance sensitivity
/// already paired with the hat functions (zero when there is no elasticity);
/// it enters the right side scaled by beta. Throws StepsizeTooLarge when
/// the lumped diagonal (eps/tau - alpha_hat/eps) is not positive.
///
/// By default B is frozen at grad phi^{n-1}. `b_source` lets the time
/// stepper re-freeze B at a newer iterate of the same step (see run()),
/// while the right side keeps using prev_phi.
inline void assemble_vi(ViProblem& p, const FeMesh& m, const Anisotropy& aniso,
                        double eps, double tau, double alpha_hat, double beta,
                        const ScalarField& prev_phi, const ScalarField& sens,
                        const ScalarField* b_source = nullptr) {
    const double shift = eps / tau - alpha_hat / eps;
    if (shift <= 0.0)
        throw StepsizeTooLarge("tau = " + std::to_string(tau) + " needs tau < eps^2/alpha_hat = " +
                               std::to_string(eps * eps / alpha_hat));

    if (p.matrix.n != m.node_count()) p.matrix = adjacency_pattern(m, 1);
    p.matrix.zero_values();
    p.weights = m.lumped;
    p.domain_area = m.domain.area();
    p.diag_shift = shift;
    p.potential_scale = alpha_hat / eps;

    const ScalarField& frozen = b_source ? *b_source : prev_phi;
    const double area = m.element_area();
    const double coef = alpha_hat * eps * area;
    for (int e = 0; e < m.element_count(); ++e) {
        const Triangle& t = m.elements[static_cast<size_t>(e)];
        const Mat2 b = bgn_matrix(aniso, m.gradient_on_element(frozen, e));
        const auto grads = m.hat_gradients(e);
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 3; ++c)
                p.matrix.add_at(t.v[a], t.v[c], coef * grads[a].dot(b * grads[c]));
    }
    for (int i = 0; i < m.node_count(); ++i)
        p.matrix.add_at(i, i, shift * m.lumped[static_cast<size_t>(i)]);

    p.rhs0.assign(static_cast<size_t>(m.node_count()), 0.0);
    const double r = eps / tau;
    for (size_t i = 0; i < p.rhs0.size(); ++i)
        p.rhs0[i] = r * m.lumped[i] * prev_phi[i] + (sens.empty() ? 0.0 : beta * sens[i]);
}

inline ViProblem assemble_vi(const FeMesh& m, const Anisotropy& aniso,
                             double eps, double tau, double alpha_hat, double beta,
                             const ScalarField& prev_phi, const ScalarField& sens = {}) {
    ViProblem p;
    assemble_vi(p, m, aniso, eps, tau, alpha_hat, beta, prev_phi, sens);
    return p;
}

struct ViSolution {
    ScalarField phi;
    double multiplier{0.0};
    int sweeps{0};  // total projected Gauss-Seidel sweeps across the secant search
};

namespace detail {

/// Projected Gauss-Seidel (with over-relaxation) for the box-constrained
/// system A phi = rhs0 - mu w, phi in [-1, 1]^N. Sequential fixed node
/// order; returns the number of sweeps. Throws after the 1e5-sweep cap.
/// omega = 1 is plain projected Gauss-Seidel; the projected SOR iteration
/// converges to the same unique solution for any omega in (0, 2).
inline int projected_gauss_seidel(const ViProblem& p, double mu, ScalarField& phi, double tol,
                                  double omega = 1.5) {
    const int n = p.matrix.n;
    const int* row_ptr = p.matrix.row_ptr.data();
    const int* col = p.matrix.col.data();
    const double* val = p.matrix.val.data();
    const double* rhs0 = p.rhs0.data();
    const double* w = p.weights.data();
    double* x = phi.data();
    constexpr int kMaxSweeps = 100000;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        double max_delta = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            double diag = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                const int j = col[k];
                row += val[k] * x[j];
                if (j == i) diag = val[k];
            }
            const double b = rhs0[i] - mu * w[i];
            const double old = x[i];
            // row includes diag * old, so the GS update is old + residual/diag
            const double candidate = std::clamp(old + omega * ((b - row) / diag), -1.0, 1.0);
            max_delta = std::max(max_delta, std::abs(candidate - old));
            x[i] = candidate;
        }
        if (max_delta < tol) return sweep;
    }
    throw InnerNotConverged("projected Gauss-Seidel did not reach tol within 1e5 sweeps");
}

}  // namespace detail

/// Solve the VI step. The outer secant iterates on the scalar shift mu until
/// the lumped mass matches m_target * |Omega| within mass_tol (an absolute
/// tolerance on the integral). `warm` seeds the inner iteration, normally
/// with phi^{n-1}; `mu_warm` seeds the multiplier search (NaN = no guess).
inline ViSolution solve_vi(const ViProblem& p, double m_target, double inner_tol = 1e-10,
                           double mass_tol_rel = 1e-8, const ScalarField* warm = nullptr,
                           double mu_warm = std::numeric_limits<double>::quiet_NaN()) {
    const double target = m_target * p.domain_area;
    const double mass_tol = mass_tol_rel * p.domain_area;

    ViSolution sol;
    sol.phi = warm ? *warm : ScalarField(static_cast<size_t>(p.matrix.n), m_target);

    const auto mass_at = [&](double mu) {
        sol.sweeps += detail::projected_gauss_seidel(p, mu, sol.phi, inner_tol);
        double s = 0.0;
        for (size_t i = 0; i < sol.phi.size(); ++i) s += p.weights[i] * sol.phi[i];
        return s - target;
    };

    // The residual is monotone non-increasing in mu. Starting from two
    // probes (a warm multiplier when available, otherwise 0 and the exact
    // multiplier of the spatially constant state), secant steps extrapolate
    // until a sign change brackets the root, then bisection safeguards the
    // remaining secant iterations.
    const bool warm_mu = std::isfinite(mu_warm);
    double mu0 = warm_mu ? mu_warm : 0.0;
    double f0 = mass_at(mu0);
    if (std::abs(f0) <= mass_tol) {
        sol.multiplier = mu0;
        return sol;
    }
    double mu1 = warm_mu ? mu_warm + (f0 > 0.0 ? 1.0 : -1.0) * 1e-3 * (1.0 + std::abs(mu_warm))
                         : p.potential_scale * m_target;
    if (mu1 == mu0) mu1 = f0 > 0.0 ? 1.0 : -1.0;
    double f1 = mass_at(mu1);

    // find a sign change; secant extrapolation with a growth cap, falling
    // back to geometric expansion when the local slope is useless
    double expand = std::max(std::abs(mu1 - mu0), 1e-3 * (1.0 + std::abs(mu1)));
    int attempts = 0;
    while (std::abs(f1) > mass_tol && (f0 > 0.0) == (f1 > 0.0)) {
        if (++attempts > 60)
            throw SecantStalled("no sign change after 60 bracket expansions");
        double mu_next;
        const double df = f1 - f0;
        if (df != 0.0 && (mu1 - mu0) != 0.0) {
            mu_next = mu1 - f1 * (mu1 - mu0) / df;
            const double max_jump = 8.0 * std::max(std::abs(mu1 - mu0), expand);
            if (!std::isfinite(mu_next) || std::abs(mu_next - mu1) > max_jump ||
                (mu_next - mu1) * (f1 > 0.0 ? 1.0 : -1.0) < 0.0)
                mu_next = mu1 + (f1 > 0.0 ? expand : -expand);
        } else {
            mu_next = mu1 + (f1 > 0.0 ? expand : -expand);
        }
        expand *= 2.0;
        mu0 = mu1;
        f0 = f1;
        mu1 = mu_next;
        f1 = mass_at(mu1);
    }
    if (std::abs(f1) <= mass_tol) {
        sol.multiplier = mu1;
        return sol;
    }

    double lo = std::min(mu0, mu1), hi = std::max(mu0, mu1);
    double mua = mu0, fa = f0, mub = mu1, fb = f1;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(fb) <= mass_tol) {
            sol.multiplier = mub;
            return sol;
        }
        double mu_next;
        const double df = fb - fa;
        if (df != 0.0) {
            mu_next = mub - fb * (mub - mua) / df;
            if (!(mu_next > lo && mu_next < hi)) mu_next = 0.5 * (lo + hi);
        } else {
            mu_next = 0.5 * (lo + hi);
        }
        const double f_next = mass_at(mu_next);
        // keep the bracket: f > 0 on the low side (mass decreasing in mu)
        if (f_next > 0.0)
            lo = mu_next;
        else
            hi = mu_next;
        mua = mub;
        fa = fb;
        mub = mu_next;
        fb = f_next;
        if (hi - lo < 1e-300) break;
    }
    if (std::abs(fb) <= mass_tol) {
        sol.multiplier = mub;
        return sol;
    }
    throw SecantStalled("secant iteration did not reach the mass tolerance");
}

/// Objective of one implicit time step (up to constants):
///   alpha_hat E_gl(phi) + (eps/2tau) |phi - prev|_h^2 - beta (sens, phi)
/// The variational inequality is its first-order condition on the
/// mass-constrained box.
inline double step_functional(const FeMesh& m, const Anisotropy& aniso, double eps, double tau,
                              double alpha_hat, double beta, const ScalarField& prev,
                              const ScalarField& sens, const ScalarField& phi) {
    double f = alpha_hat * gl_energy(m, aniso, eps, phi);
    const double half_rate = 0.5 * eps / tau;
    for (size_t i = 0; i < phi.size(); ++i) {
        const double d = phi[i] - prev[i];
        f += half_rate * m.lumped[i] * d * d;
        if (!sens.empty()) f -= beta * sens[i] * phi[i];
    }
    return f;
}

struct StepResult {
    ScalarField phi;
    double multiplier{0.0};
    long sweeps{0};
    int relinearizations{0};
};

/// One full implicit VI step. The first solve freezes B at grad phi^{n-1}
/// exactly as the time discretization prescribes; the linearization is then
/// re-frozen at the newest iterate (with a backtracking line search on the
/// step functional) until self-consistent. The line search keeps the step
/// functional non-increasing, which makes the discrete energy decay of the
/// g = 0 flow a structural property rather than a numerical accident.
inline StepResult vi_step(const FeMesh& m, ViProblem& scratch, const Anisotropy& aniso,
                          double eps, double tau, double alpha_hat, double beta,
                          const ScalarField& prev, const ScalarField& sens, double m_target,
                          double inner_tol = 1e-10, double mass_tol_rel = 1e-8, int max_relin = 30,
                          double mu_warm = std::numeric_limits<double>::quiet_NaN()) {
    StepResult out;
    // The secant enforces the mass constraint on every solve, so mass stays
    // exact through the line search (convex combinations of mass-exact
    // fields). Re-linearization stops once the iterate settles within
    // move_tol; the time-discretization error dominates well before that.
    const double move_tol = std::max(100.0 * inner_tol, 1e-6);

    assemble_vi(scratch, m, aniso, eps, tau, alpha_hat, beta, prev, sens);
    ViSolution sol = solve_vi(scratch, m_target, inner_tol, mass_tol_rel, &prev, mu_warm);
    out.sweeps = sol.sweeps;
    out.multiplier = sol.multiplier;
    out.relinearizations = 1;

    const auto f_of = [&](const ScalarField& phi) {
        return step_functional(m, aniso, eps, tau, alpha_hat, beta, prev, sens, phi);
    };
    const auto accept = [&](ScalarField& point, double& f_point, ScalarField&& candidate) {
        double f_cand = f_of(candidate);
        if (f_cand > f_point) {
            // damped acceptance: the model direction is a descent direction
            // for the step functional at the linearization point
            double theta = 1.0;
            ScalarField damped = candidate;
            for (int half = 0; half < 40 && f_cand > f_point; ++half) {
                theta *= 0.5;
                for (size_t i = 0; i < damped.size(); ++i)
                    damped[i] = point[i] + theta * (candidate[i] - point[i]);
                f_cand = f_of(damped);
            }
            if (f_cand > f_point) return false;
            candidate = std::move(damped);
        }
        point = std::move(candidate);
        f_point = f_cand;
        return true;
    };

    ScalarField point = prev;  // current accepted iterate
    double f_point = f_of(point);
    ScalarField candidate = std::move(sol.phi);

    for (int k = 0; k < max_relin; ++k) {
        ScalarField before = point;
        if (!accept(point, f_point, std::move(candidate))) break;
        double moved = 0.0;
        for (size_t i = 0; i < point.size(); ++i)
            moved = std::max(moved, std::abs(point[i] - before[i]));
        if (moved < move_tol || k + 1 >= max_relin) break;

        assemble_vi(scratch, m, aniso, eps, tau, alpha_hat, beta, prev, sens, &point);
        sol = solve_vi(scratch, m_target, inner_tol, mass_tol_rel, &point, out.multiplier);
        out.sweeps += sol.sweeps;
        out.multiplier = sol.multiplier;
        ++out.relinearizations;
        candidate = std::move(sol.phi);
    }
    out.phi = std::move(point);
    return out;
}

}  // namespace atop
