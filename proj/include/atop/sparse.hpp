#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "atop/errors.hpp"
#include "atop/mesh.hpp"

namespace atop {

/// Compressed sparse row matrix. The pattern is built once per mesh from
/// node adjacency and values are rewritten in place on every assembly, so
/// time stepping never reallocates.
struct CsrMatrix {
    int n{0};
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void zero_values() { std::fill(val.begin(), val.end(), 0.0); }

    int find(int row, int column) const {
        const int lo = row_ptr[static_cast<size_t>(row)];
        const int hi = row_ptr[static_cast<size_t>(row) + 1];
        const auto begin = col.begin() + lo;
        const auto end = col.begin() + hi;
        const auto it = std::lower_bound(begin, end, column);
        assert(it != end && *it == column);
        return static_cast<int>(it - col.begin());
    }

    void add_at(int row, int column, double v) { val[static_cast<size_t>(find(row, column))] += v; }

    double diag(int row) const { return val[static_cast<size_t>(find(row, row))]; }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(static_cast<size_t>(n), 0.0);
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = row_ptr[static_cast<size_t>(r)]; k < row_ptr[static_cast<size_t>(r) + 1]; ++k)
                s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
            y[static_cast<size_t>(r)] = s;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y;
        multiply(x, y);
        return y;
    }
};

/// Sparsity pattern of the P1 stiffness with `dofs_per_node` unknowns per
/// mesh node (1 for scalar fields, 2 for displacements).
inline CsrMatrix adjacency_pattern(const FeMesh& m, int dofs_per_node) {
    const int nn = m.node_count();
    std::vector<std::vector<int>> adj(static_cast<size_t>(nn));
    for (int i = 0; i < nn; ++i) adj[static_cast<size_t>(i)].push_back(i);
    for (const Triangle& t : m.elements)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b) adj[static_cast<size_t>(t.v[a])].push_back(t.v[b]);
    CsrMatrix A;
    A.n = nn * dofs_per_node;
    A.row_ptr.assign(static_cast<size_t>(A.n) + 1, 0);
    for (int i = 0; i < nn; ++i) {
        auto& nodes = adj[static_cast<size_t>(i)];
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        for (int d = 0; d < dofs_per_node; ++d)
            A.row_ptr[static_cast<size_t>(i * dofs_per_node + d) + 1] =
                static_cast<int>(nodes.size()) * dofs_per_node;
    }
    for (size_t r = 0; r < static_cast<size_t>(A.n); ++r) A.row_ptr[r + 1] += A.row_ptr[r];
    A.col.resize(static_cast<size_t>(A.row_ptr.back()));
    for (int i = 0; i < nn; ++i) {
        const auto& nodes = adj[static_cast<size_t>(i)];
        for (int d = 0; d < dofs_per_node; ++d) {
            int k = A.row_ptr[static_cast<size_t>(i * dofs_per_node + d)];
            for (int j : nodes)
                for (int e = 0; e < dofs_per_node; ++e) A.col[static_cast<size_t>(k++)] = j * dofs_per_node + e;
        }
    }
    A.val.assign(A.col.size(), 0.0);
    return A;
}

struct CgResult {
    int iterations{0};
    double relative_residual{0.0};
};

/// Jacobi-preconditioned conjugate gradients. `x` carries the initial guess
/// (warm starts across time steps) and receives the solution. Throws
/// SolverDiverged when the residual cannot even reach tol * 1e3 within
/// 20 * n iterations.
inline CgResult cg_solve(const CsrMatrix& A, const std::vector<double>& b,
                         std::vector<double>& x, double tol) {
    const size_t n = static_cast<size_t>(A.n);
    assert(b.size() == n);
    if (x.size() != n) x.assign(n, 0.0);

    std::vector<double> inv_diag(n);
    for (int r = 0; r < A.n; ++r) {
        const double d = A.diag(r);
        inv_diag[static_cast<size_t>(r)] = d != 0.0 ? 1.0 / d : 1.0;
    }

    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }

    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.multiply(x, Ap);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    for (size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (size_t i = 0; i < n; ++i) rz += r[i] * z[i];

    const int max_iter = 20 * A.n;
    double res = 0.0;
    for (double v : r) res += v * v;
    res = std::sqrt(res) / bnorm;

    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        A.multiply(p, Ap);
        double pAp = 0.0;
        for (size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) break;  // matrix not SPD on this subspace
        const double alpha = rz / pAp;
        for (size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        res = 0.0;
        for (double v : r) res += v * v;
        res = std::sqrt(res) / bnorm;
        for (size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        double rz_new = 0.0;
        for (size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (res > tol * 1e3)
        throw SolverDiverged("cg stalled at relative residual " + std::to_string(res));
    return {it, res};
}

}  // namespace atop
