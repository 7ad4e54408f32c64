#pragma once

// Tensor-product P1 (Q1) finite elements on [0,1]^d: closed-form 1D matrices,
// their Kronecker compositions, and quadrature-based assembly of the canonical
// multiscale operator int A(x, x/eps) grad phi . grad phi.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqlab/coefficient.hpp"
#include "mqlab/mesh.hpp"
#include "mqlab/quadrature.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

struct FemSolution {
    TensorMesh mesh;
    // 0 for u0, k >= 1 for the k-th corrector, -1 for the canonical solution
    int level = -1;
    std::vector<double> coefficients;
};

inline SparseSymMatrix mass_1d(const TensorMesh& mesh) {
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    MatrixBuilder b(N);
    for (std::size_t i = 0; i < N; ++i) {
        b.add(i, i, 2.0 * h / 3.0);
        if (i + 1 < N) {
            b.add(i, i + 1, h / 6.0);
            b.add(i + 1, i, h / 6.0);
        }
    }
    return b.build(true);
}

inline SparseSymMatrix stiffness_1d(const TensorMesh& mesh) {
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    MatrixBuilder b(N);
    for (std::size_t i = 0; i < N; ++i) {
        b.add(i, i, 2.0 / h);
        if (i + 1 < N) {
            b.add(i, i + 1, -1.0 / h);
            b.add(i + 1, i, -1.0 / h);
        }
    }
    return b.build(true);
}

// mass matrix on the boundary-including macro index range 0..N+1; the corner
// half-hats integrate to h/3 on the diagonal
inline SparseSymMatrix mass_1d_ext(const TensorMesh& mesh) {
    const std::size_t n = mesh.N + 2;
    const double h = mesh.h();
    MatrixBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.add(i, i, (i == 0 || i + 1 == n) ? h / 3.0 : 2.0 * h / 3.0);
        if (i + 1 < n) {
            b.add(i, i + 1, h / 6.0);
            b.add(i + 1, i, h / 6.0);
        }
    }
    return b.build(true);
}

inline SparseSymMatrix mass_d(const TensorMesh& mesh) {
    SparseSymMatrix m = mass_1d(mesh);
    SparseSymMatrix out = m;
    for (std::size_t l = 1; l < mesh.d; ++l) out = kron(out, m);
    return out;
}

// Kronecker sum: K1 placed at each position with M1 elsewhere
inline SparseSymMatrix stiffness_d(const TensorMesh& mesh) {
    SparseSymMatrix m1 = mass_1d(mesh);
    SparseSymMatrix k1 = stiffness_1d(mesh);
    SparseSymMatrix out = identity(0);
    bool first = true;
    for (std::size_t pos = 0; pos < mesh.d; ++pos) {
        SparseSymMatrix term = (pos == 0) ? k1 : m1;
        for (std::size_t l = 1; l < mesh.d; ++l) term = kron(term, (pos == l) ? k1 : m1);
        out = first ? term : add_scaled(1.0, out, 1.0, term);
        first = false;
    }
    return out;
}

namespace detail {

// 1D quadrature nodes/weights on [0,1]: m subcells, either Gauss-5 or Gauss-3
struct RefQuad {
    std::vector<double> t, w;
};

inline RefQuad reference_quadrature(std::size_t subcells, bool high_order) {
    RefQuad q;
    const double dt = 1.0 / static_cast<double>(subcells);
    if (high_order) {
        for (std::size_t c = 0; c < subcells; ++c) {
            const double mid = (static_cast<double>(c) + 0.5) * dt;
            for (int i = 0; i < Gauss5::n; ++i) {
                q.t.push_back(mid + 0.5 * dt * Gauss5::x[i]);
                q.w.push_back(0.5 * dt * Gauss5::w[i]);
            }
        }
    } else {
        static const double x3[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
        static const double w3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        for (std::size_t c = 0; c < subcells; ++c) {
            const double mid = (static_cast<double>(c) + 0.5) * dt;
            for (int i = 0; i < 3; ++i) {
                q.t.push_back(mid + 0.5 * dt * x3[i]);
                q.w.push_back(0.5 * dt * w3[i]);
            }
        }
    }
    return q;
}

// subcell policy: resolve the fastest oscillation (edge <= eps_n/8) with at
// least 3 subcells per element; high dimensional products fall back to a
// single Gauss-3 subcell to stay within desk-scale budgets
inline RefQuad element_quadrature(double h, double eps_min, std::size_t total_dims,
                                  std::size_t budget = 4096) {
    if (total_dims > 2) return reference_quadrature(1, false);
    std::size_t m = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(8.0 * h / eps_min)));
    if (m > budget)
        throw std::runtime_error("assembly: required quadrature resolution " + std::to_string(m) +
                                 " subcells per element exceeds budget " + std::to_string(budget));
    return reference_quadrature(m, true);
}

}  // namespace detail

// A_{i,i'} = int_Omega a(x) grad phi_i . grad phi_i' dx on interior nodes
inline SparseSymMatrix assemble_canonical(const MultiscaleCoefficient& coeff,
                                          const TensorMesh& mesh) {
    coeff.validate();
    const std::size_t d = mesh.d;
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    const detail::RefQuad q = detail::element_quadrature(h, coeff.eps_min(), d);
    const std::size_t nq = q.t.size();
    const std::size_t n_local = std::size_t{1} << d;

    MatrixBuilder builder(mesh.interior_dof());
    std::vector<std::size_t> cell(d, 0), radix(d, N + 1), qidx(d, 0), qradix(d, nq);
    std::vector<double> x(d);
    std::vector<double> local((n_local * n_local), 0.0);
    std::vector<std::size_t> global(n_local);
    std::vector<bool> interior(n_local);
    const std::vector<std::size_t> node_radix(d, N);

    do {
        // global indices of this cell's corners, flattened over interior nodes
        for (std::size_t u = 0; u < n_local; ++u) {
            bool ok = true;
            std::size_t flat = 0;
            for (std::size_t l = 0; l < d; ++l) {
                const std::size_t g = cell[l] + ((u >> (d - 1 - l)) & 1u);
                if (g < 1 || g > N) ok = false;
                flat = flat * N + (g >= 1 ? g - 1 : 0);
            }
            interior[u] = ok;
            global[u] = flat;
        }
        std::fill(local.begin(), local.end(), 0.0);

        std::fill(qidx.begin(), qidx.end(), 0);
        do {
            double wq = 1.0;
            for (std::size_t l = 0; l < d; ++l) {
                x[l] = (static_cast<double>(cell[l]) + q.t[qidx[l]]) * h;
                wq *= q.w[qidx[l]] * h;
            }
            const double a = coeff.at_physical(x);
            for (std::size_t u = 0; u < n_local; ++u) {
                if (!interior[u]) continue;
                for (std::size_t v = 0; v < n_local; ++v) {
                    if (!interior[v]) continue;
                    double grad_dot = 0.0;
                    for (std::size_t l = 0; l < d; ++l) {
                        double term = 1.0;
                        for (std::size_t m = 0; m < d; ++m) {
                            const double t = q.t[qidx[m]];
                            const bool bu = (u >> (d - 1 - m)) & 1u;
                            const bool bv = (v >> (d - 1 - m)) & 1u;
                            if (m == l)
                                term *= (bu ? 1.0 : -1.0) * (bv ? 1.0 : -1.0) / (h * h);
                            else
                                term *= (bu ? t : 1.0 - t) * (bv ? t : 1.0 - t);
                        }
                        grad_dot += term;
                    }
                    local[u * n_local + v] += wq * a * grad_dot;
                }
            }
        } while (next_index(qidx, qradix));

        for (std::size_t u = 0; u < n_local; ++u) {
            if (!interior[u]) continue;
            for (std::size_t v = 0; v < n_local; ++v) {
                if (!interior[v]) continue;
                builder.add(global[u], global[v], local[u * n_local + v]);
            }
        }
    } while (next_index(cell, radix));

    return builder.build(true);
}

// F_i = int f phi_i dx
inline std::vector<double> assemble_force(const std::function<double(const std::vector<double>&)>& f,
                                          const TensorMesh& mesh) {
    const std::size_t d = mesh.d;
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    const detail::RefQuad q = detail::reference_quadrature(3, true);
    const std::size_t nq = q.t.size();
    const std::size_t n_local = std::size_t{1} << d;

    std::vector<double> out(mesh.interior_dof(), 0.0);
    std::vector<std::size_t> cell(d, 0), radix(d, N + 1), qidx(d, 0), qradix(d, nq);
    std::vector<double> x(d);

    do {
        std::fill(qidx.begin(), qidx.end(), 0);
        do {
            double wq = 1.0;
            for (std::size_t l = 0; l < d; ++l) {
                x[l] = (static_cast<double>(cell[l]) + q.t[qidx[l]]) * h;
                wq *= q.w[qidx[l]] * h;
            }
            const double fv = f(x);
            for (std::size_t u = 0; u < n_local; ++u) {
                bool ok = true;
                std::size_t flat = 0;
                double phi = 1.0;
                for (std::size_t l = 0; l < d; ++l) {
                    const std::size_t g = cell[l] + ((u >> (d - 1 - l)) & 1u);
                    if (g < 1 || g > N) {
                        ok = false;
                        break;
                    }
                    flat = flat * N + (g - 1);
                    const double t = q.t[qidx[l]];
                    phi *= ((u >> (d - 1 - l)) & 1u) ? t : 1.0 - t;
                }
                if (ok) out[flat] += wq * fv * phi;
            }
        } while (next_index(qidx, qradix));
    } while (next_index(cell, radix));

    return out;
}

// discrete L2 norm of a nodal field through the mass matrix (exact for P1)
inline double l2_norm_mass(const SparseSymMatrix& mass, const std::vector<double>& v) {
    return std::sqrt(std::max(0.0, dot(v, mass.apply(v))));
}

// d=1: L2 distance between the P1 interpolant of nodal values and a smooth
// function, per-element Gauss-5
inline double l2_error_vs_function(const TensorMesh& mesh, const std::vector<double>& nodal,
                                   const std::function<double(double)>& exact) {
    if (mesh.d != 1) throw std::invalid_argument("l2_error_vs_function: d=1 only");
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    auto node = [&](std::size_t g) { return (g >= 1 && g <= N) ? nodal[g - 1] : 0.0; };
    double acc = 0.0;
    for (std::size_t c = 0; c <= N; ++c) {
        const double x0 = static_cast<double>(c) * h;
        for (int i = 0; i < Gauss5::n; ++i) {
            const double t = 0.5 + 0.5 * Gauss5::x[i];
            const double x = x0 + t * h;
            const double uh = (1.0 - t) * node(c) + t * node(c + 1);
            const double e = uh - exact(x);
            acc += 0.5 * h * Gauss5::w[i] * e * e;
        }
    }
    return std::sqrt(acc);
}

}  // namespace mqlab
