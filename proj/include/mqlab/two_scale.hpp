#pragma once

// Coupled homogenized operators: the two-scale matrix (blocks A11, A12, A21,
// A22) and its reiterated n >= 2 generalization, assembled from the symmetric
// bilinear form
//   B(u, v) = int_{Omega x Y1 x ... x Yn} A(x,y) (grad_x u0 + sum_k grad_{y_k} u_k)
//                                               . (grad_x v0 + sum_k grad_{y_k} v_k)
// Unknown ordering is [u_n; ...; u_1; u_0]; u_k lives on the product grid with
// boundary-including macro factors (indices 0..N+1, basis scaled 1/sqrt(h) per
// direction) and interior range 1..N in its own oscillation variable.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mqlab/coefficient.hpp"
#include "mqlab/fem.hpp"
#include "mqlab/mesh.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

struct HomogenizedSystem {
    SparseSymMatrix matrix;       // full coupled operator
    std::vector<double> force;    // [0; ...; 0; F]
    std::size_t n = 1;            // number of corrector levels
    std::vector<std::size_t> block_sizes;  // sizes in storage order u_n..u_0
    std::size_t u0_offset = 0;    // start of the u0 block
};

namespace detail {

// size of the u_k block: (N+2)^{kd} * N^d
inline std::size_t level_size(std::size_t k, std::size_t d, std::size_t N) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < k * d; ++i) s *= (N + 2);
    for (std::size_t i = 0; i < d; ++i) s *= N;
    return s;
}

// A averaged over the trailing variable groups P+1..n (composite Gauss-3 with
// 16 subcells per unit period on each averaged dimension)
inline double averaged_coefficient(const MultiscaleCoefficient& coeff, std::size_t d,
                                   std::size_t P, std::size_t n, const std::vector<double>& x,
                                   std::vector<std::vector<double>>& ys) {
    if (P >= n) return coeff.evaluate(x, ys);
    static const double x3[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double w3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const std::size_t m = 16;
    const double dt = 1.0 / static_cast<double>(m);
    // integrate out dimension after dimension of group P+1 first, recursing
    std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t g,
                                                              std::size_t dim) -> double {
        if (g == n) return coeff.evaluate(x, ys);
        if (dim == d) return rec(g + 1, 0);
        double acc = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            const double mid = (static_cast<double>(c) + 0.5) * dt;
            for (int i = 0; i < 3; ++i) {
                ys[g][dim] = mid + 0.5 * dt * x3[i];
                acc += 0.5 * dt * w3[i] * rec(g, dim + 1);
            }
        }
        return acc;
    };
    return rec(P, 0);
}

}  // namespace detail

inline HomogenizedSystem assemble_homogenized(
    const MultiscaleCoefficient& coeff, const TensorMesh& mesh, std::size_t n,
    const std::function<double(const std::vector<double>&)>& f,
    std::size_t dof_budget = 10'000'000) {
    coeff.validate();
    if (n < 1) throw std::invalid_argument("assemble_homogenized: n must be >= 1");
    if (coeff.n != 0 && coeff.n != n)
        throw std::invalid_argument("assemble_homogenized: coefficient scale count mismatch");
    const std::size_t d = mesh.d;
    const std::size_t N = mesh.N;
    const double h = mesh.h();
    const double sqrt_h = std::sqrt(h);

    std::vector<std::size_t> sizes(n + 1);  // sizes[k] = dof of u_k
    std::size_t total = 0;
    for (std::size_t k = 0; k <= n; ++k) {
        sizes[k] = detail::level_size(k, d, N);
        total += sizes[k];
    }
    if (total > dof_budget)
        throw std::runtime_error("assemble_homogenized: dof " + std::to_string(total) +
                                 " exceeds budget " + std::to_string(dof_budget));

    // storage order u_n .. u_0
    std::vector<std::size_t> offset(n + 1);
    {
        std::size_t off = 0;
        for (std::size_t k = n + 1; k-- > 0;) {
            offset[k] = off;
            off += sizes[k];
        }
    }

    MatrixBuilder builder(total);

    // assemble block pair (kt = trial level, ks = test level) for ks >= kt and
    // mirror; gradients act on group kt (trial) and ks (test)
    for (std::size_t ks = 0; ks <= n; ++ks) {
        for (std::size_t kt = 0; kt <= ks; ++kt) {
            const std::size_t P = ks;  // deepest variable group involved
            const std::size_t D = (P + 1) * d;
            const detail::RefQuad q = detail::element_quadrature(h, 1.0, D);
            const std::size_t nq = q.t.size();

            const std::size_t nt = std::size_t{1} << ((kt + 1) * d);
            const std::size_t nsz = std::size_t{1} << ((ks + 1) * d);

            std::vector<std::size_t> cell(D, 0), cradix(D, N + 1), qidx(D, 0), qradix(D, nq);
            std::vector<double> x(d);
            std::vector<std::vector<double>> ys(n, std::vector<double>(d, 0.5));

            // per trial/test local node: flattened global index, validity,
            // value product, and per-direction deriv ratios
            std::vector<std::size_t> gt(nt), gs(nsz);
            std::vector<bool> okt(nt), oks(nsz);
            std::vector<double> pt(nt), ps(nsz);
            std::vector<double> rt(nt * d), rs(nsz * d);
            std::vector<double> acc(nt * nsz);

            auto flatten_node = [&](std::size_t bits, std::size_t k, std::size_t& flat) -> bool {
                // dims of groups 0..k; radix N+2 for groups <k, N for group k
                flat = 0;
                const std::size_t nd = (k + 1) * d;
                for (std::size_t m = 0; m < nd; ++m) {
                    const std::size_t g = cell[m] + ((bits >> (nd - 1 - m)) & 1u);
                    const bool own_group = m >= k * d;
                    if (own_group) {
                        if (g < 1 || g > N) return false;
                        flat = flat * N + (g - 1);
                    } else {
                        flat = flat * (N + 2) + g;
                    }
                }
                return true;
            };

            do {
                for (std::size_t u = 0; u < nt; ++u) okt[u] = flatten_node(u, kt, gt[u]);
                for (std::size_t v = 0; v < nsz; ++v) oks[v] = flatten_node(v, ks, gs[v]);
                std::fill(acc.begin(), acc.end(), 0.0);

                std::fill(qidx.begin(), qidx.end(), 0);
                do {
                    double wq = 1.0;
                    for (std::size_t m = 0; m < D; ++m)
                        wq *= q.w[qidx[m]] * h;
                    for (std::size_t m = 0; m < D; ++m) {
                        const double z = (static_cast<double>(cell[m]) + q.t[qidx[m]]) * h;
                        if (m < d)
                            x[m] = z;
                        else
                            ys[m / d - 1][m % d] = z;
                    }
                    const double a = detail::averaged_coefficient(coeff, d, P, n, x, ys);

                    // per-node products; the 1/sqrt(h) macro scaling is folded
                    // into each scaled-dimension factor
                    auto node_products = [&](std::size_t bits, std::size_t k, double& prod,
                                             double* ratios) {
                        const std::size_t nd = (k + 1) * d;
                        prod = 1.0;
                        for (std::size_t l = 0; l < d; ++l) ratios[l] = 0.0;
                        for (std::size_t m = 0; m < nd; ++m) {
                            const double t = q.t[qidx[m]];
                            const bool bit = (bits >> (nd - 1 - m)) & 1u;
                            double val = bit ? t : 1.0 - t;
                            double der = (bit ? 1.0 : -1.0) / h;
                            if (m < k * d) {
                                val /= sqrt_h;
                            }
                            prod *= val;
                            if (m >= k * d) ratios[m - k * d] = der / val;
                        }
                    };
                    for (std::size_t u = 0; u < nt; ++u)
                        if (okt[u]) node_products(u, kt, pt[u], &rt[u * d]);
                    for (std::size_t v = 0; v < nsz; ++v)
                        if (oks[v]) node_products(v, ks, ps[v], &rs[v * d]);

                    const double wa = wq * a;
                    for (std::size_t u = 0; u < nt; ++u) {
                        if (!okt[u]) continue;
                        const double pu = wa * pt[u];
                        for (std::size_t v = 0; v < nsz; ++v) {
                            if (!oks[v]) continue;
                            double g = 0.0;
                            for (std::size_t l = 0; l < d; ++l) g += rt[u * d + l] * rs[v * d + l];
                            acc[u * nsz + v] += pu * ps[v] * g;
                        }
                    }
                } while (next_index(qidx, qradix));

                for (std::size_t u = 0; u < nt; ++u) {
                    if (!okt[u]) continue;
                    for (std::size_t v = 0; v < nsz; ++v) {
                        if (!oks[v]) continue;
                        const double val = acc[u * nsz + v];
                        builder.add(offset[ks] + gs[v], offset[kt] + gt[u], val);
                        if (ks != kt) builder.add(offset[kt] + gt[u], offset[ks] + gs[v], val);
                    }
                }
            } while (next_index(cell, cradix));
        }
    }

    HomogenizedSystem sys;
    sys.matrix = builder.build(true, 1e-14);
    sys.n = n;
    for (std::size_t k = n + 1; k-- > 0;) sys.block_sizes.push_back(sizes[k]);
    sys.u0_offset = offset[0];
    sys.force.assign(total, 0.0);
    const auto F = assemble_force(f, mesh);
    for (std::size_t i = 0; i < F.size(); ++i) sys.force[offset[0] + i] = F[i];
    return sys;
}

inline HomogenizedSystem assemble_two_scale(
    const MultiscaleCoefficient& coeff, const TensorMesh& mesh,
    const std::function<double(const std::vector<double>&)>& f) {
    return assemble_homogenized(coeff, mesh, 1, f);
}

inline HomogenizedSystem assemble_reiterated(
    const MultiscaleCoefficient& coeff, const TensorMesh& mesh, std::size_t n,
    const std::function<double(const std::vector<double>&)>& f) {
    if (n < 2) throw std::invalid_argument("assemble_reiterated: n must be >= 2");
    return assemble_homogenized(coeff, mesh, n, f);
}

// reference stiffness of Theorem 7/8: blockdiag((1/h^d) M x ... x K, ..., K)
// with boundary-including (extended) macro mass factors
inline SparseSymMatrix homogenized_stiffness_reference(const TensorMesh& mesh, std::size_t n) {
    const double h = mesh.h();
    SparseSymMatrix m_ext_1 = mass_1d_ext(mesh);
    SparseSymMatrix m_ext = m_ext_1;
    for (std::size_t l = 1; l < mesh.d; ++l) m_ext = kron(m_ext, m_ext_1);
    SparseSymMatrix k_d = stiffness_d(mesh);
    const double hd = std::pow(h, static_cast<double>(mesh.d));

    std::vector<SparseSymMatrix> blocks;
    for (std::size_t k = n + 1; k-- > 0;) {
        // u_k block: (M_ext/h^d)^{x k} x K
        SparseSymMatrix blk = k_d;
        for (std::size_t r = 0; r < k; ++r) blk = kron(scale(1.0 / hd, m_ext), blk);
        blocks.push_back(blk);
    }
    std::vector<const SparseSymMatrix*> ptrs;
    for (const auto& b : blocks) ptrs.push_back(&b);
    return block_diag(ptrs);
}

}  // namespace mqlab
