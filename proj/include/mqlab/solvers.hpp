#pragma once

// Solver kernels: unpreconditioned conjugate gradients (iteration counts then
// track sqrt(kappa) directly, which the complexity model relies on) and a dense
// LU reference solve used as the oracle route in tests.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/sparse.hpp"

namespace mqlab {

using ComplexVector = std::vector<std::complex<double>>;

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const ComplexVector& v) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

struct SolveStats {
    std::size_t iterations = 0;
    double residual_norm = 0.0;
    std::size_t matvec_count = 0;
};

struct SolveFailure : std::runtime_error {
    SolveFailure(const std::string& what, std::vector<double> best, SolveStats stats)
        : std::runtime_error(what), best_iterate(std::move(best)), stats(stats) {}
    std::vector<double> best_iterate;
    SolveStats stats;
};

inline std::pair<std::vector<double>, SolveStats> cg_solve(const SparseSymMatrix& a,
                                                           const std::vector<double>& rhs,
                                                           double tol) {
    if (tol <= 0.0) throw std::invalid_argument("cg_solve: tol must be positive");
    const std::size_t n = a.n_rows();
    if (rhs.size() != n) throw std::invalid_argument("cg_solve: rhs size mismatch");

    SolveStats stats;
    std::vector<double> x(n, 0.0);
    std::vector<double> r = rhs;  // r = rhs - A*0
    const double rhs_norm = norm2(rhs);
    if (rhs_norm == 0.0) return {x, stats};

    std::vector<double> p = r, ap(n);
    double rr = dot(r, r);
    const std::size_t max_iter = 10 * n;
    while (stats.iterations < max_iter) {
        if (std::sqrt(rr) / rhs_norm <= tol) break;
        a.matvec(p, ap);
        ++stats.matvec_count;
        const double pap = dot(p, ap);
        if (pap <= 0.0) {
            stats.residual_norm = std::sqrt(rr) / rhs_norm;
            throw SolveFailure("cg_solve: negative curvature direction at iteration " +
                                   std::to_string(stats.iterations) +
                                   " (matrix not positive definite), p^T A p = " +
                                   std::to_string(pap),
                               x, stats);
        }
        const double alpha = rr / pap;
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        ++stats.iterations;
    }
    stats.residual_norm = std::sqrt(rr) / rhs_norm;
    if (stats.residual_norm > tol)
        throw SolveFailure("cg_solve: no convergence after " + std::to_string(max_iter) +
                               " iterations, relative residual " +
                               std::to_string(stats.residual_norm),
                           x, stats);
    return {x, stats};
}

inline Eigen::MatrixXd to_dense(const SparseSymMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_rows()),
                                              static_cast<Eigen::Index>(a.n_rows()));
    for (std::size_t i = 0; i < a.n_rows(); ++i)
        for (const auto& e : a.row(i))
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.col)) = e.value;
    return m;
}

inline std::vector<double> dense_direct_solve(const SparseSymMatrix& a,
                                              const std::vector<double>& rhs) {
    const std::size_t n = a.n_rows();
    if (n > 20000) throw std::invalid_argument("dense_direct_solve: beyond desk-scale guard");
    if (rhs.size() != n) throw std::invalid_argument("dense_direct_solve: rhs size mismatch");
    Eigen::MatrixXd m = to_dense(a);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    const double pivot_min = diag.minCoeff();
    const double pivot_max = diag.maxCoeff();
    if (pivot_min <= pivot_max * 1e-15)
        throw std::runtime_error("dense_direct_solve: singular to machine precision (min pivot " +
                                 std::to_string(pivot_min) + ", max pivot " +
                                 std::to_string(pivot_max) + ")");
    Eigen::VectorXd x = lu.solve(b);
    return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace mqlab
