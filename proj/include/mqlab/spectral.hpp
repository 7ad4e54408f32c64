#pragma once

// Spectral measurement: extreme eigenvalues by Lanczos (full reorthogonalization,
// desk scale), sigma-based condition numbers for the nonsymmetric global systems,
// and verify_bounds reports that evaluate each operator family's printed
// condition-number constant against measurement.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mqlab/coefficient.hpp"
#include "mqlab/fem.hpp"
#include "mqlab/solvers.hpp"
#include "mqlab/sparse.hpp"
#include "mqlab/time_integrators.hpp"
#include "mqlab/two_scale.hpp"

namespace mqlab {

enum class SpectralMethod { eigen_symmetric, singular_values };

struct SpectralReport {
    std::size_t s = 0;
    double max_entry = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    double theory_bound_kappa = 0.0;
    bool bound_satisfied = false;
    SpectralMethod method = SpectralMethod::eigen_symmetric;
};

// extreme eigenvalues of a symmetric matrix by Lanczos with full
// reorthogonalization; converged when both extreme Ritz residuals
// |beta_k e_k^T y| fall below tol * |theta|. Cross-checked against a dense
// eigensolve at small sizes. max_iter = 0 picks min(n, 600).
inline std::pair<double, double> extreme_eigs(const SparseSymMatrix& a, double tol,
                                              std::size_t max_iter = 0) {
    if (!(tol > 0.0)) throw std::invalid_argument("extreme_eigs: tol must be positive");
    const std::size_t n = a.n_rows();
    if (n == 0) throw std::invalid_argument("extreme_eigs: empty matrix");
    if (max_iter == 0) max_iter = std::min<std::size_t>(n, 600);
    max_iter = std::min(max_iter, n);

    // deterministic start vector with no accidental symmetry
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> basis;
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    std::vector<double> alpha, beta;  // tridiagonal entries
    std::vector<double> av(n), prev(n, 0.0);
    std::vector<std::string> history;
    bool breakdown = false;

    auto ritz = [&](double& tmin, double& tmax, double& rmin, double& rmax) {
        const auto k = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            t(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < k)
                t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        tmin = es.eigenvalues()(0);
        tmax = es.eigenvalues()(k - 1);
        const double bk = beta.empty() ? 0.0 : std::abs(beta.back());
        rmin = bk * std::abs(es.eigenvectors()(k - 1, 0));
        rmax = bk * std::abs(es.eigenvectors()(k - 1, k - 1));
    };

    double tmin = 0.0, tmax = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        basis.push_back(v);
        a.matvec(v, av);
        const double al = dot(v, av);
        alpha.push_back(al);
        for (std::size_t i = 0; i < n; ++i) av[i] -= al * v[i];
        if (it > 0) axpy(-beta.back(), prev, av);
        // full reorthogonalization keeps the Ritz extremes trustworthy
        for (const auto& b : basis) axpy(-dot(b, av), b, av);
        const double bn = norm2(av);
        if (alpha.size() == n || bn <= 1e-12 * std::max(std::abs(al), 1.0)) {
            breakdown = true;  // invariant subspace: Ritz values are exact
            break;
        }
        beta.push_back(bn);
        prev = v;
        for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / bn;

        if ((it + 1) % 10 == 0 || it + 1 == max_iter) {
            double rmin, rmax;
            ritz(tmin, tmax, rmin, rmax);
            const double scale = std::max(std::abs(tmin), std::abs(tmax));
            history.push_back("k=" + std::to_string(it + 1) + " theta=[" +
                              std::to_string(tmin) + ", " + std::to_string(tmax) +
                              "] resid=[" + std::to_string(rmin) + ", " +
                              std::to_string(rmax) + "]");
            if (rmin <= tol * scale && rmax <= tol * scale) {
                breakdown = true;
                break;
            }
        }
    }
    if (!breakdown) {
        std::string msg = "extreme_eigs: no convergence after " + std::to_string(max_iter) +
                          " iterations; Ritz history:";
        const std::size_t tail = history.size() > 5 ? history.size() - 5 : 0;
        for (std::size_t i = tail; i < history.size(); ++i) msg += "\n  " + history[i];
        throw std::runtime_error(msg);
    }
    {
        double rmin, rmax;
        ritz(tmin, tmax, rmin, rmax);
    }
    if (n <= 2000) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(a), Eigen::EigenvaluesOnly);
        const double dmin = es.eigenvalues()(0);
        const double dmax = es.eigenvalues()(static_cast<Eigen::Index>(n) - 1);
        const double scale = std::max(std::abs(dmin), std::abs(dmax));
        if (std::abs(tmin - dmin) > 100.0 * tol * scale ||
            std::abs(tmax - dmax) > 100.0 * tol * scale)
            throw std::runtime_error("extreme_eigs: Lanczos/dense cross-check mismatch: (" +
                                     std::to_string(tmin) + ", " + std::to_string(tmax) +
                                     ") vs (" + std::to_string(dmin) + ", " +
                                     std::to_string(dmax) + ")");
    }
    return {tmin, tmax};
}

// sigma_max/sigma_min of a (generally nonsymmetric) dense matrix; the record-only
// route for the global lower-bidiagonal systems
inline double sigma_kappa(const Eigen::MatrixXd& m) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

enum class OperatorFamily {
    elliptic_canonical,
    elliptic_two_scale,
    parabolic_canonical,
    parabolic_homogenized,
    wave_canonical,
    wave_homogenized,
};

struct BoundsCase {
    OperatorFamily family = OperatorFamily::elliptic_canonical;
    MultiscaleCoefficient coeff;
    std::size_t d = 1;
    std::size_t N = 7;   // interior nodes per direction, h = 1/(N+1)
    double dt = 0.0;     // required for the time-dependent families
    double eig_tol = 1e-8;
    std::size_t eig_max_iter = 0;  // 0: the extreme_eigs default budget
};

namespace detail {

// place a block at diagonal offset inside an n x n zero matrix
inline SparseSymMatrix embed_at(const SparseSymMatrix& m, std::size_t n, std::size_t offset) {
    MatrixBuilder b(n);
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        for (const auto& e : m.row(i)) b.add(i + offset, e.col + offset, e.value);
    return b.build(true);
}

inline std::size_t max_row_nnz(const SparseSymMatrix& a, std::size_t row_begin,
                               std::size_t row_end) {
    std::size_t s = 0;
    for (std::size_t i = row_begin; i < row_end; ++i) s = std::max(s, a.row(i).size());
    return s;
}

}  // namespace detail

// evaluate the printed condition-number constant of one operator family against
// the measured extremes of its symmetric carrier
inline SpectralReport verify_bounds(const BoundsCase& c) {
    c.coeff.validate();
    if (c.d == 0) throw std::invalid_argument("verify_bounds: d must be positive");
    const bool time_dependent = c.family != OperatorFamily::elliptic_canonical &&
                                c.family != OperatorFamily::elliptic_two_scale;
    if (time_dependent && !(c.dt > 0.0))
        throw std::invalid_argument("verify_bounds: dt required for time-dependent families");

    TensorMesh mesh(c.d, c.N);
    const double h = mesh.h();
    const double dd = static_cast<double>(c.d);
    const double alpha = c.coeff.alpha;
    const double beta = c.coeff.beta;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double p3d = std::pow(3.0, dd);
    const auto zero_f = [](const std::vector<double>&) { return 0.0; };

    SpectralReport rep;
    rep.method = SpectralMethod::eigen_symmetric;

    SparseSymMatrix carrier = identity(1);
    switch (c.family) {
        case OperatorFamily::elliptic_canonical: {
            carrier = assemble_canonical(c.coeff, mesh);
            rep.s = carrier.sparsity();
            rep.theory_bound_kappa = 4.0 * beta / (alpha * pi2) * p3d * dd / (h * h);
            break;
        }
        case OperatorFamily::elliptic_two_scale: {
            auto hs = assemble_two_scale(c.coeff, mesh, zero_f);
            carrier = hs.matrix;
            // sparsity equality lives on the corrector-block rows
            rep.s = detail::max_row_nnz(carrier, 0, hs.u0_offset);
            rep.theory_bound_kappa = p3d * 4.0 * beta / (alpha * pi2) * p3d * dd / (h * h);
            break;
        }
        case OperatorFamily::parabolic_canonical: {
            auto A = assemble_canonical(c.coeff, mesh);
            auto M = mass_d(mesh);
            carrier = add_scaled(1.0, M, c.dt, A);
            rep.s = carrier.sparsity() + M.sparsity();
            rep.theory_bound_kappa =
                p3d * (h + 4.0 * dd * beta * c.dt / h) / (h * (1.0 + alpha * pi2 * c.dt));
            break;
        }
        case OperatorFamily::parabolic_homogenized: {
            auto hs = assemble_two_scale(c.coeff, mesh, zero_f);
            auto M = mass_d(mesh);
            const std::size_t nt = hs.matrix.n_rows();
            auto mt = detail::embed_at(M, nt, hs.u0_offset);
            carrier = add_scaled(1.0, mt, c.dt, hs.matrix);
            rep.s = carrier.sparsity() + mt.sparsity();
            rep.theory_bound_kappa =
                p3d * p3d / (alpha * pi2) * (h * h / c.dt + 4.0 * dd * beta) / (h * h);
            break;
        }
        case OperatorFamily::wave_canonical: {
            auto A = assemble_canonical(c.coeff, mesh);
            auto M = mass_d(mesh);
            auto top = add_scaled(1.0, M, 0.25 * c.dt * c.dt, A);
            carrier = block_diag({&top, &M});
            rep.s = top.sparsity() + M.sparsity();
            rep.theory_bound_kappa = p3d * (1.0 + dd * beta * c.dt * c.dt / (h * h));
            break;
        }
        case OperatorFamily::wave_homogenized: {
            auto hs = assemble_two_scale(c.coeff, mesh, zero_f);
            auto M = mass_d(mesh);
            const std::size_t nt = hs.matrix.n_rows();
            auto mt = detail::embed_at(M, nt, hs.u0_offset);
            auto top = add_scaled(1.0, mt, 0.25 * c.dt * c.dt, hs.matrix);
            auto vblock = scale(0.5 * c.dt, M);
            carrier = block_diag({&top, &vblock});
            rep.s = top.sparsity() + mt.sparsity();
            rep.theory_bound_kappa = 4.0 * p3d * p3d / (alpha * pi2) *
                                     (h * h / (c.dt * c.dt) + dd * beta) / (h * h);
            break;
        }
    }

    rep.max_entry = carrier.max_entry();
    auto [lmin, lmax] = extreme_eigs(carrier, c.eig_tol, c.eig_max_iter);
    rep.lambda_min = lmin;
    rep.lambda_max = lmax;
    if (!(lmin > 0.0))
        throw std::runtime_error("verify_bounds: carrier not positive definite, lambda_min = " +
                                 std::to_string(lmin));
    rep.kappa = lmax / lmin;
    rep.bound_satisfied = rep.kappa <= rep.theory_bound_kappa * (1.0 + 1e-6);
    return rep;
}

// record-only sigma route for the assembled global bidiagonal system; no printed
// constant applies, so the bound is vacuous by construction
inline SpectralReport global_sigma_report(const BlockTimeSystem& sys) {
    const std::size_t nb = sys.block_size();
    const std::size_t n = nb * sys.n_steps;
    if (n > 20000) throw std::invalid_argument("global_sigma_report: beyond desk-scale guard");
    auto L = build_block_bidiagonal(sys.block_a, sys.block_b, sys.n_steps);
    SpectralReport rep;
    rep.method = SpectralMethod::singular_values;
    rep.s = sys.block_a.sparsity() + sys.block_b.sparsity();
    rep.max_entry = std::max(sys.block_a.max_entry(), sys.block_b.max_entry());
    Eigen::BDCSVD<Eigen::MatrixXd> svd(to_dense(L));
    const auto k = svd.singularValues().size();
    rep.lambda_min = svd.singularValues()(k - 1);
    rep.lambda_max = svd.singularValues()(0);
    rep.kappa = rep.lambda_min > 0.0 ? rep.lambda_max / rep.lambda_min
                                     : std::numeric_limits<double>::infinity();
    rep.theory_bound_kappa = std::numeric_limits<double>::infinity();
    rep.bound_satisfied = true;
    return rep;
}

}  // namespace mqlab
