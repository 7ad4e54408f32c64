#pragma once

// Classical emulation of the Schrodingerization subroutine: extend A u = F to
// the autonomous ODE d/dt [u; 1] = -A_ext [u; 1], warp with v(t,p) =
// exp(-|p|) u_ext(t), lift to the Hamiltonian system i dw/dt = H_total w on a
// periodic momentum grid, evolve with Crank-Nicolson (exactly norm-preserving
// in the per-mode eigenbasis), and recover u at a grid point p_k >= 1.
//
// Momentum convention: with the even extension, v solves dv/dt = H1 dv/dp -
// i H2 v away from the kink, so each Fourier mode evolves under the Hermitian
// generator G_l = -mu_l H1 + H2 with mu_l = pi l / p_max. The kink at p = 0
// transports to the left and the wrap-around contamination enters from
// p = +p_max moving left at speed lambda_max, which is why the default grid
// half-width adds lambda_max * t to the truncation term.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/fft.hpp"
#include "mqlab/solvers.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

struct ExtendedOdeSystem {
    SparseSymMatrix a_ext;        // [[A, F],[0, 0]], size n+1
    std::vector<double> u0_ext;   // [u0; 1]
    std::size_t n = 0;            // original system size
};

namespace detail {

inline double symmetric_part_min_eigenvalue(const SparseSymMatrix& a) {
    if (a.n_rows() > 2000)
        throw std::invalid_argument("extend_system: dense spectral guard exceeded");
    Eigen::MatrixXd d = to_dense(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d + d.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

inline ExtendedOdeSystem extend_system(const SparseSymMatrix& a, const std::vector<double>& f,
                                       const std::vector<double>& u0) {
    const std::size_t n = a.n_rows();
    if (f.size() != n || u0.size() != n) throw std::invalid_argument("extend_system: size mismatch");
    const double lmin = detail::symmetric_part_min_eigenvalue(a);
    if (lmin < -1e-10)
        throw std::invalid_argument(
            "extend_system: matrix not positive semi-definite (symmetric-part lambda_min " +
            std::to_string(lmin) + "), relaxation would be unstable");
    MatrixBuilder b(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : a.row(i)) b.add(i, e.col, e.value);
        if (f[i] != 0.0) b.add(i, n, -f[i]);  // du/dt = -(A u - F)
    }
    ExtendedOdeSystem sys;
    sys.a_ext = b.build(false);
    sys.u0_ext = u0;
    sys.u0_ext.push_back(1.0);
    sys.n = n;
    return sys;
}

// A_ext = h1 + i h2 with both factors Hermitian
inline std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> hermitian_split(const ExtendedOdeSystem& sys) {
    const Eigen::MatrixXd d = to_dense(sys.a_ext);
    const std::size_t m = sys.n + 1;
    Eigen::MatrixXcd h1(m, m), h2(m, m);
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            h1(i, j) = 0.5 * (d(i, j) + d(j, i));
            h2(i, j) = (d(i, j) - d(j, i)) / (2.0 * I);
        }
    return {h1, h2};
}

// Fourier momenta mu_l = pi l / p_max in radix-2 FFT order: l = 0..K/2-1 then
// l = -K/2..-1
inline std::vector<double> momentum_matrix(std::size_t K, double p_max) {
    if (K == 0 || K % 2 != 0) throw std::invalid_argument("momentum_matrix: K must be even");
    if (!(p_max > 0.0)) throw std::invalid_argument("momentum_matrix: p_max must be positive");
    std::vector<double> mu(K);
    for (std::size_t l = 0; l < K; ++l) {
        const double ll = (l < K / 2) ? static_cast<double>(l)
                                      : static_cast<double>(l) - static_cast<double>(K);
        mu[l] = std::numbers::pi * ll / p_max;
    }
    return mu;
}

inline ComplexVector initialize_w(const std::vector<double>& u0_ext,
                                  const std::vector<double>& p_grid) {
    ComplexVector w;
    w.reserve(u0_ext.size() * p_grid.size());
    for (double p : p_grid) {
        const double damp = std::exp(-std::abs(p));
        for (double u : u0_ext) w.push_back(damp * u);
    }
    return w;
}

struct SchrodingerizedSystem {
    Eigen::MatrixXcd h1, h2;
    double p_max = 0.0;
    double dp = 0.0;
    std::size_t K = 0;             // periodic grid points (power of two)
    std::vector<double> p_grid;    // K+1 points, p_k = -p_max + k dp
    std::vector<double> d_matrix;  // K Fourier momenta, FFT order
    ComplexVector w;               // stacked v(p_k), length (K+1)(n+1)
    std::size_t n = 0;
    double elapsed = 0.0;     // total evolved time, drives the recovery window
    double lambda_neg = 0.0;  // max(0, -lambda_min(h1))
};

// grid construction: K is the smallest power of two with 2 p_max / K <= dp
// (radix-2 evolution; the realized dp never exceeds the request)
inline SchrodingerizedSystem schrodingerize(const ExtendedOdeSystem& ode, double p_max,
                                            double dp_target) {
    if (!(p_max > 0.0) || !(dp_target > 0.0))
        throw std::invalid_argument("schrodingerize: p_max and dp must be positive");
    SchrodingerizedSystem sys;
    auto [h1, h2] = hermitian_split(ode);
    sys.h1 = std::move(h1);
    sys.h2 = std::move(h2);
    sys.p_max = p_max;
    sys.K = next_power_of_two(
        static_cast<std::size_t>(std::ceil(2.0 * p_max / dp_target)));
    if (sys.K < 2) sys.K = 2;
    sys.dp = 2.0 * p_max / static_cast<double>(sys.K);
    sys.p_grid.resize(sys.K + 1);
    for (std::size_t k = 0; k <= sys.K; ++k)
        sys.p_grid[k] = -p_max + static_cast<double>(k) * sys.dp;
    sys.d_matrix = momentum_matrix(sys.K, p_max);
    sys.w = initialize_w(ode.u0_ext, sys.p_grid);
    sys.n = ode.n;
    // The force column makes h1 indefinite in general. Its negative eigenvalues
    // transport the p = 0 kink to the right at speed |lambda|, so the recovery
    // window shifts with time; record the speed here.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sys.h1, Eigen::EigenvaluesOnly);
    sys.lambda_neg = std::max(0.0, -es.eigenvalues().minCoeff());
    return sys;
}

// explicit H_total = blockdiag_l(-mu_l h1 + h2) in the momentum representation
// where the Fourier momentum matrix is diagonal; used by the invariant checks
inline Eigen::MatrixXcd build_h_total(const SchrodingerizedSystem& sys) {
    const std::size_t m = sys.n + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sys.K * m),
                                                static_cast<Eigen::Index>(sys.K * m));
    for (std::size_t l = 0; l < sys.K; ++l) {
        const auto off = static_cast<Eigen::Index>(l * m);
        h.block(off, off, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) =
            -sys.d_matrix[l] * sys.h1 + sys.h2;
    }
    return h;
}

// spectral-norm bound max_l ||G_l||_2 <= max|mu| ||h1||_2 + ||h2||_2
inline double h_total_norm_estimate(const SchrodingerizedSystem& sys) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(sys.h1, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e2(sys.h2, Eigen::EigenvaluesOnly);
    const double n1 = e1.eigenvalues().cwiseAbs().maxCoeff();
    const double n2 = e2.eigenvalues().cwiseAbs().maxCoeff();
    double mu_max = 0.0;
    for (double mu : sys.d_matrix) mu_max = std::max(mu_max, std::abs(mu));
    return mu_max * n1 + n2;
}

// Crank-Nicolson evolution by time t. Each Fourier mode is advanced in the
// eigenbasis of its Hermitian generator; the per-step Cayley factor
// (1 - i dt lambda / 2)/(1 + i dt lambda / 2) has unit modulus, so the
// discrete evolution is exactly unitary and matches literal CN stepping.
inline void evolve(SchrodingerizedSystem& sys, double t, double dt_sim = 0.0) {
    if (t < 0.0) throw std::invalid_argument("evolve: negative time");
    if (t == 0.0) return;
    const std::size_t m = sys.n + 1;
    const std::size_t K = sys.K;
    if (dt_sim <= 0.0) dt_sim = 0.1 / std::max(h_total_norm_estimate(sys), 1e-30);
    const auto n_steps = static_cast<std::size_t>(std::ceil(t / dt_sim));
    const double dt = t / static_cast<double>(n_steps);

    double norm0 = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < m; ++j) norm0 += std::norm(sys.w[k * m + j]);
    norm0 = std::sqrt(norm0);

    // FFT over the periodic part of the grid, component by component
    std::vector<ComplexVector> modes(m, ComplexVector(K));
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < K; ++k) modes[j][k] = sys.w[k * m + j];
        fft_radix2(modes[j], false);
    }

    Eigen::VectorXcd vec(static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < K; ++l) {
        const Eigen::MatrixXcd g = -sys.d_matrix[l] * sys.h1 + sys.h2;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
        for (std::size_t j = 0; j < m; ++j) vec(static_cast<Eigen::Index>(j)) = modes[j][l];
        Eigen::VectorXcd coef = es.eigenvectors().adjoint() * vec;
        for (std::size_t j = 0; j < m; ++j) {
            const double lambda = es.eigenvalues()(static_cast<Eigen::Index>(j));
            const double phase =
                -2.0 * static_cast<double>(n_steps) * std::atan(0.5 * dt * lambda);
            coef(static_cast<Eigen::Index>(j)) *=
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
        vec = es.eigenvectors() * coef;
        for (std::size_t j = 0; j < m; ++j) modes[j][l] = vec(static_cast<Eigen::Index>(j));
    }

    for (std::size_t j = 0; j < m; ++j) {
        fft_radix2(modes[j], true);
        for (std::size_t k = 0; k < K; ++k) sys.w[k * m + j] = modes[j][k];
    }
    // periodic closure: v(p_max) = v(-p_max)
    for (std::size_t j = 0; j < m; ++j) sys.w[K * m + j] = sys.w[j];

    double norm1 = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < m; ++j) norm1 += std::norm(sys.w[k * m + j]);
    norm1 = std::sqrt(norm1);
    if (std::abs(norm1 - norm0) > 1e-6 * norm0)
        throw std::runtime_error("evolve: norm drift " + std::to_string(norm1 - norm0) +
                                 " exceeds tolerance (integrator misconfigured)");
    sys.elapsed += t;
}

inline std::size_t default_recovery_index(const std::vector<double>& p_grid) {
    for (std::size_t k = 0; k < p_grid.size(); ++k)
        if (p_grid[k] >= 1.0) return k;
    throw std::invalid_argument("recover_u: no grid point with p >= 1");
}

// time-aware variant: the recovery point must stay to the right of the kink
// front that travels at speed lambda_neg when h1 is indefinite
inline std::size_t default_recovery_index(const SchrodingerizedSystem& sys) {
    const double threshold = 1.0 + sys.lambda_neg * sys.elapsed;
    for (std::size_t k = 0; k < sys.p_grid.size(); ++k)
        if (sys.p_grid[k] >= threshold) return k;
    throw std::invalid_argument("recover_u: no grid point with p >= " +
                                std::to_string(threshold) + " (p_max too small for this horizon)");
}

// u recovered from a single grid point p_k > 0: e^{p_k} w_k, normalized so the
// appended constant component is exactly 1
inline std::vector<double> recover_u(const SchrodingerizedSystem& sys,
                                     std::size_t recovery_index) {
    const std::size_t m = sys.n + 1;
    if (recovery_index >= sys.p_grid.size() || sys.p_grid[recovery_index] <= 0.0)
        throw std::invalid_argument("recover_u: recovery point must satisfy p_k > 0");
    const double p = sys.p_grid[recovery_index];
    const double boost = std::exp(p);
    const std::complex<double> last = boost * sys.w[recovery_index * m + sys.n];
    if (std::abs(last - 1.0) > 0.1)
        throw std::runtime_error(
            "recover_u: constant component deviates from 1 by " +
            std::to_string(std::abs(last - 1.0)) + " (evolution under-resolved)");
    std::vector<double> u(sys.n);
    for (std::size_t j = 0; j < sys.n; ++j)
        u[j] = (boost * sys.w[recovery_index * m + j] / last).real();
    return u;
}

inline std::vector<double> recover_u(const SchrodingerizedSystem& sys) {
    return recover_u(sys, default_recovery_index(sys));
}

namespace detail {

// smallest eigenvalue of an SPD matrix by inverse power iteration (CG inner
// solves), 1e-6 relative
inline double smallest_eigenvalue_spd(const SparseSymMatrix& a) {
    const std::size_t n = a.n_rows();
    std::vector<double> x(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) x[i] += 1e-3 * static_cast<double>(i % 7);
    double nx = norm2(x);
    for (double& v : x) v /= nx;
    double prev = -1.0;
    for (int it = 0; it < 200; ++it) {
        auto [y, stats] = cg_solve(a, x, 1e-10);
        const double ny = norm2(y);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
        const double ray = dot(x, a.apply(x));
        if (prev > 0.0 && std::abs(ray - prev) <= 1e-6 * ray) return ray;
        prev = ray;
    }
    return prev;
}

}  // namespace detail

struct RelaxationReport {
    std::vector<double> u;
    double t_relax = 0.0;
    double lambda_min = 0.0;
    double p_max = 0.0;
    std::size_t K = 0;
};

// full pipeline: relax toward the steady state A^-1 F through the unitary
// emulation, horizon t* = ln(scale/delta)/lambda_min
inline RelaxationReport relaxation_solve(const SparseSymMatrix& a, const std::vector<double>& f,
                                         const std::vector<double>& u0, double delta) {
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("relaxation_solve: delta must be in (0,1)");
    const std::size_t n = a.n_rows();
    const double lmin = detail::smallest_eigenvalue_spd(a);
    if (!(lmin > 0.0)) throw std::invalid_argument("relaxation_solve: lambda_min <= 0");

    RelaxationReport rep;
    rep.lambda_min = lmin;

    // already at steady state?
    auto residual = a.apply(u0);
    for (std::size_t i = 0; i < n; ++i) residual[i] -= f[i];
    const double fscale = std::max(norm2(f), 1e-300);
    if (norm2(residual) <= 1e-13 * fscale) {
        rep.u = u0;
        return rep;
    }

    const double scale =
        std::max(1.0, (norm2(u0) + norm2(f) / lmin) / std::sqrt(static_cast<double>(n)));
    rep.t_relax = std::log(scale / delta) / lmin;

    auto ode = extend_system(a, f, u0);
    // The momentum window must absorb both fronts over the horizon: wraparound
    // from +p_max travels left at lambda_max(h1), and the p = 0 kink travels
    // right at |lambda_min(h1)| when the force column makes h1 indefinite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_split(ode).first,
                                                       Eigen::EigenvaluesOnly);
    const double front_left = es.eigenvalues().maxCoeff();
    const double front_right = std::max(0.0, -es.eigenvalues().minCoeff());
    const double p_max =
        2.0 + std::log(1.0 / delta) + (front_left + front_right) * rep.t_relax;
    auto sys = schrodingerize(ode, p_max, delta);
    evolve(sys, rep.t_relax);
    rep.u = recover_u(sys);
    rep.p_max = sys.p_max;
    rep.K = sys.K;
    return rep;
}

}  // namespace mqlab
