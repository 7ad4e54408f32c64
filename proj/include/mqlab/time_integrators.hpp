#pragma once

// Global space-time block systems: implicit Euler for parabolic problems and
// implicit midpoint for wave problems, each in canonical and homogenized
// (coupled two-scale) form, plus the sequential marcher used as the oracle for
// the all-at-once solves. The global matrix is L(a, b): block lower
// bidiagonal with a on the diagonal and -b on the subdiagonal.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/solvers.hpp"
#include "mqlab/sparse.hpp"
#include "mqlab/two_scale.hpp"

namespace mqlab {

enum class TimeLayout {
    parabolic_canonical,
    parabolic_homogenized,
    wave_canonical,
    wave_homogenized,
};

using TimeForce = std::function<std::vector<double>(double)>;

struct BlockTimeSystem {
    SparseSymMatrix block_a;  // per-step diagonal block
    SparseSymMatrix block_b;  // per-step subdiagonal block (enters globally as -b)
    std::size_t n_steps = 0;
    double dt = 0.0;
    std::vector<double> rhs;  // stacked right-hand side of the global system
    TimeLayout layout = TimeLayout::parabolic_canonical;

    std::size_t block_size() const { return block_a.n_rows(); }
    double final_time() const { return dt * static_cast<double>(n_steps); }
};

inline SparseSymMatrix build_block_bidiagonal(const SparseSymMatrix& a, const SparseSymMatrix& b,
                                              std::size_t n_steps) {
    const std::size_t n = a.n_rows();
    if (b.n_rows() != n) throw std::invalid_argument("build_block_bidiagonal: block size mismatch");
    if (n_steps == 0) throw std::invalid_argument("build_block_bidiagonal: zero steps");
    std::vector<std::vector<SparseEntry>> rows(n * n_steps);
    for (std::size_t j = 0; j < n_steps; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            auto& out = rows[j * n + i];
            out.reserve((j > 0 ? b.row(i).size() : 0) + a.row(i).size());
            if (j > 0)
                for (const auto& e : b.row(i)) out.push_back({(j - 1) * n + e.col, -e.value});
            for (const auto& e : a.row(i)) out.push_back({j * n + e.col, e.value});
        }
    }
    return SparseSymMatrix(n * n_steps, std::move(rows), false);
}

namespace detail {

inline void check_dt(double dt, std::size_t n_steps) {
    if (!(dt > 0.0)) throw std::invalid_argument("time system: dt must be positive");
    if (n_steps == 0) throw std::invalid_argument("time system: need at least one step");
}

// leading k x k principal submatrix (the corrector block A11 of the coupled
// operator)
inline SparseSymMatrix leading_block(const SparseSymMatrix& m, std::size_t k) {
    MatrixBuilder b(k);
    for (std::size_t i = 0; i < k; ++i)
        for (const auto& e : m.row(i))
            if (e.col < k) b.add(i, e.col, e.value);
    return b.build(m.symmetric_flag());
}

inline void require_a11_regular(const HomogenizedSystem& hs) {
    for (std::size_t i = 0; i < hs.u0_offset; ++i)
        if (!(hs.matrix(i, i) > 0.0))
            throw std::invalid_argument(
                "homogenized time system: A11 has a nonpositive diagonal (singular corrector "
                "block violates ellipticity)");
}

// corrector consistent with u0: solve A11 u1 = -A12 u0
inline std::vector<double> corrector_from_u0(const HomogenizedSystem& hs,
                                             const std::vector<double>& u0) {
    const std::size_t n1 = hs.u0_offset;
    const std::size_t nt = hs.matrix.n_rows();
    std::vector<double> full(nt, 0.0);
    for (std::size_t i = 0; i + n1 < nt; ++i) full[n1 + i] = u0[i];
    auto coupled = hs.matrix.apply(full);
    std::vector<double> rhs(n1);
    for (std::size_t i = 0; i < n1; ++i) rhs[i] = -coupled[i];
    auto a11 = leading_block(hs.matrix, n1);
    auto [u1, stats] = cg_solve(a11, rhs, 1e-13);
    return u1;
}

}  // namespace detail

inline BlockTimeSystem parabolic_canonical(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                           double dt, std::size_t n_steps, const TimeForce& F,
                                           const std::vector<double>& u0) {
    detail::check_dt(dt, n_steps);
    const std::size_t n = M.n_rows();
    if (A.n_rows() != n || u0.size() != n)
        throw std::invalid_argument("parabolic_canonical: size mismatch");
    BlockTimeSystem sys;
    sys.layout = TimeLayout::parabolic_canonical;
    sys.dt = dt;
    sys.n_steps = n_steps;
    sys.block_a = add_scaled(1.0, M, dt, A);
    sys.block_b = M;
    sys.rhs.assign(n * n_steps, 0.0);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const auto Fj = F(static_cast<double>(j + 1) * dt);
        for (std::size_t i = 0; i < n; ++i) sys.rhs[j * n + i] = dt * Fj[i];
    }
    const auto Mu0 = M.apply(u0);
    for (std::size_t i = 0; i < n; ++i) sys.rhs[i] += Mu0[i];
    return sys;
}

inline BlockTimeSystem parabolic_homogenized(const HomogenizedSystem& hs, const SparseSymMatrix& M,
                                             double dt, std::size_t n_steps, const TimeForce& F,
                                             const std::vector<double>& u0) {
    detail::check_dt(dt, n_steps);
    detail::require_a11_regular(hs);
    const std::size_t nt = hs.matrix.n_rows();
    const std::size_t n1 = hs.u0_offset;
    const std::size_t n0 = nt - n1;
    if (M.n_rows() != n0 || u0.size() != n0)
        throw std::invalid_argument("parabolic_homogenized: macro size mismatch");

    // M tilde = blockdiag(0, M)
    MatrixBuilder mb(nt);
    for (std::size_t i = 0; i < n0; ++i)
        for (const auto& e : M.row(i)) mb.add(n1 + i, n1 + e.col, e.value);
    SparseSymMatrix Mt = mb.build(true);

    BlockTimeSystem sys;
    sys.layout = TimeLayout::parabolic_homogenized;
    sys.dt = dt;
    sys.n_steps = n_steps;
    sys.block_a = add_scaled(1.0, Mt, dt, hs.matrix);
    sys.block_b = Mt;
    sys.rhs.assign(nt * n_steps, 0.0);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const auto Fj = F(static_cast<double>(j + 1) * dt);
        for (std::size_t i = 0; i < n0; ++i) sys.rhs[j * nt + n1 + i] = dt * Fj[i];
    }
    const auto Mu0 = M.apply(u0);
    for (std::size_t i = 0; i < n0; ++i) sys.rhs[n1 + i] += Mu0[i];
    return sys;
}

inline BlockTimeSystem wave_canonical(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                      double dt, std::size_t n_steps, const TimeForce& F,
                                      const std::vector<double>& u0,
                                      const std::vector<double>& v0 = {}) {
    detail::check_dt(dt, n_steps);
    const std::size_t n = M.n_rows();
    if (A.n_rows() != n || u0.size() != n)
        throw std::invalid_argument("wave_canonical: size mismatch");
    std::vector<double> v = v0.empty() ? std::vector<double>(n, 0.0) : v0;
    if (v.size() != n) throw std::invalid_argument("wave_canonical: v0 size mismatch");

    const double q = dt * dt / 4.0;
    MatrixBuilder ba(2 * n), bb(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& e : M.row(i)) {
            ba.add(i, e.col, e.value);
            ba.add(n + i, n + e.col, e.value);
            bb.add(i, e.col, e.value);
            bb.add(i, n + e.col, dt * e.value);
            bb.add(n + i, n + e.col, e.value);
        }
        for (const auto& e : A.row(i)) {
            ba.add(i, e.col, q * e.value);
            ba.add(n + i, e.col, 0.5 * dt * e.value);
            bb.add(i, e.col, -q * e.value);
            bb.add(n + i, e.col, -0.5 * dt * e.value);
        }
    }

    BlockTimeSystem sys;
    sys.layout = TimeLayout::wave_canonical;
    sys.dt = dt;
    sys.n_steps = n_steps;
    sys.block_a = ba.build(false);
    sys.block_b = bb.build(false);
    sys.rhs.assign(2 * n * n_steps, 0.0);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const auto Fh = F((static_cast<double>(j) + 0.5) * dt);
        for (std::size_t i = 0; i < n; ++i) {
            sys.rhs[j * 2 * n + i] = 0.5 * dt * dt * Fh[i];
            sys.rhs[j * 2 * n + n + i] = dt * Fh[i];
        }
    }
    std::vector<double> init(2 * n);
    for (std::size_t i = 0; i < n; ++i) init[i] = u0[i];
    for (std::size_t i = 0; i < n; ++i) init[n + i] = v[i];
    const auto binit = sys.block_b.apply(init);
    for (std::size_t i = 0; i < 2 * n; ++i) sys.rhs[i] += binit[i];
    return sys;
}

inline BlockTimeSystem wave_homogenized(const HomogenizedSystem& hs, const SparseSymMatrix& M,
                                        double dt, std::size_t n_steps, const TimeForce& F,
                                        const std::vector<double>& u0,
                                        const std::vector<double>& v0 = {}) {
    detail::check_dt(dt, n_steps);
    detail::require_a11_regular(hs);
    const std::size_t nt = hs.matrix.n_rows();
    const std::size_t n1 = hs.u0_offset;
    const std::size_t n0 = nt - n1;
    if (M.n_rows() != n0 || u0.size() != n0)
        throw std::invalid_argument("wave_homogenized: macro size mismatch");
    std::vector<double> v = v0.empty() ? std::vector<double>(n0, 0.0) : v0;
    if (v.size() != n0) throw std::invalid_argument("wave_homogenized: v0 size mismatch");

    // per-step unknown [u1; u0; v0], size n1 + 2*n0
    const std::size_t nb = nt + n0;
    const double q = dt * dt / 4.0;
    MatrixBuilder ba(nb), bb(nb);
    // rows of the coupled operator: constraint row (scaled) and macro row
    for (std::size_t r = 0; r < nt; ++r)
        for (const auto& e : hs.matrix.row(r)) {
            ba.add(r, e.col, q * e.value);
            if (r >= n1) bb.add(r, e.col, -q * e.value);
        }
    for (std::size_t i = 0; i < n0; ++i)
        for (const auto& e : hs.matrix.row(n1 + i)) {
            ba.add(nt + i, e.col, q * e.value);
            bb.add(nt + i, e.col, -q * e.value);
        }
    for (std::size_t i = 0; i < n0; ++i)
        for (const auto& e : M.row(i)) {
            ba.add(n1 + i, n1 + e.col, e.value);
            ba.add(nt + i, nt + e.col, 0.5 * dt * e.value);
            bb.add(n1 + i, n1 + e.col, e.value);
            bb.add(n1 + i, nt + e.col, dt * e.value);
            bb.add(nt + i, nt + e.col, 0.5 * dt * e.value);
        }

    BlockTimeSystem sys;
    sys.layout = TimeLayout::wave_homogenized;
    sys.dt = dt;
    sys.n_steps = n_steps;
    sys.block_a = ba.build(false);
    sys.block_b = bb.build(false);
    sys.rhs.assign(nb * n_steps, 0.0);
    for (std::size_t j = 0; j < n_steps; ++j) {
        const auto Fh = F((static_cast<double>(j) + 0.5) * dt);
        for (std::size_t i = 0; i < n0; ++i) {
            sys.rhs[j * nb + n1 + i] = 0.5 * dt * dt * Fh[i];
            sys.rhs[j * nb + nt + i] = 0.5 * dt * dt * Fh[i];
        }
    }
    // initial state: corrector consistent with u0 through the constraint
    std::vector<double> init(nb, 0.0);
    const auto u1 = detail::corrector_from_u0(hs, u0);
    for (std::size_t i = 0; i < n1; ++i) init[i] = u1[i];
    for (std::size_t i = 0; i < n0; ++i) init[n1 + i] = u0[i];
    for (std::size_t i = 0; i < n0; ++i) init[nt + i] = v[i];
    const auto binit = sys.block_b.apply(init);
    for (std::size_t i = 0; i < nb; ++i) sys.rhs[i] += binit[i];
    return sys;
}

// sequential marcher: factor the per-step block once, then forward recurrence
// x_{j+1} = a^{-1} (rhs_j + b x_j). This is the oracle for the global solves.
inline std::vector<std::vector<double>> march_reference(const BlockTimeSystem& sys) {
    const std::size_t n = sys.block_size();
    if (n > 20000) throw std::invalid_argument("march_reference: block too large for dense LU");
    Eigen::MatrixXd a = to_dense(sys.block_a);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    {
        const auto& lum = lu.matrixLU();
        double pmin = 1e300, pmax = 0.0;
        for (Eigen::Index i = 0; i < lum.rows(); ++i) {
            const double p = std::abs(lum(i, i));
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        if (!(pmin > pmax * 1e-15))
            throw SolveFailure("march_reference: singular per-step block", {}, {});
    }

    std::vector<std::vector<double>> traj;
    traj.reserve(sys.n_steps);
    std::vector<double> prev;
    for (std::size_t j = 0; j < sys.n_steps; ++j) {
        std::vector<double> r(sys.rhs.begin() + static_cast<std::ptrdiff_t>(j * n),
                              sys.rhs.begin() + static_cast<std::ptrdiff_t>((j + 1) * n));
        if (j > 0) {
            const auto bx = sys.block_b.apply(prev);
            for (std::size_t i = 0; i < n; ++i) r[i] += bx[i];
        }
        Eigen::VectorXd rv(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) rv(static_cast<Eigen::Index>(i)) = r[i];
        Eigen::VectorXd xv = lu.solve(rv);
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = xv(static_cast<Eigen::Index>(i));
        if (!all_finite(x))
            throw SolveFailure("march_reference: non-finite state at step " + std::to_string(j),
                               x, {});
        prev = x;
        traj.push_back(std::move(x));
    }
    return traj;
}

// all-at-once solve of the global bidiagonal system by dense LU, for
// cross-checking against the marcher at desk scale
inline std::vector<double> solve_global(const BlockTimeSystem& sys) {
    auto global = build_block_bidiagonal(sys.block_a, sys.block_b, sys.n_steps);
    return dense_direct_solve(global, sys.rhs);
}

}  // namespace mqlab
