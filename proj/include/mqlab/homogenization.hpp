#pragma once

// Homogenized limit problems: 1D closed-form cell problems (harmonic mean plus
// corrector), d-dimensional periodic FEM cell problems, the first-order
// two-scale reconstruction u0(x) + eps u1(x, x/eps), and error-rate fitting
// over an epsilon sweep.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mqlab/fem.hpp"
#include "mqlab/mesh.hpp"
#include "mqlab/quadrature.hpp"
#include "mqlab/solvers.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

struct CellProblemResult {
    FemSolution corrector;       // nodal values of chi on the periodic grid of Y
    double homogenized_coeff = 0.0;
    std::string normalization = "mean-zero";
};

// 1D cell problem: A0 = (int a^-1 dy)^-1, chi'(y) = A0 / a(y) - 1, chi of mean
// zero. Nodal chi values are produced on a uniform periodic grid with
// n_nodes points (chi(0) = chi(1) by construction since int chi' = 0).
inline CellProblemResult cell_problem_1d(const std::function<double(double)>& a,
                                         std::size_t n_nodes = 257) {
    if (n_nodes < 3) throw std::invalid_argument("cell_problem_1d: need >= 3 nodes");
    // guard: coefficient bounded away from zero on a fine sample
    for (std::size_t i = 0; i <= 1024; ++i) {
        const double v = a(static_cast<double>(i) / 1024.0);
        if (!(v > 1e-12)) throw std::invalid_argument("cell_problem_1d: a not bounded below");
    }
    const double inv_mean = adaptive_simpson([&](double y) { return 1.0 / a(y); }, 0.0, 1.0);
    const double a0 = 1.0 / inv_mean;

    CellProblemResult out;
    out.homogenized_coeff = a0;
    const std::size_t M = n_nodes - 1;  // cells; grid y_j = j / M, j = 0..M-1
    std::vector<double> chi(M, 0.0);
    double acc = 0.0;
    const double dy = 1.0 / static_cast<double>(M);
    for (std::size_t j = 1; j < M; ++j) {
        acc += adaptive_simpson([&](double y) { return a0 / a(y) - 1.0; },
                                static_cast<double>(j - 1) * dy, static_cast<double>(j) * dy,
                                1e-13);
        chi[j] = acc;
    }
    // subtract the trapezoid mean (periodic: plain average of nodal values)
    double mean = 0.0;
    for (double v : chi) mean += v;
    mean /= static_cast<double>(M);
    for (double& v : chi) v -= mean;

    out.corrector.mesh = TensorMesh(1, M > 1 ? M - 1 : 1);  // h = 1/M
    out.corrector.level = 1;
    out.corrector.coefficients = std::move(chi);
    return out;
}

// d-dimensional periodic cell problems on Y = [0,1]^d: solve for correctors
// chi_l with one pinned dof, return the homogenized tensor
//   A0_{lm} = int_Y a (e_l + grad chi_l) . (e_m + grad chi_m) dy.
struct CellProblemTensorResult {
    std::vector<std::vector<double>> correctors;   // chi_l nodal, periodic grid N^d
    std::vector<std::vector<double>> homogenized;  // d x d tensor
    std::size_t N = 0;                             // nodes per direction, h = 1/N
};

inline CellProblemTensorResult cell_problem_d(
    const std::function<double(const std::vector<double>&)>& a, std::size_t d, std::size_t N) {
    if (d < 1 || N < 2) throw std::invalid_argument("cell_problem_d: need d >= 1, N >= 2");
    if (N > 64) throw std::invalid_argument("cell_problem_d: mesh capped at 64 per direction");
    const double h = 1.0 / static_cast<double>(N);
    std::size_t dof = 1;
    for (std::size_t l = 0; l < d; ++l) dof *= N;
    const std::size_t n_local = std::size_t{1} << d;

    // Gauss-3 per cell; the periodic coefficient is smooth on the cell scale
    static const double x3[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
    static const double w3[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    MatrixBuilder builder(dof);
    std::vector<std::vector<double>> rhs(d, std::vector<double>(dof, 0.0));
    std::vector<std::size_t> cell(d, 0), cradix(d, N), qidx(d, 0), qradix(d, 3);
    std::vector<double> y(d);
    std::vector<std::size_t> global(n_local);

    do {
        for (std::size_t u = 0; u < n_local; ++u) {
            std::size_t flat = 0;
            for (std::size_t l = 0; l < d; ++l)
                flat = flat * N + (cell[l] + ((u >> (d - 1 - l)) & 1u)) % N;
            global[u] = flat;
        }
        std::fill(qidx.begin(), qidx.end(), 0);
        do {
            double wq = 1.0;
            for (std::size_t l = 0; l < d; ++l) {
                y[l] = (static_cast<double>(cell[l]) + x3[qidx[l]]) * h;
                wq *= w3[qidx[l]] * h;
            }
            const double av = a(y);
            for (std::size_t u = 0; u < n_local; ++u) {
                // grad phi_u and value at this quad point
                for (std::size_t v = 0; v < n_local; ++v) {
                    double grad_dot = 0.0;
                    for (std::size_t l = 0; l < d; ++l) {
                        double term = 1.0;
                        for (std::size_t m = 0; m < d; ++m) {
                            const double t = x3[qidx[m]];
                            const bool bu = (u >> (d - 1 - m)) & 1u;
                            const bool bv = (v >> (d - 1 - m)) & 1u;
                            if (m == l)
                                term *= (bu ? 1.0 : -1.0) * (bv ? 1.0 : -1.0) / (h * h);
                            else
                                term *= (bu ? t : 1.0 - t) * (bv ? t : 1.0 - t);
                        }
                        grad_dot += term;
                    }
                    builder.add(global[u], global[v], wq * av * grad_dot);
                }
                for (std::size_t l = 0; l < d; ++l) {
                    double dphi = 1.0;
                    for (std::size_t m = 0; m < d; ++m) {
                        const double t = x3[qidx[m]];
                        const bool bu = (u >> (d - 1 - m)) & 1u;
                        if (m == l)
                            dphi *= (bu ? 1.0 : -1.0) / h;
                        else
                            dphi *= bu ? t : 1.0 - t;
                    }
                    // -int a e_l . grad phi_u
                    rhs[l][global[u]] -= wq * av * dphi;
                }
            }
        } while (next_index(qidx, qradix));
    } while (next_index(cell, cradix));

    SparseSymMatrix stiff = builder.build(true, 1e-14);
    // pin dof 0 to fix the constant: zero its row/column, unit diagonal
    MatrixBuilder pinned(dof);
    for (std::size_t i = 0; i < dof; ++i) {
        if (i == 0) {
            pinned.add(0, 0, 1.0);
            continue;
        }
        for (const auto& e : stiff.row(i))
            if (e.col != 0) pinned.add(i, e.col, e.value);
    }
    SparseSymMatrix sys = pinned.build(true);

    CellProblemTensorResult out;
    out.N = N;
    out.correctors.resize(d);
    for (std::size_t l = 0; l < d; ++l) {
        std::vector<double> b = rhs[l];
        b[0] = 0.0;
        auto [chi, stats] = cg_solve(sys, b, 1e-12);
        // shift to mean zero; the pinned constant is arbitrary
        double mean = 0.0;
        for (double v : chi) mean += v;
        mean /= static_cast<double>(dof);
        for (double& v : chi) v -= mean;
        out.correctors[l] = std::move(chi);
    }

    // homogenized tensor by the same quadrature
    out.homogenized.assign(d, std::vector<double>(d, 0.0));
    std::fill(cell.begin(), cell.end(), 0);
    do {
        for (std::size_t u = 0; u < n_local; ++u) {
            std::size_t flat = 0;
            for (std::size_t l = 0; l < d; ++l)
                flat = flat * N + (cell[l] + ((u >> (d - 1 - l)) & 1u)) % N;
            global[u] = flat;
        }
        std::fill(qidx.begin(), qidx.end(), 0);
        do {
            double wq = 1.0;
            for (std::size_t l = 0; l < d; ++l) {
                y[l] = (static_cast<double>(cell[l]) + x3[qidx[l]]) * h;
                wq *= w3[qidx[l]] * h;
            }
            const double av = a(y);
            // grad chi_l at this point, for each l
            std::vector<std::vector<double>> grad_chi(d, std::vector<double>(d, 0.0));
            for (std::size_t u = 0; u < n_local; ++u) {
                for (std::size_t m = 0; m < d; ++m) {
                    double dphi = 1.0;
                    for (std::size_t mm = 0; mm < d; ++mm) {
                        const double t = x3[qidx[mm]];
                        const bool bu = (u >> (d - 1 - mm)) & 1u;
                        if (mm == m)
                            dphi *= (bu ? 1.0 : -1.0) / h;
                        else
                            dphi *= bu ? t : 1.0 - t;
                    }
                    for (std::size_t l = 0; l < d; ++l)
                        grad_chi[l][m] += out.correctors[l][global[u]] * dphi;
                }
            }
            for (std::size_t l = 0; l < d; ++l)
                for (std::size_t m = 0; m < d; ++m) {
                    double dotp = 0.0;
                    for (std::size_t k = 0; k < d; ++k) {
                        const double gl = (k == l ? 1.0 : 0.0) + grad_chi[l][k];
                        const double gm = (k == m ? 1.0 : 0.0) + grad_chi[m][k];
                        dotp += gl * gm;
                    }
                    out.homogenized[l][m] += wq * av * dotp;
                }
        } while (next_index(qidx, qradix));
    } while (next_index(cell, cradix));
    return out;
}

// first-order reconstruction u0(x) + eps * u1(x, x/eps mod 1) for d=1.
// u0 is a nodal interior-dof field on its mesh; u1 is evaluated through a
// callable (x, y) -> value so both closed-form correctors chi(y) * u0'(x) and
// coupled-solve corrector blocks can feed it.
inline std::function<double(double)> reconstruct_two_scale(
    const FemSolution& u0, const std::function<double(double, double)>& u1, double eps) {
    if (u0.mesh.d != 1) throw std::invalid_argument("reconstruct_two_scale: d=1 only");
    if (!(eps > 0.0)) throw std::invalid_argument("reconstruct_two_scale: eps must be positive");
    const TensorMesh mesh = u0.mesh;
    const std::vector<double> nodal = u0.coefficients;
    return [mesh, nodal, u1, eps](double x) {
        if (x < 0.0 || x > 1.0)
            throw std::domain_error("reconstruct_two_scale: evaluation outside [0,1]");
        const std::size_t N = mesh.N;
        const double h = mesh.h();
        std::size_t c = static_cast<std::size_t>(std::min(x / h, static_cast<double>(N)));
        const double t = x / h - static_cast<double>(c);
        auto node = [&](std::size_t g) { return (g >= 1 && g <= N) ? nodal[g - 1] : 0.0; };
        const double base = (1.0 - t) * node(c) + t * node(c + 1);
        double y = x / eps;
        y -= std::floor(y);
        return base + eps * u1(x, y);
    };
}

// piecewise-linear periodic interpolant of nodal corrector values (grid
// y_j = j/M, j = 0..M-1), as produced by cell_problem_1d
inline std::function<double(double)> corrector_interpolant(const CellProblemResult& cell) {
    const std::vector<double> chi = cell.corrector.coefficients;
    return [chi](double y) {
        const std::size_t M = chi.size();
        y -= std::floor(y);
        const double s = y * static_cast<double>(M);
        const std::size_t j = static_cast<std::size_t>(s) % M;
        const double t = s - std::floor(s);
        return (1.0 - t) * chi[j] + t * chi[(j + 1) % M];
    };
}

struct RateReport {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms residual of the log-log fit
    bool monotone = true;
    std::string warning;
};

// least-squares slope of log(err) against log(eps)
inline RateReport homogenization_error_rate(const std::vector<double>& epsilons,
                                            const std::vector<double>& errors) {
    if (epsilons.size() != errors.size() || epsilons.size() < 4)
        throw std::invalid_argument("homogenization_error_rate: need >= 4 matched sweep points");
    const std::size_t n = epsilons.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(epsilons[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("homogenization_error_rate: nonpositive data");
        lx[i] = std::log(epsilons[i]);
        ly[i] = std::log(errors[i]);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double dn = static_cast<double>(n);
    RateReport rep;
    rep.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    rep.intercept = (sy - rep.slope * sx) / dn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (rep.intercept + rep.slope * lx[i]);
        ss += r * r;
    }
    rep.residual = std::sqrt(ss / dn);
    // monotone check in the direction of decreasing eps
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool eps_dec = epsilons[i] > epsilons[i + 1];
        const bool err_dec = errors[i] > errors[i + 1];
        if (eps_dec != err_dec) {
            rep.monotone = false;
            std::ostringstream os;
            os << "non-monotone error sequence between sweep points " << i << " and " << i + 1;
            rep.warning = os.str();
            break;
        }
    }
    return rep;
}

}  // namespace mqlab
