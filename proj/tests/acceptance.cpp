// Acceptance gate: one criterion per invocation (argv[1] = 1..9, no argument
// runs all), one pass/fail line per criterion on stdout, details on stderr.

#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/cli.hpp"
#include "mqlab/homogenization.hpp"
#include "mqlab/schrodingerization.hpp"

using namespace mqlab;

namespace {

constexpr double pi = std::numbers::pi;
int failures = 0;

void detail_fail(const std::string& what) {
    ++failures;
    std::fprintf(stderr, "  FAIL: %s\n", what.c_str());
}

void check(bool ok, const std::string& what) {
    if (!ok) detail_fail(what);
}

void check_close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
        std::ostringstream os;
        os << what << ": got " << got << ", want " << want << " +/- " << tol;
        detail_fail(os.str());
    }
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> toeplitz_eigenvector(std::size_t N, std::size_t k) {
    const double h = 1.0 / static_cast<double>(N + 1);
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i)
        v[i] = std::sin(static_cast<double>(k) * pi * static_cast<double>(i + 1) * h);
    return v;
}

SparseSymMatrix random_spd(std::size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dense[i][j] = dense[j][i] = dist(rng);
    MatrixBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) {
        double offsum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) offsum += std::abs(dense[i][j]);
        dense[i][i] = offsum + 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (dense[i][j] != 0.0) b.add(i, j, dense[i][j]);
    }
    return b.build(true);
}

// smooth coefficients with full joint dependence so no sparsity entry
// vanishes by symmetry (probed: they hit the theorem counts exactly)
MultiscaleCoefficient generic_two_scale(std::size_t d) {
    MultiscaleCoefficient c;
    c.n = 1;
    c.epsilons = {0.5};
    c.alpha = 0.1;
    c.beta = 10.0;
    c.name = "generic";
    if (d == 1)
        c.evaluate = [](const std::vector<double>& x,
                        const std::vector<std::vector<double>>& ys) {
            return (1.0 + 0.5 * x[0]) * (2.0 + std::cos(2.0 * pi * ys[0][0]));
        };
    else
        c.evaluate = [](const std::vector<double>& x,
                        const std::vector<std::vector<double>>& ys) {
            return (1.0 + 0.4 * x[0]) * (1.0 + 0.25 * x[1]) *
                   (2.0 + std::cos(2.0 * pi * ys[0][0] + 0.4) +
                    0.7 * std::cos(2.0 * pi * ys[0][1] + 1.1) +
                    0.5 * std::cos(2.0 * pi * (ys[0][0] + ys[0][1]) + 0.2));
        };
    c.validate();
    return c;
}

MultiscaleCoefficient generic_reiterated() {
    MultiscaleCoefficient c;
    c.n = 2;
    c.epsilons = {0.5, 0.25};
    c.alpha = 0.25;
    c.beta = 20.0;
    c.name = "generic2";
    c.evaluate = [](const std::vector<double>& x, const std::vector<std::vector<double>>& ys) {
        double a = 1.0 + 0.3 * x[0];
        for (const auto& y : ys) a *= 2.0 + std::cos(2.0 * pi * y[0]);
        return a;
    };
    c.validate();
    return c;
}

// tridiagonal Cholesky-free Thomas solve for the d=1 marching references
std::vector<double> thomas_solve(const SparseSymMatrix& t, std::vector<double> rhs) {
    const std::size_t n = t.n_rows();
    std::vector<double> diag(n), sup(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& e : t.row(i)) {
            if (e.col == i) diag[i] = e.value;
            if (e.col == i + 1) sup[i] = e.value;
        }
    std::vector<double> c(n, 0.0);
    c[0] = sup[0] / diag[0];
    rhs[0] /= diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - sup[i - 1] * c[i - 1];
        c[i] = sup[i] / m;
        rhs[i] = (rhs[i] - sup[i - 1] * rhs[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return rhs;
}

// implicit Euler heat marching, sparse (d=1), source g per node per unit mass
std::vector<double> march_parabolic_1d(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                       const std::vector<double>& load, double dt,
                                       std::size_t steps) {
    auto lhs = add_scaled(1.0, M, dt, A);
    std::vector<double> u(M.n_rows(), 0.0);
    for (std::size_t j = 0; j < steps; ++j) {
        auto rhs = M.apply(u);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * load[i];
        u = thomas_solve(lhs, rhs);
    }
    return u;
}

// implicit midpoint wave marching, sparse (d=1), f = 0
std::vector<double> march_wave_1d(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                  std::vector<double> u, double dt, std::size_t steps) {
    const double q = dt * dt / 4.0;
    auto lhs = add_scaled(1.0, M, q, A);
    std::vector<double> v(M.n_rows(), 0.0);
    for (std::size_t j = 0; j < steps; ++j) {
        auto au = A.apply(u);
        auto rhs = M.apply(u);
        auto mv = M.apply(v);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += dt * mv[i] - q * au[i];
        auto u_next = thomas_solve(lhs, rhs);
        auto au_next = A.apply(u_next);
        auto rhs_v = mv;
        for (std::size_t i = 0; i < rhs_v.size(); ++i)
            rhs_v[i] -= 0.5 * dt * (au[i] + au_next[i]);
        v = thomas_solve(M, rhs_v);
        u = std::move(u_next);
    }
    return u;
}

std::vector<double> canonical_rhs_one(const TensorMesh& mesh) {
    return assemble_force([](const std::vector<double>&) { return 1.0; }, mesh);
}

// ---------------------------------------------------------------- criteria

bool criterion1() {
    for (std::size_t N : {1, 3, 7, 31}) {
        TensorMesh mesh(1, N);
        const double h = mesh.h();
        auto m = mass_1d(mesh);
        auto k = stiffness_1d(mesh);
        for (std::size_t i = 0; i < N; ++i) {
            for (const auto& e : m.row(i)) {
                const double want = e.col == i ? 2.0 * h / 3.0 : h / 6.0;
                check(std::abs(e.value - want) <= 1e-15, "mass entry N=" + std::to_string(N));
            }
            check(m.row(i).size() == (N == 1 ? 1 : (i == 0 || i + 1 == N ? 2 : 3)),
                  "mass stencil width");
            for (const auto& e : k.row(i)) {
                const double want = e.col == i ? 2.0 / h : -1.0 / h;
                check(std::abs(e.value - want) <= 1e-15, "stiffness entry N=" + std::to_string(N));
            }
        }
    }
    return failures == 0;
}

bool criterion2() {
    auto one = [](const std::vector<double>&) { return 1.0; };
    for (std::size_t d : {1, 2, 3}) {
        TensorMesh mesh(d, d == 3 ? 5 : 7);
        auto a = assemble_canonical(presets::sin1d(0.5), mesh);
        const auto want = static_cast<std::size_t>(std::lround(std::pow(3.0, d)));
        check(a.sparsity() == want, "s(A) = 3^d at d=" + std::to_string(d));
    }
    for (std::size_t d : {1, 2}) {
        TensorMesh mesh(d, d == 1 ? 7 : 3);
        auto sys = assemble_two_scale(generic_two_scale(d), mesh, one);
        const auto want = static_cast<std::size_t>(std::lround(std::pow(9.0, d) + std::pow(3.0, d)));
        std::size_t mx = 0;
        for (std::size_t r = 0; r < sys.u0_offset; ++r)
            mx = std::max(mx, sys.matrix.row(r).size());
        check(mx == want, "s(A~) = 3^{2d}+3^d on corrector rows at d=" + std::to_string(d) +
                              " (got " + std::to_string(mx) + ")");
    }
    {
        TensorMesh mesh(1, 3);
        auto sys = assemble_reiterated(generic_reiterated(), mesh, 2, one);
        check(sys.matrix.sparsity() == 39, "reiterated s = 3 + 9 + 27 at n=2, d=1 (got " +
                                               std::to_string(sys.matrix.sparsity()) + ")");
    }
    return failures == 0;
}

bool criterion3() {
    const std::vector<OperatorFamily> families = {
        OperatorFamily::elliptic_canonical,    OperatorFamily::elliptic_two_scale,
        OperatorFamily::parabolic_canonical,   OperatorFamily::parabolic_homogenized,
        OperatorFamily::wave_canonical,        OperatorFamily::wave_homogenized,
    };
    const char* names[] = {"elliptic_canonical",  "elliptic_two_scale", "parabolic_canonical",
                           "parabolic_homogenized", "wave_canonical",   "wave_homogenized"};
    for (std::size_t d : {1, 2}) {
        std::vector<MultiscaleCoefficient> coeffs = {presets::sin1d(0.25),
                                                     presets::xy_product(0.25)};
        for (std::size_t fi = 0; fi < families.size(); ++fi) {
            const bool canonical = fi == 0 || fi == 2 || fi == 4;
            for (std::size_t N : {7, 15, 31, 63}) {
                // two-scale-based families at d=2 are restricted to the sizes
                // that stay at desk scale (~65k dof)
                if (d == 2 && !canonical && N > 15) continue;
                for (const auto& coeff : coeffs) {
                    BoundsCase c;
                    c.coeff = coeff;
                    c.d = d;
                    c.N = N;
                    c.dt = 1.0 / static_cast<double>(N + 1);
                    c.family = families[fi];
                    // the bounds hold with wide margins; a 1e-6 eigenvalue
                    // tolerance keeps Lanczos within its iteration budget on
                    // the ill-conditioned coupled systems
                    c.eig_tol = 1e-6;
                    c.eig_max_iter = 2000;
                    auto rep = verify_bounds(c);
                    check(rep.bound_satisfied,
                          std::string(names[fi]) + " bound at d=" + std::to_string(d) +
                              " N=" + std::to_string(N) + " coeff=" + coeff.name);
                }
            }
        }
    }
    // measured kappa(A) slope -2 in h for the canonical elliptic operator
    std::vector<double> lh, lk;
    for (std::size_t N : {7, 15, 31, 63}) {
        BoundsCase c;
        c.coeff = presets::constant(1.0);
        c.N = N;
        c.family = OperatorFamily::elliptic_canonical;
        lh.push_back(std::log(1.0 / static_cast<double>(N + 1)));
        lk.push_back(std::log(verify_bounds(c).kappa));
    }
    check_close(fit_slope(lh, lk), -2.0, 0.1, "kappa(A) slope in h");
    return failures == 0;
}

bool criterion4() {
    // elliptic L2 order 2: -u'' = pi^2 sin(pi x), u = sin(pi x)
    std::vector<double> lh, le;
    for (std::size_t N : {7, 15, 31, 63}) {
        TensorMesh mesh(1, N);
        auto k = stiffness_1d(mesh);
        auto f = assemble_force([](const std::vector<double>& x) {
            return pi * pi * std::sin(pi * x[0]);
        }, mesh);
        auto u = dense_direct_solve(k, f);
        lh.push_back(std::log(mesh.h()));
        le.push_back(std::log(
            l2_error_vs_function(mesh, u, [](double x) { return std::sin(pi * x); })));
    }
    check_close(fit_slope(lh, le), 2.0, 0.1, "elliptic L2 slope");

    // implicit Euler order 1 / midpoint order 2 on the lowest stiffness mode
    const std::size_t N = 7;
    TensorMesh mesh(1, N);
    auto m = mass_1d(mesh);
    auto k = stiffness_1d(mesh);
    const double h = mesh.h();
    // sin modes diagonalize M and K simultaneously; the ODE rate is the ratio
    const double lambda =
        (2.0 / h * (1.0 - std::cos(pi * h))) / (h * (2.0 + std::cos(pi * h)) / 3.0);
    auto u0 = toeplitz_eigenvector(N, 1);
    auto zero = [N](double) { return std::vector<double>(N, 0.0); };

    std::vector<double> ldt, lerr;
    for (std::size_t steps : {40, 80, 160, 320}) {
        const double dt = 0.5 / static_cast<double>(steps);
        auto traj = march_reference(parabolic_canonical(m, k, dt, steps, zero, u0));
        auto diff = traj.back();
        const double exact = std::exp(-lambda * 0.5);
        for (std::size_t i = 0; i < N; ++i) diff[i] -= exact * u0[i];
        ldt.push_back(std::log(dt));
        lerr.push_back(std::log(l2_norm_mass(m, diff)));
    }
    check_close(fit_slope(ldt, lerr), 1.0, 0.1, "implicit Euler slope");

    const double omega = std::sqrt(lambda);
    ldt.clear();
    lerr.clear();
    for (std::size_t steps : {20, 40, 80, 160}) {
        const double dt = 1.0 / static_cast<double>(steps);
        auto traj = march_reference(wave_canonical(m, k, dt, steps, zero, u0));
        std::vector<double> diff(traj.back().begin(), traj.back().begin() + N);
        const double exact = std::cos(omega * 1.0);
        for (std::size_t i = 0; i < N; ++i) diff[i] -= exact * u0[i];
        ldt.push_back(std::log(dt));
        lerr.push_back(std::log(l2_norm_mass(m, diff)));
    }
    check_close(fit_slope(ldt, lerr), 2.0, 0.1, "implicit midpoint slope");

    // discrete energy conservation for f = 0
    auto traj = march_reference(wave_canonical(m, k, 0.05, 40, zero, u0));
    auto energy = [&](const std::vector<double>& u, const std::vector<double>& w) {
        return 0.5 * dot(w, m.apply(w)) + 0.5 * dot(u, k.apply(u));
    };
    const double e0 = energy(u0, std::vector<double>(N, 0.0));
    for (const auto& x : traj) {
        std::vector<double> u(x.begin(), x.begin() + N), w(x.begin() + N, x.end());
        check(std::abs(energy(u, w) - e0) <= 1e-8 * e0, "midpoint energy drift");
    }
    return failures == 0;
}

bool criterion5() {
    const double a0 = std::sqrt(3.0);  // harmonic mean of 2 + sin(2 pi y)
    auto cell = cell_problem_1d([](double y) { return 2.0 + std::sin(2.0 * pi * y); });
    check(std::abs(cell.homogenized_coeff - a0) <= 1e-8, "harmonic mean vs closed form");

    const std::vector<double> epss = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::vector<double> err_ell, err_par, err_wav;
    for (double eps : epss) {
        const std::size_t N = static_cast<std::size_t>(std::lround(128.0 / eps)) - 1;
        TensorMesh mesh(1, N);
        auto A = assemble_canonical(presets::sin1d(eps), mesh);
        auto A0 = scale(a0, stiffness_1d(mesh));
        auto M = mass_1d(mesh);
        const double dt = eps / 16.0;
        const auto steps = static_cast<std::size_t>(std::lround(1.0 / dt));

        // elliptic: resolved canonical solve vs the exact homogenized limit
        auto u_ell = thomas_solve(A, canonical_rhs_one(mesh));
        err_ell.push_back(l2_error_vs_function(
            mesh, u_ell, [a0](double x) { return x * (1.0 - x) / (2.0 * a0); }));

        // parabolic with f = 1 (L^inf source), u0 = 0, compared at T = 1 to the
        // homogenized marcher on the same mesh and step (cancels dt error)
        auto load = canonical_rhs_one(mesh);
        auto up = march_parabolic_1d(M, A, load, dt, steps);
        auto up0 = march_parabolic_1d(M, A0, load, dt, steps);
        std::vector<double> dp(N);
        for (std::size_t i = 0; i < N; ++i) dp[i] = up[i] - up0[i];
        err_par.push_back(l2_norm_mass(M, dp));

        // wave with smooth standing-wave data, f = 0, compared at T = 1
        std::vector<double> u0(N);
        for (std::size_t i = 0; i < N; ++i)
            u0[i] = std::sin(pi * static_cast<double>(i + 1) * mesh.h());
        auto uw = march_wave_1d(M, A, u0, dt, steps);
        auto uw0 = march_wave_1d(M, A0, u0, dt, steps);
        std::vector<double> dw(N);
        for (std::size_t i = 0; i < N; ++i) dw[i] = uw[i] - uw0[i];
        err_wav.push_back(l2_norm_mass(M, dw));
    }
    check_close(homogenization_error_rate(epss, err_ell).slope, 1.0, 0.2, "elliptic rate");
    check_close(homogenization_error_rate(epss, err_par).slope, 1.0, 0.2, "parabolic rate");
    check_close(homogenization_error_rate(epss, err_wav).slope, 1.0, 0.2, "wave rate");
    return failures == 0;
}

bool criterion6() {
    // (a) Theorem 3 decay rate for the d=1, N=7 elliptic system
    const std::size_t N = 7;
    TensorMesh mesh(1, N);
    auto a = assemble_canonical(presets::sin1d(0.25), mesh);
    auto f = canonical_rhs_one(mesh);
    std::vector<double> u0(N, 0.0);
    auto u_inf = dense_direct_solve(a, f);
    const double lmin = extreme_eigs(a, 1e-10).first;

    const double T = 2.0 / lmin * 3.0;  // a few decades of decay
    auto ode = extend_system(a, f, u0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(hermitian_split(ode).first,
                                                       Eigen::EigenvaluesOnly);
    const double front = hs.eigenvalues().maxCoeff() - std::min(0.0, hs.eigenvalues().minCoeff());
    auto sys = schrodingerize(ode, 2.0 + std::log(1e2) + front * T, 0.02);

    double w0 = 0.0;
    for (const auto& z : sys.w) w0 += std::norm(z);
    w0 = std::sqrt(w0);

    std::vector<double> ts, lr;
    double t_accum = 0.0;
    for (int s = 1; s <= 8; ++s) {
        const double t = T * static_cast<double>(s) / 8.0;
        evolve(sys, t - t_accum);
        t_accum = t;
        auto ur = recover_u(sys);
        std::vector<double> diff(N);
        for (std::size_t i = 0; i < N; ++i) diff[i] = ur[i] - u_inf[i];
        ts.push_back(t);
        lr.push_back(std::log(std::max(norm2(diff), 1e-300)));
    }
    check_close(-fit_slope(ts, lr), lmin, 0.05 * lmin, "Theorem 3 decay rate");

    // (b) unitarity of the emulated evolution
    double w1 = 0.0;
    for (const auto& z : sys.w) w1 += std::norm(z);
    w1 = std::sqrt(w1);
    check(std::abs(w1 - w0) <= 1e-8 * w0, "unitarity drift");

    // (c) end-to-end relaxation solves at delta = 1e-2
    std::mt19937 rng(2718);
    auto ar = random_spd(8, rng);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> fr(8);
    for (auto& v : fr) v = dist(rng);
    auto rep = relaxation_solve(ar, fr, std::vector<double>(8, 0.0), 1e-2);
    auto ur_star = dense_direct_solve(ar, fr);
    std::vector<double> dr(8);
    for (std::size_t i = 0; i < 8; ++i) dr[i] = rep.u[i] - ur_star[i];
    check(norm2(dr) / std::sqrt(8.0) <= 1e-2, "end-to-end random SPD 8x8");

    TensorMesh mesh15(1, 15);
    auto a15 = assemble_canonical(presets::sin1d(0.25), mesh15);
    auto f15 = canonical_rhs_one(mesh15);
    auto rep15 = relaxation_solve(a15, f15, std::vector<double>(15, 0.0), 1e-2);
    auto u15 = dense_direct_solve(a15, f15);
    std::vector<double> d15(15);
    for (std::size_t i = 0; i < 15; ++i) d15[i] = rep15.u[i] - u15[i];
    check(norm2(d15) / std::sqrt(15.0) <= 1e-2, "end-to-end d=1 N=15 elliptic");
    return failures == 0;
}

bool criterion7() {
    // (a) symbolic exponents against independently hard-coded Table 1 entries
    for (std::size_t d : {1, 2, 3}) {
        for (std::size_t n : {1, 2, 3}) {
            ExperimentConfig e;
            e.d = d;
            e.n = n;
            e.eps1 = e.delta = 0.25;
            const auto dd = static_cast<double>(d);
            const auto nn = static_cast<double>(n);
            struct Row {
                Equation eq;
                Model mo;
                double classical, quantum;
            };
            // Table 1 prints the parabolic/wave rows at n = 1 only; the
            // canonical h-exponent grows with n, so those forms are n=1 facts
            std::vector<Row> table = {
                {Equation::elliptic, Model::canonical, (nn + 1.0) * (dd + 1.0) / 2.0, nn + 2.0},
                {Equation::elliptic, Model::homogenized, ((nn + 1.0) * dd + 1.0) / 2.0, 2.0},
            };
            if (n == 1) {
                table.push_back({Equation::parabolic, Model::canonical, dd + 1.5, 2.0});
                table.push_back({Equation::parabolic, Model::homogenized, dd + 1.5, 2.0});
                table.push_back({Equation::wave, Model::canonical, dd + 1.0, 2.0});
                table.push_back({Equation::wave, Model::homogenized, dd + 1.5, 2.0});
            }
            for (const auto& row : table) {
                e.equation = row.eq;
                e.model = row.mo;
                check(classical_exponent(e).value() == row.classical,
                      "symbolic classical exponent d=" + std::to_string(d) +
                          " n=" + std::to_string(n));
                check(quantum_exponent(e).value() == row.quantum,
                      "symbolic quantum exponent d=" + std::to_string(d) +
                          " n=" + std::to_string(n));
            }
        }
    }

    // (b) numeric sweep fits at d=1, n=1
    const std::vector<double> eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    struct Cell {
        Equation eq;
        Model mo;
        bool classical;
        double want;
        const char* label;
    };
    const Cell cells[] = {
        {Equation::elliptic, Model::canonical, true, 2.0, "classical elliptic canonical"},
        {Equation::parabolic, Model::canonical, true, 2.5, "classical parabolic canonical"},
        {Equation::wave, Model::canonical, true, 2.0, "classical wave canonical"},
        {Equation::elliptic, Model::canonical, false, 3.0, "quantum elliptic canonical"},
        {Equation::parabolic, Model::canonical, false, 2.0, "quantum parabolic canonical"},
        {Equation::wave, Model::canonical, false, 2.0, "quantum wave canonical"},
        {Equation::elliptic, Model::homogenized, false, 2.0, "quantum elliptic homogenized"},
        {Equation::parabolic, Model::homogenized, false, 2.0, "quantum parabolic homogenized"},
        {Equation::wave, Model::homogenized, false, 2.0, "quantum wave homogenized"},
    };
    for (const auto& cell : cells) {
        std::vector<double> costs;
        for (double ep : eps) {
            ExperimentConfig e;
            e.equation = cell.eq;
            e.model = cell.mo;
            e.eps1 = e.delta = ep;
            auto rep = theory_report(e);
            costs.push_back(cell.classical ? rep.classical_cost : rep.queries);
        }
        check_close(fit_table1(eps, costs).exponent, cell.want, 0.2, cell.label);
    }
    return failures == 0;
}

bool criterion8() {
    // global bidiagonal solve vs sequential marching for all four layouts
    const std::size_t N = 5;
    TensorMesh mesh(1, N);
    auto M = mass_1d(mesh);
    auto A = assemble_canonical(presets::sin1d(0.5), mesh);
    auto hs = assemble_two_scale(presets::sin1d(0.5), mesh,
                                 [](const std::vector<double>&) { return 1.0; });
    std::vector<double> u0(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) u0[i] = std::sin(pi * static_cast<double>(i + 1) / 6.0);
    auto force = [N](double t) { return std::vector<double>(N, std::cos(t)); };

    const std::vector<BlockTimeSystem> systems = {
        parabolic_canonical(M, A, 0.05, 12, force, u0),
        parabolic_homogenized(hs, M, 0.05, 12, force, u0),
        wave_canonical(M, A, 0.05, 12, force, u0),
        wave_homogenized(hs, M, 0.05, 12, force, u0),
    };
    const char* layouts[] = {"parabolic_canonical", "parabolic_homogenized", "wave_canonical",
                             "wave_homogenized"};
    for (std::size_t s = 0; s < systems.size(); ++s) {
        auto traj = march_reference(systems[s]);
        auto global = solve_global(systems[s]);
        const std::size_t bs = systems[s].block_size();
        double scale = 1.0;
        for (double v : global) scale = std::max(scale, std::abs(v));
        for (std::size_t j = 0; j < systems[s].n_steps; ++j)
            for (std::size_t i = 0; i < bs; ++i)
                check(std::abs(global[j * bs + i] - traj[j][i]) <= 1e-9 * scale,
                      std::string("global vs marching: ") + layouts[s]);
    }

    // CG vs dense direct on assembled SPD systems up to 5000 dof
    auto one = [](const std::vector<double>&) { return 1.0; };
    std::vector<std::pair<SparseSymMatrix, std::vector<double>>> cases;
    {
        TensorMesh m1(1, 63);
        cases.emplace_back(assemble_canonical(presets::sin1d(0.25), m1), canonical_rhs_one(m1));
        TensorMesh m2(2, 15);
        cases.emplace_back(assemble_canonical(presets::xy_product(0.25), m2),
                           canonical_rhs_one(m2));
        TensorMesh m3(1, 15);
        auto ts = assemble_two_scale(presets::sin1d(0.25), m3, one);
        cases.emplace_back(ts.matrix, ts.force);
        TensorMesh m4(1, 3);
        auto re = assemble_reiterated(generic_reiterated(), m4, 2, one);
        cases.emplace_back(re.matrix, re.force);
        cases.emplace_back(add_scaled(1.0, mass_1d(m1), 0.01, stiffness_1d(m1)),
                           canonical_rhs_one(m1));
    }
    for (std::size_t s = 0; s < cases.size(); ++s) {
        const auto& [mat, rhs] = cases[s];
        check(mat.n_rows() <= 5000, "CG case size");
        auto x = cg_solve(mat, rhs, 1e-12).first;
        auto ref = dense_direct_solve(mat, rhs);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += (x[i] - ref[i]) * (x[i] - ref[i]);
            den += ref[i] * ref[i];
        }
        check(std::sqrt(num) <= 1e-8 * std::max(1.0, std::sqrt(den)),
              "CG vs dense, case " + std::to_string(s));
    }
    return failures == 0;
}

bool criterion9() {
    namespace fs = std::filesystem;
    const std::string bin = MQLAB_CLI_PATH;
    auto base = fs::temp_directory_path() / "mqlab_acceptance9";
    fs::remove_all(base);
    fs::create_directories(base);
    auto run = [&](const std::string& tag, int jobs) {
        const auto dir = base / tag;
        const std::string cmd = bin + " --preset eps_sweep --jobs " + std::to_string(jobs) +
                                " --out " + dir.string() + " > /dev/null";
        check(std::system(cmd.c_str()) == 0, "CLI exit code for " + tag);
        return dir;
    };
    auto d1 = run("a", 1), d2 = run("b", 1), d4 = run("c", 4);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::vector<fs::path> rel;
    for (const auto& e : fs::recursive_directory_iterator(d1))
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), d1));
    std::sort(rel.begin(), rel.end());
    check(rel.size() == 17, "sweep file count");  // 4 runs x 4 CSVs + sweep.csv
    for (const auto& r : rel) {
        const auto ref = slurp(d1 / r);
        check(!ref.empty() && ref == slurp(d2 / r), "byte-identical rerun: " + r.string());
        check(ref == slurp(d4 / r), "byte-identical across --jobs 4: " + r.string());
    }
    return failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, bool (*)()>> criteria = {
        {"matrix-entry exactness", criterion1},
        {"sparsity equalities", criterion2},
        {"spectral bounds", criterion3},
        {"FEM and time-integrator orders", criterion4},
        {"homogenization rates", criterion5},
        {"Schrodingerization correctness", criterion6},
        {"cost-model reproduction", criterion7},
        {"oracle equivalence", criterion8},
        {"CLI determinism", criterion9},
    };
    int first = 1, last = 9;
    if (argc > 1) {
        const int c = std::atoi(argv[1]);
        if (c < 1 || c > 9) {
            std::fprintf(stderr, "usage: acceptance [1-9]\n");
            return 2;
        }
        first = last = c;
    }
    bool all_ok = true;
    for (int c = first; c <= last; ++c) {
        failures = 0;
        bool ok = false;
        try {
            ok = criteria[static_cast<std::size_t>(c - 1)].second();
        } catch (const std::exception& ex) {
            detail_fail(std::string("exception: ") + ex.what());
        }
        std::printf("criterion %d (%s): %s\n", c, criteria[static_cast<std::size_t>(c - 1)].first,
                    ok ? "pass" : "FAIL");
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
