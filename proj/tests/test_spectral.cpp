#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mqlab/fem.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/time_integrators.hpp"

using namespace mqlab;

namespace {

constexpr double pi = std::numbers::pi;

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

// joint x,y dependence so no two-scale cross entry vanishes by symmetry
MultiscaleCoefficient xy_cos_coeff() {
    MultiscaleCoefficient c;
    c.n = 1;
    c.epsilons = {0.5};
    c.alpha = 1.0;
    c.beta = 4.5;
    c.name = "xy_cos";
    c.evaluate = [](const std::vector<double>& x, const std::vector<std::vector<double>>& ys) {
        return (1.0 + 0.5 * x[0]) * (2.0 + std::cos(2.0 * pi * ys[0][0]));
    };
    c.validate();
    return c;
}

}  // namespace

TEST_CASE("Lanczos extremes match the closed-form Toeplitz spectrum") {
    // K1 at N=3, h=1/4: eigenvalues 8 (1 - cos(k pi / 4)), k = 1..3
    TensorMesh mesh(1, 3);
    auto k1 = stiffness_1d(mesh);
    auto [lmin, lmax] = extreme_eigs(k1, 1e-10);
    REQUIRE_THAT(lmin, Catch::Matchers::WithinAbs(8.0 * (1.0 - std::cos(pi / 4.0)), 1e-8));
    REQUIRE_THAT(lmax, Catch::Matchers::WithinAbs(8.0 * (1.0 - std::cos(3.0 * pi / 4.0)), 1e-8));
}

TEST_CASE("extreme_eigs handles the identity and rejects bad arguments") {
    auto [lmin, lmax] = extreme_eigs(identity(5), 1e-10);
    REQUIRE_THAT(lmin, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(lmax, Catch::Matchers::WithinAbs(1.0, 1e-12));

    REQUIRE_THROWS_AS(extreme_eigs(identity(5), 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(extreme_eigs(identity(5), -1.0), std::invalid_argument);

    // a starved iteration budget fails loudly with the Ritz history attached
    TensorMesh mesh(1, 63);
    auto k1 = stiffness_1d(mesh);
    REQUIRE_THROWS_WITH(extreme_eigs(k1, 1e-12, 3),
                        Catch::Matchers::ContainsSubstring("Ritz history"));
}

TEST_CASE("Lanczos agrees with a dense eigensolve on random SPD matrices") {
    std::mt19937 rng(4242);
    for (std::size_t n : {20, 60, 150}) {
        auto a = random_spd(n, rng);
        auto [lmin, lmax] = extreme_eigs(a, 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(a), Eigen::EigenvaluesOnly);
        const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
        REQUIRE_THAT(lmin, Catch::Matchers::WithinAbs(es.eigenvalues()(0), 1e-8 * scale));
        REQUIRE_THAT(lmax, Catch::Matchers::WithinAbs(
                               es.eigenvalues()(static_cast<Eigen::Index>(n) - 1), 1e-8 * scale));
    }
}

TEST_CASE("Poincare lower bound for the stiffness operator in 2d") {
    for (std::size_t N : {7, 15, 31}) {
        TensorMesh mesh(2, N);
        const double h = mesh.h();
        auto k = stiffness_d(mesh);
        auto [lmin, lmax] = extreme_eigs(k, 1e-8);
        REQUIRE(lmin >= pi * pi * (h / 3.0) * (h / 3.0));
        REQUIRE(lmax <= 4.0 * 2.0 * 1.0);  // lambda_max(K) <= 4 d h^{d-2}, d = 2
    }
}

TEST_CASE("verify_bounds passes for all six operator families at d=1") {
    auto coeff = xy_cos_coeff();
    const std::size_t N = 7;
    const double h = 1.0 / 8.0;

    BoundsCase c;
    c.coeff = coeff;
    c.N = N;
    c.dt = h;

    c.family = OperatorFamily::elliptic_canonical;
    auto r1 = verify_bounds(c);
    REQUIRE(r1.s == 3);
    REQUIRE(r1.method == SpectralMethod::eigen_symmetric);
    REQUIRE(r1.bound_satisfied);
    REQUIRE(r1.kappa == r1.lambda_max / r1.lambda_min);

    c.family = OperatorFamily::elliptic_two_scale;
    auto r2 = verify_bounds(c);
    REQUIRE(r2.s == 12);  // 3^{2d} + 3^d on the corrector rows
    REQUIRE(r2.bound_satisfied);
    // the proof-chain factor kappa(A~) <= 3^d kappa(A) relates the bound
    // constants, not the raw matrices: measured kappa(A~)/kappa(A) tends to
    // 3^d + 1 even for constant coefficients (4.000 at d=1, N=15), so the
    // matrix-level reading fails. Assert the bound-level relation plus a
    // measured ratio consistent with that observation.
    REQUIRE_THAT(r2.theory_bound_kappa,
                 Catch::Matchers::WithinRel(3.0 * r1.theory_bound_kappa, 1e-12));
    REQUIRE(r2.kappa <= (3.0 + 1.0) * r1.kappa * 1.05);

    c.family = OperatorFamily::parabolic_canonical;
    auto r3 = verify_bounds(c);
    REQUIRE(r3.s == 6);
    REQUIRE(r3.bound_satisfied);

    c.family = OperatorFamily::parabolic_homogenized;
    auto r4 = verify_bounds(c);
    REQUIRE(r4.bound_satisfied);

    c.family = OperatorFamily::wave_canonical;
    auto r5 = verify_bounds(c);
    REQUIRE(r5.s == 6);
    REQUIRE(r5.bound_satisfied);

    c.family = OperatorFamily::wave_homogenized;
    auto r6 = verify_bounds(c);
    REQUIRE(r6.bound_satisfied);
}

TEST_CASE("verify_bounds rejects missing dt and degenerate meshes") {
    BoundsCase c;
    c.coeff = presets::constant(1.0);
    c.family = OperatorFamily::parabolic_canonical;
    c.dt = 0.0;
    REQUIRE_THROWS_AS(verify_bounds(c), std::invalid_argument);
}

TEST_CASE("elliptic bound example at h = 1/16 with unit coefficient") {
    BoundsCase c;
    c.coeff = presets::constant(1.0);
    c.family = OperatorFamily::elliptic_canonical;
    c.N = 15;
    auto r = verify_bounds(c);
    const double h = 1.0 / 16.0;
    REQUIRE_THAT(r.theory_bound_kappa,
                 Catch::Matchers::WithinRel(4.0 * 3.0 / (pi * pi) / (h * h), 1e-12));
    REQUIRE(r.bound_satisfied);
    // with a unit coefficient the assembled operator is exactly K1, so the
    // extremes are the closed-form Toeplitz values
    const double mu1 = 2.0 / h * (1.0 - std::cos(pi * h));
    const double muN = 2.0 / h * (1.0 - std::cos(15.0 * pi * h));
    REQUIRE_THAT(r.lambda_min, Catch::Matchers::WithinRel(mu1, 1e-8));
    REQUIRE_THAT(r.lambda_max, Catch::Matchers::WithinRel(muN, 1e-8));
}

TEST_CASE("condition number slopes across the h sweep at dt = h") {
    auto coeff = presets::constant(1.0);
    std::vector<double> log_h, log_e, log_w;
    for (std::size_t N : {7, 15, 31, 63}) {
        const double h = 1.0 / static_cast<double>(N + 1);
        BoundsCase c;
        c.coeff = coeff;
        c.N = N;
        c.dt = h;

        c.family = OperatorFamily::elliptic_canonical;
        log_e.push_back(std::log(verify_bounds(c).kappa));
        c.family = OperatorFamily::wave_canonical;
        log_w.push_back(std::log(verify_bounds(c).kappa));
        log_h.push_back(std::log(h));
    }
    REQUIRE_THAT(fit_slope(log_h, log_e), Catch::Matchers::WithinAbs(-2.0, 0.1));
    REQUIRE_THAT(fit_slope(log_h, log_w), Catch::Matchers::WithinAbs(0.0, 0.1));

    // the parabolic carrier at dt = h has kappa ~ (4 d beta + h/3)/(h (1 + alpha
    // pi^2 h)); the (1 + alpha pi^2 h) factor steepens the coarse-sweep slope to
    // about -1.3, so the -1 exponent is measured on a finer sweep
    std::vector<double> log_hf, log_p;
    for (std::size_t N : {63, 127, 255, 511}) {
        const double h = 1.0 / static_cast<double>(N + 1);
        BoundsCase c;
        c.coeff = coeff;
        c.N = N;
        c.dt = h;
        c.family = OperatorFamily::parabolic_canonical;
        log_p.push_back(std::log(verify_bounds(c).kappa));
        log_hf.push_back(std::log(h));
    }
    REQUIRE_THAT(fit_slope(log_hf, log_p), Catch::Matchers::WithinAbs(-1.0, 0.15));
}

TEST_CASE("sigma route records the global bidiagonal system without a verdict") {
    TensorMesh mesh(1, 3);
    auto M = mass_1d(mesh);
    auto A = stiffness_1d(mesh);
    auto zero_force = [&](double) { return std::vector<double>(3, 0.0); };
    auto sys = parabolic_canonical(M, A, 0.1, 4, zero_force, std::vector<double>(3, 0.0));

    auto rep = global_sigma_report(sys);
    REQUIRE(rep.method == SpectralMethod::singular_values);
    REQUIRE(rep.s == 6);
    REQUIRE(rep.kappa >= 1.0);
    REQUIRE(std::isfinite(rep.kappa));
    REQUIRE(rep.bound_satisfied);  // vacuous: no printed constant for sigma(L)

    // sigma kappa of the identity is 1
    REQUIRE_THAT(sigma_kappa(Eigen::MatrixXd::Identity(6, 6)),
                 Catch::Matchers::WithinAbs(1.0, 1e-12));
}
