#pragma once

// Quadrature helpers. Assembly uses a composite 5-point Gauss rule whose
// subcell width resolves the fastest coefficient oscillation; the adaptive
// Simpson routine backs the 1D cell problem (harmonic means to 1e-12-ish).

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>

namespace mqlab {

// 5-point Gauss-Legendre nodes/weights on [-1, 1]
struct Gauss5 {
    static constexpr int n = 5;
    static constexpr double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                    0.5384693101056831, 0.9061798459386640};
    static constexpr double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
};

// integral of f over [a, b] with m equal subcells, Gauss-5 on each
inline double composite_gauss(const std::function<double(double)>& f, double a, double b,
                              std::size_t m) {
    if (m == 0) throw std::invalid_argument("composite_gauss: zero subcells");
    const double dx = (b - a) / static_cast<double>(m);
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        const double lo = a + static_cast<double>(c) * dx;
        const double mid = lo + 0.5 * dx;
        double acc = 0.0;
        for (int q = 0; q < Gauss5::n; ++q) acc += Gauss5::w[q] * f(mid + 0.5 * dx * Gauss5::x[q]);
        total += acc * 0.5 * dx;
    }
    return total;
}

namespace detail {
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int max_depth = 40) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace mqlab
