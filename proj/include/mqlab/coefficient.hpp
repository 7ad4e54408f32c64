#pragma once

// Scalar multiscale coefficients a(x, y_1, ..., y_n) with ellipticity bounds
// and the named presets the CLI exposes. Tensor-valued coefficients are out of
// scope; every printed bound depends only on (alpha, beta).

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqlab {

struct MultiscaleCoefficient {
    // x has d components; ys has one d-component entry per fine scale
    using Eval = std::function<double(const std::vector<double>& x,
                                      const std::vector<std::vector<double>>& ys)>;

    std::size_t n = 0;             // number of fine scales
    std::vector<double> epsilons;  // eps_1 > eps_2 > ... > eps_n, in (0,1)
    Eval evaluate;
    double alpha = 1.0;
    double beta = 1.0;
    std::string name = "custom";

    void validate() const {
        if (alpha <= 0.0 || beta < alpha)
            throw std::invalid_argument("coefficient: need 0 < alpha <= beta");
        if (epsilons.size() != n)
            throw std::invalid_argument("coefficient: epsilon count != n");
        double prev = 1.0;
        for (double e : epsilons) {
            if (!(e > 0.0 && e < 1.0 && e < prev))
                throw std::invalid_argument("coefficient: epsilons must decrease within (0,1)");
            prev = e;
        }
    }

    double eps_min() const { return epsilons.empty() ? 1.0 : epsilons.back(); }

    // evaluate at physical x with y_k = x/eps_k (canonical model view)
    double at_physical(const std::vector<double>& x) const {
        std::vector<std::vector<double>> ys(n);
        for (std::size_t k = 0; k < n; ++k) {
            ys[k].resize(x.size());
            for (std::size_t l = 0; l < x.size(); ++l) {
                double y = x[l] / epsilons[k];
                ys[k][l] = y - std::floor(y);
            }
        }
        return evaluate(x, ys);
    }
};

namespace presets {

inline MultiscaleCoefficient constant(double value = 1.0, std::size_t n = 0,
                                      std::vector<double> eps = {}) {
    MultiscaleCoefficient c;
    c.n = n;
    c.epsilons = std::move(eps);
    c.alpha = c.beta = value;
    c.name = "constant";
    c.evaluate = [value](const std::vector<double>&, const std::vector<std::vector<double>>&) {
        return value;
    };
    c.validate();
    return c;
}

// a(y) = 2 + sin(2 pi y^1), single fine scale
inline MultiscaleCoefficient sin1d(double eps1) {
    MultiscaleCoefficient c;
    c.n = 1;
    c.epsilons = {eps1};
    c.alpha = 1.0;
    c.beta = 3.0;
    c.name = "sin1d";
    c.evaluate = [](const std::vector<double>&, const std::vector<std::vector<double>>& ys) {
        return 2.0 + std::sin(2.0 * std::numbers::pi * ys[0][0]);
    };
    c.validate();
    return c;
}

// smooth checkerboard in the first two micro directions
inline MultiscaleCoefficient checker2d(double eps1) {
    MultiscaleCoefficient c;
    c.n = 1;
    c.epsilons = {eps1};
    c.alpha = 1.0;
    c.beta = 3.0;
    c.name = "checker2d";
    c.evaluate = [](const std::vector<double>&, const std::vector<std::vector<double>>& ys) {
        const double p = 2.0 * std::numbers::pi;
        const double y2 = ys[0].size() > 1 ? ys[0][1] : 0.25;
        return 2.0 + std::sin(p * ys[0][0]) * std::sin(p * y2);
    };
    c.validate();
    return c;
}

// product of shifted sines over all n scales, normalized to stay in [2^-n*? ..]
inline MultiscaleCoefficient product_nscale(std::size_t n, double eps1) {
    MultiscaleCoefficient c;
    c.n = n;
    c.epsilons.resize(n);
    double e = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        e *= eps1;  // eps_k = eps1^k
        c.epsilons[k] = e;
    }
    c.alpha = std::pow(0.5, static_cast<double>(n));
    c.beta = std::pow(1.5, static_cast<double>(n));
    c.name = "product_nscale";
    c.evaluate = [](const std::vector<double>&, const std::vector<std::vector<double>>& ys) {
        double a = 1.0;
        for (const auto& y : ys) a *= 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * y[0]);
        return a;
    };
    c.validate();
    return c;
}

// joint x,y dependence; exercises the cross blocks of the two-scale operator
inline MultiscaleCoefficient xy_product(double eps1) {
    MultiscaleCoefficient c;
    c.n = 1;
    c.epsilons = {eps1};
    c.alpha = 1.0;
    c.beta = 4.5;
    c.name = "xy_product";
    c.evaluate = [](const std::vector<double>& x, const std::vector<std::vector<double>>& ys) {
        return (1.0 + 0.5 * x[0]) * (2.0 + std::sin(2.0 * std::numbers::pi * ys[0][0]));
    };
    c.validate();
    return c;
}

inline MultiscaleCoefficient by_name(const std::string& name, double eps1, std::size_t n = 1) {
    if (name == "constant") return constant(1.0);
    if (name == "sin1d") return sin1d(eps1);
    if (name == "checker2d") return checker2d(eps1);
    if (name == "product_nscale") return product_nscale(n, eps1);
    if (name == "xy_product") return xy_product(eps1);
    throw std::invalid_argument("unknown coefficient preset: " + name);
}

}  // namespace presets
}  // namespace mqlab
