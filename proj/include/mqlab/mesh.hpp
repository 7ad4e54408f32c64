#pragma once

// Uniform tensor-product mesh on [0,1]^d with N interior nodes per direction.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mqlab {

struct TensorMesh {
    std::size_t d = 1;  // spatial dimension
    std::size_t N = 1;  // interior nodes per direction

    TensorMesh() = default;

    TensorMesh(std::size_t dim, std::size_t n_interior) : d(dim), N(n_interior) {
        if (d < 1) throw std::invalid_argument("TensorMesh: d must be >= 1");
        if (N < 1) throw std::invalid_argument("TensorMesh: N must be >= 1");
    }

    double h() const { return 1.0 / static_cast<double>(N + 1); }

    std::size_t interior_dof() const {
        std::size_t dof = 1;
        for (std::size_t l = 0; l < d; ++l) {
            if (dof > static_cast<std::size_t>(-1) / N)
                throw std::overflow_error("TensorMesh: dof overflow");
            dof *= N;
        }
        return dof;
    }
};

// odometer over a mixed-radix index box; flattening is row-major with the
// first coordinate outermost, matching the kron() convention
inline bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& radix) {
    for (std::size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] < radix[i]) return true;
        idx[i] = 0;
    }
    return false;
}

inline std::size_t flatten(const std::vector<std::size_t>& idx,
                           const std::vector<std::size_t>& radix) {
    std::size_t f = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) f = f * radix[i] + idx[i];
    return f;
}

}  // namespace mqlab
