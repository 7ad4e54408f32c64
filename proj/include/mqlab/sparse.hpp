#pragma once

// Row-compressed sparse symmetric matrix used everywhere: mass/stiffness
// matrices, the coupled two-scale operators, and the global space-time blocks.
// Rows are kept as column-sorted (col, value) lists so a matvec touches each
// row in O(s) and per-row sparsity is directly measurable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mqlab {

struct SparseEntry {
    std::size_t col;
    double value;
};

class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    SparseSymMatrix(std::size_t n_rows, std::vector<std::vector<SparseEntry>> rows,
                    bool symmetric_flag)
        : n_rows_(n_rows), rows_(std::move(rows)), symmetric_flag_(symmetric_flag) {
        if (rows_.size() != n_rows_)
            throw std::invalid_argument("SparseSymMatrix: row count mismatch");
    }

    std::size_t n_rows() const { return n_rows_; }
    bool symmetric_flag() const { return symmetric_flag_; }
    const std::vector<SparseEntry>& row(std::size_t i) const { return rows_[i]; }

    double operator()(std::size_t i, std::size_t j) const {
        const auto& r = rows_[i];
        auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const SparseEntry& e, std::size_t c) { return e.col < c; });
        if (it != r.end() && it->col == j) return it->value;
        return 0.0;
    }

    std::size_t nnz() const {
        std::size_t c = 0;
        for (const auto& r : rows_) c += r.size();
        return c;
    }

    // max nonzeros in any row (the sparsity parameter s)
    std::size_t sparsity() const {
        std::size_t s = 0;
        for (const auto& r : rows_) s = std::max(s, r.size());
        return s;
    }

    double max_entry() const {
        double m = 0.0;
        for (const auto& r : rows_)
            for (const auto& e : r) m = std::max(m, std::abs(e.value));
        return m;
    }

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        if (x.size() != n_rows_) throw std::invalid_argument("matvec: size mismatch");
        y.assign(n_rows_, 0.0);
        for (std::size_t i = 0; i < n_rows_; ++i) {
            double acc = 0.0;
            for (const auto& e : rows_[i]) acc += e.value * x[e.col];
            y[i] = acc;
        }
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y;
        matvec(x, y);
        return y;
    }

    // checks the stored pattern really is symmetric (1e-14 relative)
    bool check_symmetry(double rel_tol = 1e-14) const {
        const double scale = std::max(max_entry(), 1.0);
        for (std::size_t i = 0; i < n_rows_; ++i)
            for (const auto& e : rows_[i])
                if (std::abs((*this)(e.col, i) - e.value) > rel_tol * scale) return false;
        return true;
    }

    void dump(std::ostream& os) const {
        os << n_rows_ << ' ' << n_rows_ << ' ' << nnz() << '\n';
        os << std::scientific << std::setprecision(17);
        for (std::size_t i = 0; i < n_rows_; ++i)
            for (const auto& e : rows_[i])
                os << (i + 1) << ' ' << (e.col + 1) << ' ' << e.value << '\n';
    }

    static SparseSymMatrix load(std::istream& is);

private:
    std::size_t n_rows_ = 0;
    std::vector<std::vector<SparseEntry>> rows_;
    bool symmetric_flag_ = false;
};

// Coordinate-style accumulator; duplicate (i,j) contributions are summed on
// build and entries below the structural-zero threshold are dropped so the
// sparsity equalities of the FEM theorems are testable exactly.
class MatrixBuilder {
public:
    explicit MatrixBuilder(std::size_t n) : n_(n), rows_(n) {}

    void add(std::size_t i, std::size_t j, double v) {
        if (i >= n_ || j >= n_) throw std::out_of_range("MatrixBuilder::add: index out of range");
        rows_[i].push_back({j, v});
    }

    std::size_t size() const { return n_; }

    SparseSymMatrix build(bool symmetric_flag, double drop_tol = 1e-300) {
        std::vector<std::vector<SparseEntry>> out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            auto& r = rows_[i];
            std::sort(r.begin(), r.end(),
                      [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
            std::vector<SparseEntry> merged;
            merged.reserve(r.size());
            for (const auto& e : r) {
                if (!merged.empty() && merged.back().col == e.col)
                    merged.back().value += e.value;
                else
                    merged.push_back(e);
            }
            merged.erase(std::remove_if(merged.begin(), merged.end(),
                                        [&](const SparseEntry& e) {
                                            return std::abs(e.value) < drop_tol;
                                        }),
                         merged.end());
            out[i] = std::move(merged);
        }
        return SparseSymMatrix(n_, std::move(out), symmetric_flag);
    }

private:
    std::size_t n_;
    std::vector<std::vector<SparseEntry>> rows_;
};

inline SparseSymMatrix SparseSymMatrix::load(std::istream& is) {
    std::size_t nr = 0, nc = 0, nnz = 0;
    if (!(is >> nr >> nc >> nnz)) throw std::runtime_error("matrix load: bad header");
    if (nr != nc) throw std::runtime_error("matrix load: non-square");
    MatrixBuilder b(nr);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v)) throw std::runtime_error("matrix load: truncated triples");
        b.add(i - 1, j - 1, v);
    }
    auto m = b.build(false);
    return SparseSymMatrix(m.n_rows(),
                           [&] {
                               std::vector<std::vector<SparseEntry>> rows(m.n_rows());
                               for (std::size_t i = 0; i < m.n_rows(); ++i) rows[i] = m.row(i);
                               return rows;
                           }(),
                           m.check_symmetry());
}

inline SparseSymMatrix identity(std::size_t n) {
    MatrixBuilder b(n);
    for (std::size_t i = 0; i < n; ++i) b.add(i, i, 1.0);
    return b.build(true);
}

// Kronecker product, row-major with the first factor outer:
// entry ((i*nb + k), (j*nb + l)) = a(i,j) * b(k,l).
inline SparseSymMatrix kron(const SparseSymMatrix& a, const SparseSymMatrix& b) {
    const std::size_t na = a.n_rows(), nb = b.n_rows();
    if (na != 0 && nb > static_cast<std::size_t>(-1) / na)
        throw std::overflow_error("kron: dimension overflow");
    const std::size_t n = na * nb;
    std::vector<std::vector<SparseEntry>> rows(n);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t k = 0; k < nb; ++k) {
            auto& out = rows[i * nb + k];
            out.reserve(a.row(i).size() * b.row(k).size());
            for (const auto& ea : a.row(i))
                for (const auto& eb : b.row(k))
                    out.push_back({ea.col * nb + eb.col, ea.value * eb.value});
            std::sort(out.begin(), out.end(),
                      [](const SparseEntry& x, const SparseEntry& y) { return x.col < y.col; });
        }
    }
    return SparseSymMatrix(n, std::move(rows),
                           a.symmetric_flag() && b.symmetric_flag());
}

// alpha*a + beta*b
inline SparseSymMatrix add_scaled(double alpha, const SparseSymMatrix& a, double beta,
                                  const SparseSymMatrix& b) {
    if (a.n_rows() != b.n_rows()) throw std::invalid_argument("add_scaled: size mismatch");
    MatrixBuilder out(a.n_rows());
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        for (const auto& e : a.row(i)) out.add(i, e.col, alpha * e.value);
        for (const auto& e : b.row(i)) out.add(i, e.col, beta * e.value);
    }
    return out.build(a.symmetric_flag() && b.symmetric_flag());
}

inline SparseSymMatrix scale(double alpha, const SparseSymMatrix& a) {
    MatrixBuilder out(a.n_rows());
    for (std::size_t i = 0; i < a.n_rows(); ++i)
        for (const auto& e : a.row(i)) out.add(i, e.col, alpha * e.value);
    return out.build(a.symmetric_flag());
}

inline SparseSymMatrix block_diag(const std::vector<const SparseSymMatrix*>& blocks) {
    std::size_t n = 0;
    bool sym = true;
    for (const auto* b : blocks) {
        n += b->n_rows();
        sym = sym && b->symmetric_flag();
    }
    std::vector<std::vector<SparseEntry>> rows(n);
    std::size_t off = 0;
    for (const auto* b : blocks) {
        for (std::size_t i = 0; i < b->n_rows(); ++i) {
            auto& out = rows[off + i];
            out.reserve(b->row(i).size());
            for (const auto& e : b->row(i)) out.push_back({off + e.col, e.value});
        }
        off += b->n_rows();
    }
    return SparseSymMatrix(n, std::move(rows), sym);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace mqlab
