#include "drcov/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drcov/error.hpp"

namespace drcov {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::uint32_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != n_rows_ + 1)
        throw ShapeError("csr: row_offsets must have n_rows + 1 entries");
    if (row_offsets_.front() != 0 || row_offsets_.back() != col_indices_.size())
        throw ShapeError("csr: row_offsets must start at 0 and end at nnz");
    if (values_.size() != col_indices_.size())
        throw ShapeError("csr: values and col_indices differ in length");
    for (std::size_t r = 0; r < n_rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1])
            throw ShapeError("csr: row_offsets decreasing at row " + std::to_string(r));
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (col_indices_[k] >= n_cols_)
                throw ShapeError("csr: column index out of range in row " + std::to_string(r));
            if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1])
                throw ShapeError("csr: columns not strictly increasing in row " + std::to_string(r));
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets, DuplicatePolicy policy) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        const auto& t = triplets[i];
        if (t.row >= n_rows || t.col >= n_cols)
            throw ShapeError("from_triplets: entry (" + std::to_string(t.row) + "," +
                             std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                             std::to_string(n_cols));
        if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
            if (policy == DuplicatePolicy::Sum) vals.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        vals.push_back(t.value);
        ++offsets[t.row + 1];
    }
    for (std::size_t r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<std::uint32_t> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = static_cast<std::uint32_t>(i);
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    if (r >= n_rows_ || c >= n_cols_) throw ShapeError("at: index out of range");
    const auto cs = row_cols(r);
    const auto it = std::lower_bound(cs.begin(), cs.end(), static_cast<std::uint32_t>(c));
    if (it == cs.end() || *it != c) return 0.0;
    return values_[row_offsets_[r] + static_cast<std::size_t>(it - cs.begin())];
}

bool SparseMatrix::is_symmetric() const {
    if (!is_square()) return false;
    for (std::size_t r = 0; r < n_rows_; ++r) {
        const auto cs = row_cols(r);
        const auto vs = row_values(r);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            const auto c = cs[k];
            const auto mirror = row_cols(c);
            const auto it = std::lower_bound(mirror.begin(), mirror.end(), static_cast<std::uint32_t>(r));
            if (it == mirror.end() || *it != r) return false;
            if (row_values(c)[static_cast<std::size_t>(it - mirror.begin())] != vs[k]) return false;
        }
    }
    return true;
}

Matrix SparseMatrix::to_dense() const {
    Matrix m(n_rows_, n_cols_);
    for (std::size_t r = 0; r < n_rows_; ++r)
        for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            m(r, col_indices_[k]) = values_[k];
    return m;
}

std::vector<std::uint32_t> degrees(const SparseMatrix& a) {
    std::vector<std::uint32_t> deg(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        deg[r] = static_cast<std::uint32_t>(a.row_offsets()[r + 1] - a.row_offsets()[r]);
    return deg;
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
    if (!a.is_symmetric())
        throw ShapeError("normalize_adjacency: input is not symmetric");
    std::vector<double> inv_sqrt(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double deg = 0.0;
        for (double v : a.row_values(r)) {
            if (v < 0.0) throw ShapeError("normalize_adjacency: negative entry in row " + std::to_string(r));
            deg += v;
        }
        if (deg > 0.0) inv_sqrt[r] = 1.0 / std::sqrt(deg);
    }
    std::vector<double> vals(a.values().begin(), a.values().end());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k)
            vals[k] *= inv_sqrt[r] * inv_sqrt[a.col_indices()[k]];
    return SparseMatrix(a.rows(), a.cols(),
                        std::vector<std::size_t>(a.row_offsets().begin(), a.row_offsets().end()),
                        std::vector<std::uint32_t>(a.col_indices().begin(), a.col_indices().end()),
                        std::move(vals));
}

SparseMatrix add_self_loops(const SparseMatrix& s) {
    if (!s.is_square()) throw ShapeError("add_self_loops: matrix is not square");
    std::vector<Triplet> t;
    t.reserve(s.nnz() + s.rows());
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (std::size_t k = s.row_offsets()[r]; k < s.row_offsets()[r + 1]; ++k)
            t.push_back({static_cast<std::uint32_t>(r), s.col_indices()[k], s.values()[k]});
        t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r), 1.0});
    }
    return SparseMatrix::from_triplets(s.rows(), s.cols(), std::move(t), DuplicatePolicy::Sum);
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    if (s.cols() != x.rows())
        throw ShapeError("spmm: sparse " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                         " times dense " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    Matrix out(s.rows(), x.cols());
    const std::size_t d = x.cols();
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double* o = out.data() + r * d;
        for (std::size_t k = s.row_offsets()[r]; k < s.row_offsets()[r + 1]; ++k) {
            const double v = s.values()[k];
            const double* xr = x.data() + static_cast<std::size_t>(s.col_indices()[k]) * d;
            for (std::size_t j = 0; j < d; ++j) o[j] += v * xr[j];
        }
    }
    return out;
}

}  // namespace drcov
