#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "drcov/dense.hpp"

namespace drcov {

struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
};

enum class DuplicatePolicy { Sum, KeepOne };

// Compressed sparse row matrix. Invariants, checked on construction:
// row_offsets has n_rows + 1 non-decreasing entries ending at nnz, and column
// indices are strictly increasing within each row.
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_{0} {}
    SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                 std::vector<std::uint32_t> col_indices, std::vector<double> values);

    // Sorts by (row, col) so the result does not depend on input order.
    static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                      std::vector<Triplet> triplets,
                                      DuplicatePolicy policy = DuplicatePolicy::Sum);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return n_rows_; }
    std::size_t cols() const noexcept { return n_cols_; }
    std::size_t nnz() const noexcept { return col_indices_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::uint32_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const std::uint32_t> row_cols(std::size_t r) const noexcept {
        return {col_indices_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }
    std::span<const double> row_values(std::size_t r) const noexcept {
        return {values_.data() + row_offsets_[r], row_offsets_[r + 1] - row_offsets_[r]};
    }

    // Stored value at (r, c), or 0 when the entry is structurally absent.
    double at(std::size_t r, std::size_t c) const;

    bool is_square() const noexcept { return n_rows_ == n_cols_; }
    // Exact structural and value symmetry.
    bool is_symmetric() const;

    Matrix to_dense() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::uint32_t> col_indices_;
    std::vector<double> values_;
};

// Number of stored nonzeros per row.
std::vector<std::uint32_t> degrees(const SparseMatrix& a);

// D^{-1/2} A D^{-1/2} with D the row-sum degree; zero-degree rows stay zero.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

// I + S.
SparseMatrix add_self_loops(const SparseMatrix& s);

// S * X. Each output row sums over its stored entries in ascending column
// order, so results are reproducible bit-for-bit.
Matrix spmm(const SparseMatrix& s, const Matrix& x);

}  // namespace drcov
