#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace newsfdi::linalg {

// Column-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_columns(const std::vector<std::vector<double>>& columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
    std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

    // New matrix holding the selected columns, in the given order.
    Matrix select_columns(std::span<const std::size_t> which) const;

    // [this | other]; row counts must match.
    Matrix hconcat(const Matrix& other) const;

    std::vector<double> multiply(std::span<const double> v) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Householder QR with scale-invariant column pivoting: at each step the
// column with the largest remaining norm relative to its original norm is
// taken next. A column whose relative remaining norm falls to `tolerance`
// or below is numerically dependent on the columns before it.
class PivotedQr {
public:
    explicit PivotedQr(Matrix a, double tolerance = 1e-9);

    std::size_t rank() const { return rank_; }
    bool full_rank() const { return rank_ == cols_; }

    // Original indices of the columns found dependent on the others.
    std::vector<std::size_t> dependent_columns() const;

    // Least-squares solution in original column order. Requires full rank.
    std::vector<double> solve(std::span<const double> y) const;

    // (A'A)^{-1} in original column order, via R^{-1}. Requires full rank.
    Matrix gram_inverse() const;

private:
    void apply_qt(std::span<double> y) const;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t rank_ = 0;
    Matrix r_;                                  // upper triangle holds R (pivoted order)
    std::vector<std::vector<double>> reflectors_;  // v_k, acting on rows k..m-1
    std::vector<double> betas_;
    std::vector<std::size_t> perm_;             // perm_[k] = original column at position k
};

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column i pairs with values[i]
};

// Cyclic Jacobi rotations; intended for small matrices.
SymmetricEigen symmetric_eigen(const Matrix& a, double tolerance = 1e-15, int max_sweeps = 100);

}  // namespace newsfdi::linalg
