#include "newsfdi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "newsfdi/error.hpp"
#include "newsfdi/kernels.hpp"

namespace newsfdi::linalg {

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
    if (columns.empty()) return {};
    Matrix m(columns.front().size(), columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != m.rows()) throw Error(ErrorKind::internal, "from_columns: ragged columns");
        std::copy(columns[c].begin(), columns[c].end(), m.col(c).begin());
    }
    return m;
}

Matrix Matrix::select_columns(std::span<const std::size_t> which) const {
    Matrix m(rows_, which.size());
    for (std::size_t i = 0; i < which.size(); ++i) {
        auto src = col(which[i]);
        std::copy(src.begin(), src.end(), m.col(i).begin());
    }
    return m;
}

Matrix Matrix::hconcat(const Matrix& other) const {
    if (cols_ == 0) return other;
    if (other.cols_ == 0) return *this;
    if (rows_ != other.rows_) throw Error(ErrorKind::internal, "hconcat: row mismatch");
    Matrix m(rows_, cols_ + other.cols_);
    std::copy(data_.begin(), data_.end(), m.data_.begin());
    std::copy(other.data_.begin(), other.data_.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
    return m;
}

std::vector<double> Matrix::multiply(std::span<const double> v) const {
    if (v.size() != cols_) throw Error(ErrorKind::internal, "multiply: size mismatch");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t c = 0; c < cols_; ++c) kernels::axpy(v[c], col(c), out);
    return out;
}

PivotedQr::PivotedQr(Matrix a, double tolerance) : rows_(a.rows()), cols_(a.cols()), r_(std::move(a)) {
    const std::size_t m = rows_;
    const std::size_t n = cols_;
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    std::vector<double> original(n);
    for (std::size_t j = 0; j < n; ++j) original[j] = kernels::dot(r_.col(j), r_.col(j));

    const std::size_t steps = std::min(m, n);
    const double tol2 = tolerance * tolerance;
    rank_ = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        std::size_t best = k;
        double best_ratio = -1.0;
        for (std::size_t j = k; j < n; ++j) {
            auto tail = r_.col(j).subspan(k);
            double ratio = original[perm_[j]] > 0.0 ? kernels::dot(tail, tail) / original[perm_[j]] : 0.0;
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = j;
            }
        }
        if (best_ratio <= tol2) break;

        if (best != k) {
            auto a_col = r_.col(k);
            auto b_col = r_.col(best);
            std::swap_ranges(a_col.begin(), a_col.end(), b_col.begin());
            std::swap(perm_[k], perm_[best]);
        }

        auto x = r_.col(k).subspan(k);
        double norm = std::sqrt(kernels::dot(x, x));
        double alpha = x[0] > 0.0 ? -norm : norm;
        std::vector<double> v(x.begin(), x.end());
        v[0] -= alpha;
        double vv = kernels::dot(v, v);
        double beta = vv > 0.0 ? 2.0 / vv : 0.0;

        for (std::size_t j = k + 1; j < n; ++j) {
            auto target = r_.col(j).subspan(k);
            double s = kernels::dot(v, target);
            kernels::axpy(-beta * s, v, target);
        }
        x[0] = alpha;
        std::fill(x.begin() + 1, x.end(), 0.0);

        reflectors_.push_back(std::move(v));
        betas_.push_back(beta);
        ++rank_;
    }
}

std::vector<std::size_t> PivotedQr::dependent_columns() const {
    std::vector<std::size_t> out(perm_.begin() + static_cast<std::ptrdiff_t>(rank_), perm_.end());
    std::sort(out.begin(), out.end());
    return out;
}

void PivotedQr::apply_qt(std::span<double> y) const {
    for (std::size_t k = 0; k < reflectors_.size(); ++k) {
        auto tail = y.subspan(k);
        double s = kernels::dot(reflectors_[k], tail);
        kernels::axpy(-betas_[k] * s, reflectors_[k], tail);
    }
}

std::vector<double> PivotedQr::solve(std::span<const double> y) const {
    if (y.size() != rows_) throw Error(ErrorKind::internal, "PivotedQr::solve: size mismatch");
    if (!full_rank()) throw Error(ErrorKind::internal, "PivotedQr::solve: rank deficient");
    std::vector<double> qty(y.begin(), y.end());
    apply_qt(qty);

    const std::size_t n = cols_;
    std::vector<double> z(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = qty[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= r_(i, j) * z[j];
        z[i] = s / r_(i, i);
    }
    std::vector<double> beta(n);
    for (std::size_t k = 0; k < n; ++k) beta[perm_[k]] = z[k];
    return beta;
}

Matrix PivotedQr::gram_inverse() const {
    if (!full_rank()) throw Error(ErrorKind::internal, "PivotedQr::gram_inverse: rank deficient");
    const std::size_t n = cols_;
    // Rinv is upper triangular; column j solves R x = e_j.
    Matrix rinv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = j + 1; i-- > 0;) {
            double s = i == j ? 1.0 : 0.0;
            for (std::size_t l = i + 1; l <= j; ++l) s -= r_(i, l) * rinv(l, j);
            rinv(i, j) = s / r_(i, i);
        }
    }
    // (R'R)^{-1} = Rinv Rinv'; row i of Rinv is nonzero from column i on.
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = j; l < n; ++l) s += rinv(i, l) * rinv(j, l);
            out(perm_[i], perm_[j]) = s;
            out(perm_[j], perm_[i]) = s;
        }
    }
    return out;
}

SymmetricEigen symmetric_eigen(const Matrix& input, double tolerance, int max_sweeps) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw Error(ErrorKind::internal, "symmetric_eigen: matrix not square");
    Matrix a = input;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= tolerance * std::max(scale, 1e-300)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p);
                    double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k);
                    double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p);
                    double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]);
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
    }
    return out;
}

}  // namespace newsfdi::linalg
