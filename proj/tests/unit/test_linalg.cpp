#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "newsfdi/kernels.hpp"
#include "newsfdi/linalg.hpp"

using newsfdi::linalg::Matrix;
using newsfdi::linalg::PivotedQr;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::normal_distribution<double> g;
    Matrix a(m, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) a(i, j) = g(rng);
    return a;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
    Eigen::MatrixXd e(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
    return e;
}

}  // namespace

TEST_CASE("least squares matches the Eigen normal-equation solution") {
    std::mt19937_64 rng(11);
    for (auto isa : newsfdi::kernels::available_isas()) {
        newsfdi::kernels::set_active(isa);
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t m = 30 + rep, n = 1 + rep % 7;
            auto a = random_matrix(rng, m, n);
            Eigen::VectorXd y = Eigen::VectorXd::Random(static_cast<Eigen::Index>(m));
            std::vector<double> yv(y.data(), y.data() + m);

            PivotedQr qr(a);
            REQUIRE(qr.full_rank());
            auto beta = qr.solve(yv);
            Eigen::MatrixXd ea = to_eigen(a);
            Eigen::VectorXd expect = (ea.transpose() * ea).ldlt().solve(ea.transpose() * y);
            for (std::size_t j = 0; j < n; ++j) CHECK(beta[j] == doctest::Approx(expect(j)).epsilon(1e-10));

            auto g = qr.gram_inverse();
            Eigen::MatrixXd ginv = (ea.transpose() * ea).inverse();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) CHECK(g(i, j) == doctest::Approx(ginv(i, j)).epsilon(1e-10));
        }
    }
    newsfdi::kernels::set_active(newsfdi::kernels::available_isas().back());
}

TEST_CASE("rank deficiency names the dependent column") {
    std::mt19937_64 rng(3);
    auto a = random_matrix(rng, 20, 4);
    // Column 2 = column 0 + 2 * column 1.
    for (std::size_t i = 0; i < 20; ++i) a(i, 2) = a(i, 0) + 2.0 * a(i, 1);
    PivotedQr qr(a);
    CHECK(qr.rank() == 3);
    auto dep = qr.dependent_columns();
    REQUIRE(dep.size() == 1);
    CHECK((dep[0] == 0 || dep[0] == 1 || dep[0] == 2));
    CHECK_THROWS(qr.solve(std::vector<double>(20, 1.0)));

    Matrix zero_col(5, 2);
    for (std::size_t i = 0; i < 5; ++i) zero_col(i, 0) = 1.0 + i;
    PivotedQr qz(zero_col);
    CHECK(qz.rank() == 1);
    CHECK(qz.dependent_columns() == std::vector<std::size_t>{1});
}

TEST_CASE("pivoting is scale invariant") {
    std::mt19937_64 rng(5);
    auto a = random_matrix(rng, 40, 3);
    for (std::size_t i = 0; i < 40; ++i) a(i, 0) *= 1e-7;  // tiny but independent
    PivotedQr qr(a);
    CHECK(qr.full_rank());
}

TEST_CASE("symmetric eigen matches Eigen") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        auto b = random_matrix(rng, 6, 4);
        Matrix s(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) {
                double v = 0;
                for (std::size_t k = 0; k < 6; ++k) v += b(k, i) * b(k, j);
                s(i, j) = v;
            }
        auto eig = newsfdi::linalg::symmetric_eigen(s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(s));
        for (std::size_t i = 0; i < 4; ++i) CHECK(eig.values[i] == doctest::Approx(es.eigenvalues()(3 - i)).epsilon(1e-11));
        for (std::size_t i = 0; i < 4; ++i) {
            // A v = lambda v and |v| = 1
            double norm = 0;
            for (std::size_t r = 0; r < 4; ++r) {
                double av = 0;
                for (std::size_t c = 0; c < 4; ++c) av += s(r, c) * eig.vectors(c, i);
                CHECK(av == doctest::Approx(eig.values[i] * eig.vectors(r, i)).scale(10.0).epsilon(1e-10));
                norm += eig.vectors(r, i) * eig.vectors(r, i);
            }
            CHECK(norm == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("matrix helpers") {
    auto m = Matrix::from_columns({{1, 2}, {3, 4}, {5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m(1, 2) == 6);
    const std::size_t pick[] = {2, 0};
    auto s = m.select_columns(pick);
    CHECK(s(0, 0) == 5);
    CHECK(s(1, 1) == 2);
    auto h = m.hconcat(s);
    CHECK(h.cols() == 5);
    CHECK(h(1, 4) == 2);
    auto v = m.multiply(std::vector<double>{1, 1, 1});
    CHECK(v == std::vector<double>{9, 12});
}
