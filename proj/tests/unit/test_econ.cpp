#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "newsfdi/csv.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/econ.hpp"
#include "newsfdi/stats.hpp"

using namespace newsfdi;
using namespace newsfdi::econ;
using linalg::Matrix;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
    return out;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
    return out;
}

// Plain Gaussian elimination on the normal equations in long double.
std::vector<long double> normal_equations(const std::vector<std::vector<double>>& cols, const std::vector<double>& y) {
    const std::size_t k = cols.size(), n = y.size();
    std::vector<std::vector<long double>> a(k, std::vector<long double>(k + 1, 0.0L));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t r = 0; r < n; ++r) a[i][j] += static_cast<long double>(cols[i][r]) * cols[j][r];
        for (std::size_t r = 0; r < n; ++r) a[i][k] += static_cast<long double>(cols[i][r]) * y[r];
    }
    for (std::size_t p = 0; p < k; ++p) {
        std::size_t best = p;
        for (std::size_t i = p + 1; i < k; ++i)
            if (std::fabs(a[i][p]) > std::fabs(a[best][p])) best = i;
        std::swap(a[p], a[best]);
        for (std::size_t i = 0; i < k; ++i) {
            if (i == p) continue;
            const long double f = a[i][p] / a[p][p];
            for (std::size_t j = p; j <= k; ++j) a[i][j] -= f * a[p][j];
        }
    }
    std::vector<long double> b(k);
    for (std::size_t i = 0; i < k; ++i) b[i] = a[i][k] / a[i][i];
    return b;
}

FirmRecord firm(std::string id, std::string region, std::string sector, double fo, double years, double employees) {
    FirmRecord f;
    f.firm_id = std::move(id);
    f.country = "Morocco";
    f.region_id = std::move(region);
    f.sector = std::move(sector);
    f.survey_year = 2019;
    f.foreign_ownership = fo;
    f.years_established = years;
    f.employees = employees;
    for (auto& o : f.obstacles) o = 2;
    f.has_email_web = true;
    return f;
}

std::string firm_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    csv::write_row(out, firm_columns());
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
}

std::vector<std::string> good_row(std::string id, std::string region = "lagos") {
    std::vector<std::string> r{std::move(id), "Nigeria", std::move(region), "Manufacturing", "2014", "12", "45", "30"};
    for (std::size_t k = 0; k < kObstacleNames.size(); ++k) r.push_back(k % 2 ? "Minor obstacle" : "3");
    r.push_back("yes");
    return r;
}

// Rows with random obstacles and controls over a few countries/sectors/regions.
std::vector<DerivedFirmRow> synthetic_rows(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<DerivedFirmRow> rows(n);
    const char* countries[] = {"Kenya", "Morocco", "Nigeria"};
    const char* sectors[] = {"Manufacturing", "Retail", "Services"};
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = rows[i];
        r.firm_id = "f" + std::to_string(i);
        r.country = countries[i % 3];
        r.region_id = std::string(r.country) + "_" + std::to_string(rng() % 3);
        r.sector = sectors[rng() % 3];
        for (auto& o : r.obstacles) o = static_cast<double>(rng() % 6);
        r.age = std::log(1.0 + static_cast<double>(rng() % 40));
        const int size = static_cast<int>(rng() % 3);
        r.size_medium = size == 1;
        r.size_large = size == 2;
        r.agglomeration = static_cast<double>(rng() % 10);
        r.physical_infra = normal(rng);
        r.financial_infra = static_cast<double>(1 + rng() % 5);
        r.has_email_web = static_cast<double>(rng() % 2);
        r.sbs["justice"] = std::abs(normal(rng));
        r.foreign_ownership = std::clamp(30.0 + 4.0 * *r.obstacles[0] + 10.0 * normal(rng), 0.0, 100.0);
    }
    return rows;
}

}  // namespace

TEST_CASE("obstacle answers") {
    CHECK(encode_obstacle("No obstacle") == 1);
    CHECK(encode_obstacle("Minor obstacle") == 2);
    CHECK(encode_obstacle("Moderate obstacle") == 3);
    CHECK(encode_obstacle("Major obstacle") == 4);
    CHECK(encode_obstacle("Very severe obstacle") == 5);
    CHECK(encode_obstacle("Don't Know (Spontaneous)") == 0);
    CHECK(encode_obstacle("Does Not Apply") == 0);
    CHECK(encode_obstacle("  very SEVERE obstacle ") == 5);
    CHECK(encode_obstacle("4") == 4);
    CHECK_FALSE(encode_obstacle("6"));
    CHECK_FALSE(encode_obstacle("somewhat"));
}

TEST_CASE("firm file parsing") {
    auto bad_fo = good_row("b");
    bad_fo[7] = "120";
    auto bad_answer = good_row("c");
    bad_answer[8] = "terrible";
    auto missing_emp = good_row("d");
    missing_emp[6] = "NA";
    const std::set<std::string> regions{"lagos"};
    auto r = parse_firms(firm_csv({good_row("a"), bad_fo, bad_answer, good_row("a"), missing_emp,
                                   good_row("e", "atlantis")}),
                         &regions);
    REQUIRE(r.firms.size() == 2);
    CHECK(r.firms[0].obstacles[0] == 3);
    CHECK(r.firms[0].obstacles[1] == 2);
    CHECK(r.firms[0].has_email_web == true);
    CHECK(r.firms[0].line == 2);
    CHECK_FALSE(r.firms[1].employees);
    REQUIRE(r.rejections.size() == 4);
    CHECK(r.rejections[0].reason == "out_of_range:foreign_ownership");
    CHECK(r.rejections[1].reason == "unrecognized_answer:corruption");
    CHECK(r.rejections[2].reason == "duplicate_id");
    CHECK(r.rejections[3].reason == "unknown_region");
    CHECK(r.rejections[3].line == 7);

    CHECK_THROWS_WITH_AS(parse_firms("firm_id,country\nx,y\n"), doctest::Contains("header"), DataError);
}

TEST_CASE("derived controls") {
    std::vector<FirmRecord> fs{firm("1", "r1", "s", 10, 16, 5), firm("2", "r1", "s", 0, 3, 20),
                               firm("3", "r1", "s", 55, 8, 99), firm("4", "r1", "s", 0, 2, 100),
                               firm("5", "r1", "s", 100, 1, 400), firm("6", "r2", "s", 0, 0, 10),
                               firm("7", "r1", "t", 20, 5, 10)};
    for (std::size_t i = 0; i < fs.size(); ++i) {
        fs[i].obstacles[*obstacle_index("telecom")] = static_cast<int>(i % 4);
        fs[i].obstacles[*obstacle_index("transport")] = static_cast<int>((i * 3) % 5);
        fs[i].obstacles[*obstacle_index("access_to_finance")] = static_cast<int>(1 + i % 5);
        fs[i].has_email_web = i % 2 == 0;
    }
    auto d = derive_controls(fs);
    REQUIRE(d.rows.size() == 6);
    REQUIRE(d.rejections.size() == 1);
    CHECK(d.rejections[0].firm_id == "6");
    CHECK(d.rejections[0].reason == "nonpositive:years_established");

    CHECK(*d.rows[0].age == doctest::Approx(2.772588722239781).epsilon(1e-15));
    CHECK(*d.rows[4].age == 0.0);
    CHECK(d.rows[0].size_medium == 0.0);
    CHECK(d.rows[0].size_large == 0.0);
    CHECK(d.rows[1].size_medium == 1.0);
    CHECK(d.rows[2].size_medium == 1.0);
    CHECK(d.rows[3].size_large == 1.0);
    CHECK(d.rows[3].size_medium == 0.0);
    // (r1, s) holds 3 foreign and 2 domestic firms.
    for (int i = 0; i < 5; ++i) CHECK(d.rows[i].agglomeration == 3.0);
    CHECK(d.rows[5].agglomeration == 1.0);
    CHECK(d.rows[2].financial_infra == 3.0);
    REQUIRE(d.pca);
    for (const auto& r : d.rows) CHECK(r.physical_infra.has_value());
}

TEST_CASE("principal component") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    {
        std::vector<double> a(40), b(40), c(40);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = normal(rng);
            b[i] = 2.0 * a[i] + 1.0;
            c[i] = normal(rng);
        }
        // Decorrelate c from a exactly so the correlation matrix is block-diagonal.
        const double ma = std::accumulate(a.begin(), a.end(), 0.0) / 40, mc = std::accumulate(c.begin(), c.end(), 0.0) / 40;
        double sac = 0, saa = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sac += (a[i] - ma) * (c[i] - mc);
            saa += (a[i] - ma) * (a[i] - ma);
        }
        for (std::size_t i = 0; i < a.size(); ++i) c[i] -= sac / saa * (a[i] - ma);
        auto p = pca_first_component(a, b, c);
        CHECK(p.loadings[0] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
        CHECK(p.loadings[1] == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-9));
        CHECK(std::abs(p.loadings[2]) < 1e-9);
        CHECK(p.eigenvalue == doctest::Approx(2.0).epsilon(1e-9));
    }
    {
        // Orthogonal +-1 columns: identity correlation matrix.
        std::vector<double> a{1, 1, -1, -1}, b{1, -1, 1, -1}, c{1, -1, -1, 1};
        auto p = pca_first_component(a, b, c);
        CHECK(p.loadings[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(p.loadings[1]) < 1e-12);
        CHECK(std::abs(p.loadings[2]) < 1e-12);
    }
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> a(50), b(50), c(50);
        for (std::size_t i = 0; i < 50; ++i) {
            const double f = normal(rng);
            a[i] = f + 0.5 * normal(rng);
            b[i] = 0.8 * f + normal(rng);
            c[i] = normal(rng) - 0.3 * f;
        }
        auto p = pca_first_component(a, b, c);
        // Oracle: power iteration on the correlation matrix.
        std::array<std::vector<double>*, 3> cols{&a, &b, &c};
        std::array<std::vector<double>, 3> z;
        for (int j = 0; j < 3; ++j) {
            const auto s = stats::summarize("", *cols[j]);
            const double pop = s.sd * std::sqrt(49.0 / 50.0);
            for (double x : *cols[j]) z[j].push_back((x - s.mean) / pop);
        }
        double corr[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                corr[i][j] = 0;
                for (std::size_t r = 0; r < 50; ++r) corr[i][j] += z[i][r] * z[j][r] / 50.0;
            }
        std::array<double, 3> v{1, 1, 1};
        for (int it = 0; it < 5000; ++it) {
            std::array<double, 3> w{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) w[i] += corr[i][j] * v[j];
            const double nn = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
            for (int i = 0; i < 3; ++i) v[i] = w[i] / nn;
        }
        if (v[1] < 0)
            for (auto& x : v) x = -x;
        for (int i = 0; i < 3; ++i) CHECK(p.loadings[i] == doctest::Approx(v[i]).epsilon(1e-8));
        double norm = 0;
        for (double l : p.loadings) norm += l * l;
        CHECK(std::abs(norm - 1.0) < 1e-12);
        CHECK(p.loadings[1] >= 0.0);
        CHECK(std::abs(std::accumulate(p.scores.begin(), p.scores.end(), 0.0) / 50.0) < 1e-12);
    }
    std::vector<double> k{1, 1, 1, 1}, v{1, 2, 3, 4};
    CHECK_THROWS_WITH_AS(pca_first_component(v, k, v), doctest::Contains("transport"), DataError);
    std::vector<double> two{1, 2};
    CHECK_THROWS_AS(pca_first_component(two, two, two), DataError);
}

TEST_CASE("cell-mean instruments") {
    const std::vector<std::string> cells2{"c", "c"};
    auto lo = cell_mean_instrument(std::vector<double>{2, 4}, cells2, InstrumentVariant::leave_out);
    CHECK(lo.values == std::vector<double>{4, 2});
    CHECK(lo.warnings == 0);
    auto cm = cell_mean_instrument(std::vector<double>{2, 4}, cells2, InstrumentVariant::cell_mean);
    CHECK(cm.values == std::vector<double>{3, 3});

    const std::vector<std::string> cells3{"c", "c", "c"};
    CHECK(cell_mean_instrument(std::vector<double>{3, 3, 3}, cells3, InstrumentVariant::leave_out).values ==
          std::vector<double>{3, 3, 3});

    const std::vector<std::string> mixed{"a", "b", "a", "a"};
    auto single = cell_mean_instrument(std::vector<double>{1, 7, 2, 3}, mixed, InstrumentVariant::leave_out);
    CHECK(single.values == std::vector<double>{2.5, 7, 2, 1.5});
    CHECK(single.flagged == std::vector<bool>{false, true, false, false});
    CHECK(single.warnings == 1);

    // Interaction instrument: leave-out mean x SBS.
    std::vector<DerivedFirmRow> rows;
    for (double c : {9.0, 2.0, 3.0}) {
        DerivedFirmRow r;
        r.country = "K";
        r.region_id = "r";
        r.sector = "s";
        r.foreign_ownership = c;
        for (auto& o : r.obstacles) o = c;
        r.sbs["justice"] = 0.4;
        rows.push_back(r);
    }
    RegressionSpec spec;
    spec.obstacles = {"corruption"};
    spec.sbs_theme = "justice";
    spec.interact = "corruption";
    spec.controls = {};
    auto d = build_design(rows, spec);
    CHECK(d.names == std::vector<std::string>{"corruption", "sbs_justice", "sbs_justice*corruption", "Constant"});
    CHECK(d.endogenous == std::vector<std::size_t>{0, 2});
    CHECK(d.z_excluded(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.z_excluded(0, 0) == 2.5);
}

TEST_CASE("least squares against independent oracles") {
    {
        const std::vector<double> x{1, 2, 3, 4, 5}, y{3, 3, 3, 3, 3};
        auto r = ols(Matrix::from_columns({x, std::vector<double>(5, 1.0)}), y, {"x", "Constant"});
        CHECK(std::abs(r.coef[0]) < 1e-12);
        CHECK(r.coef[1] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(std::abs(r.se[0]) < 1e-12);
        CHECK(std::abs(r.se[1]) < 1e-12);
    }
    {
        const std::vector<double> x1{1, 2, 3, 4, 5, 6}, x2{2, 1, 4, 3, 6, 5}, one(6, 1.0);
        const std::vector<double> y{1.5, 2.1, 3.9, 4.2, 6.3, 5.8};
        auto r = ols(Matrix::from_columns({x1, x2, one}), y, {"x1", "x2", "Constant"});
        auto b = normal_equations({x1, x2, one}, y);
        for (int j = 0; j < 3; ++j) CHECK(r.coef[j] == doctest::Approx(static_cast<double>(b[j])).epsilon(1e-12));
        CHECK(r.n_obs == 6);
        CHECK(r.df_resid == 3);
        CHECK(r.estimator == "OLS");
    }
}

TEST_CASE("HC1 matches the textbook sandwich") {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 50;
    std::vector<double> x1(n), x2(n), one(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = normal(rng);
        x2[i] = normal(rng) + 0.5 * x1[i];
        y[i] = 1.0 + 2.0 * x1[i] - x2[i] + (1.0 + std::abs(x1[i])) * normal(rng);
    }
    const Matrix x = Matrix::from_columns({x1, x2, one});
    auto r = ols(x, y, {"x1", "x2", "Constant"});

    const Eigen::MatrixXd X = to_eigen(x);
    const Eigen::VectorXd Y = to_eigen(y);
    const Eigen::MatrixXd inv = (X.transpose() * X).inverse();
    const Eigen::VectorXd b = inv * X.transpose() * Y;
    const Eigen::VectorXd e = Y - X * b;
    const Eigen::MatrixXd meat = X.transpose() * e.array().square().matrix().asDiagonal() * X;
    const Eigen::MatrixXd v = inv * meat * inv * (static_cast<double>(n) / static_cast<double>(n - 3));
    for (int j = 0; j < 3; ++j) {
        CHECK(r.coef[j] == doctest::Approx(b(j)).epsilon(1e-10));
        CHECK(r.se[j] == doctest::Approx(std::sqrt(v(j, j))).epsilon(1e-10));
        CHECK(r.t[j] == doctest::Approx(b(j) / std::sqrt(v(j, j))).epsilon(1e-10));
    }
    CHECK(r.p[0] < 0.01);
    CHECK(stats::stars(r.p[0]) == "***");
}

TEST_CASE("HC1 approaches classical standard errors under homoskedasticity") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 20000;
    std::vector<double> x1(n), one(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = normal(rng);
        y[i] = 0.5 + x1[i] + normal(rng);
    }
    const Matrix x = Matrix::from_columns({x1, one});
    auto r = ols(x, y, {"x1", "Constant"});
    const Eigen::MatrixXd X = to_eigen(x);
    double rss = 0;
    for (double e : r.residuals) rss += e * e;
    const Eigen::MatrixXd classical = (X.transpose() * X).inverse() * (rss / static_cast<double>(n - 2));
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(n - 2));
    for (int j = 0; j < 2; ++j) {
        const double ratio = r.se[j] / std::sqrt(classical(j, j));
        CHECK(ratio == doctest::Approx(scale).epsilon(0.03));
    }
}

TEST_CASE("2SLS collapses to OLS when regressors instrument themselves") {
    std::mt19937_64 rng(34);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 80;
    std::vector<double> x1(n), x2(n), one(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x1[i] = normal(rng);
        x2[i] = normal(rng);
        y[i] = 1 + x1[i] - 2 * x2[i] + normal(rng);
    }
    const Matrix x = Matrix::from_columns({x1, x2, one});
    const std::vector<std::string> names{"x1", "x2", "Constant"};
    const std::size_t endo[] = {0};
    auto a = ols(x, y, names);
    auto b = tsls(x, y, endo, Matrix::from_columns({x1}), names);
    for (int j = 0; j < 3; ++j) {
        CHECK(b.coef[j] == doctest::Approx(a.coef[j]).epsilon(1e-8));
        CHECK(b.se[j] == doctest::Approx(a.se[j]).epsilon(1e-8));
    }
    CHECK(b.estimator == "2SLS");
    REQUIRE(b.first_stage.size() == 1);
    CHECK(b.first_stage[0].f_stat > 1e12);

    std::vector<double> z(n);
    for (auto& v : z) v = normal(rng);
    auto zero = tsls(x, std::vector<double>(n, 0.0), endo, Matrix::from_columns({z}), names);
    for (int j = 0; j < 3; ++j) {
        CHECK(zero.coef[j] == 0.0);
        CHECK(zero.se[j] == 0.0);
    }
}

TEST_CASE("2SLS matches the projection formula") {
    std::mt19937_64 rng(35);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 300;
    std::vector<double> z1(n), z2(n), w(n), x(n), one(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        z1[i] = normal(rng);
        z2[i] = normal(rng);
        w[i] = normal(rng);
        const double u = normal(rng);
        x[i] = z1[i] + 0.5 * z2[i] + 0.3 * w[i] + u;
        y[i] = 2 + 1.5 * x[i] - w[i] + u + normal(rng);
    }
    const Matrix xm = Matrix::from_columns({x, w, one});
    const std::size_t endo[] = {0};
    auto r = tsls(xm, y, endo, Matrix::from_columns({z1, z2}), {"x", "w", "Constant"});

    const Eigen::MatrixXd X = to_eigen(xm);
    Eigen::MatrixXd W(n, 4);
    W << to_eigen(z1), to_eigen(z2), to_eigen(w), to_eigen(one);
    const Eigen::VectorXd Y = to_eigen(y);
    const Eigen::MatrixXd P = W * (W.transpose() * W).inverse() * W.transpose();
    const Eigen::MatrixXd Xh = P * X;
    const Eigen::MatrixXd inv = (Xh.transpose() * Xh).inverse();
    const Eigen::VectorXd b = inv * Xh.transpose() * Y;
    const Eigen::VectorXd e = Y - X * b;
    const Eigen::MatrixXd meat = Xh.transpose() * e.array().square().matrix().asDiagonal() * Xh;
    const Eigen::MatrixXd v = inv * meat * inv * (static_cast<double>(n) / static_cast<double>(n - 3));
    for (int j = 0; j < 3; ++j) {
        CHECK(r.coef[j] == doctest::Approx(b(j)).epsilon(1e-9));
        CHECK(r.se[j] == doctest::Approx(std::sqrt(v(j, j))).epsilon(1e-9));
        CHECK(r.residuals[0] == doctest::Approx(e(0)).epsilon(1e-9));
    }
    // First stage F on the two excluded instruments.
    auto rss = [&](const Eigen::MatrixXd& m) {
        const Eigen::VectorXd xe = to_eigen(x);
        const Eigen::VectorXd fit = m * (m.transpose() * m).ldlt().solve(m.transpose() * xe);
        return (xe - fit).squaredNorm();
    };
    Eigen::MatrixXd restricted(n, 2);
    restricted << to_eigen(w), to_eigen(one);
    const double f = ((rss(restricted) - rss(W)) / 2.0) / (rss(W) / static_cast<double>(n - 4));
    REQUIRE(r.first_stage.size() == 1);
    CHECK(r.first_stage[0].f_stat == doctest::Approx(f).epsilon(1e-9));
    CHECK(r.first_stage[0].df_num == 2);
    CHECK(r.first_stage[0].df_den == n - 4);
}

TEST_CASE("dummy fixed effects equal within-demeaned slopes") {
    std::mt19937_64 rng(36);
    auto rows = synthetic_rows(rng, 120);
    RegressionSpec spec;
    spec.obstacles = {"corruption"};
    spec.controls = {};
    spec.sector_fe = false;
    auto r = fit_ols_fe(rows, spec);

    std::map<std::string, std::pair<double, double>> sums;
    std::map<std::string, int> counts;
    for (const auto& row : rows) {
        sums[row.country].first += *row.obstacles[0];
        sums[row.country].second += *row.foreign_ownership;
        ++counts[row.country];
    }
    double sxy = 0, sxx = 0;
    for (const auto& row : rows) {
        const double xd = *row.obstacles[0] - sums[row.country].first / counts[row.country];
        const double yd = *row.foreign_ownership - sums[row.country].second / counts[row.country];
        sxy += xd * yd;
        sxx += xd * xd;
    }
    CHECK(r.coef[*r.index_of("corruption")] == doctest::Approx(sxy / sxx).epsilon(1e-8));
    CHECK(r.names == std::vector<std::string>{"corruption", "country=Morocco", "country=Nigeria", "Constant"});
}

TEST_CASE("rank deficiency names the columns") {
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10}, one(5, 1.0), y{1, 3, 2, 5, 4};
    CHECK_THROWS_WITH_AS(ols(Matrix::from_columns({a, b, one}), y, {"a", "b", "Constant"}),
                         doctest::Contains("collinear columns: b"), DataError);
    CHECK_THROWS_AS(ols(Matrix::from_columns({a, one}), std::vector<double>{1, 2}, {"a", "Constant"}), Error);
    const std::vector<double> tiny{1, 2};
    CHECK_THROWS_AS(ols(Matrix::from_columns({tiny, {1, 1}}), tiny, {"a", "Constant"}), DataError);
}

TEST_CASE("spec validation") {
    RegressionSpec ok;
    ok.obstacles = {"corruption", "crime_disorder"};
    CHECK_NOTHROW(validate_spec(ok));
    auto bad = ok;
    bad.sbs_theme = "justice";
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
    bad.interact = "labor_regulation";
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
    bad.interact = "corruption";
    CHECK_NOTHROW(validate_spec(bad));
    CHECK(interaction_name(bad) == "sbs_justice*corruption");
    bad.sbs_theme = "weather";
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
    bad = ok;
    bad.obstacles.push_back("corruption");
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
    bad = ok;
    bad.controls.push_back("height");
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
    bad = ok;
    bad.obstacles = {};
    CHECK_THROWS_AS(validate_spec(bad), ConfigError);
}

TEST_CASE("Welch t-test") {
    const std::vector<double> a{1, 2, 3}, b{2, 4, 6};
    auto t = welch_ttest(a, b);
    CHECK(t.t == doctest::Approx(-2.0 / std::sqrt(1.0 / 3.0 + 4.0 / 3.0)).epsilon(1e-14));
    CHECK(t.t == doctest::Approx(-1.549).epsilon(1e-3));
    // Welch-Satterthwaite: (5/3)^2 / ((1/3)^2/2 + (4/3)^2/2)
    CHECK(t.df == doctest::Approx((25.0 / 9.0) / ((1.0 / 9.0 + 16.0 / 9.0) / 2.0)).epsilon(1e-14));
    auto swapped = welch_ttest(b, a);
    CHECK(swapped.t == -t.t);
    CHECK(swapped.p == t.p);
    auto same = welch_ttest(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);
    CHECK_THROWS_AS(welch_ttest(std::vector<double>{1}, b), DataError);
    CHECK(stats::stars(0.003) == "***");
    CHECK(stats::stars(0.03) == "**");
    CHECK(stats::stars(0.07) == "*");
    CHECK(stats::stars(0.2) == "");
}

TEST_CASE("table numbers and rendering") {
    CHECK(format_table_number(33.1512) == "33.15");
    CHECK(format_table_number(0.38249) == "0.382");
    CHECK(format_table_number(-1.6771) == "-1.677");
    CHECK(format_table_number(1234.56) == "1235");
    CHECK(format_coef(2.816, 0.07) == "2.816*");
    CHECK(regressor_label("sbs_justice*business_license") == "SBS justice*Bus. License");

    std::mt19937_64 rng(37);
    auto rows = synthetic_rows(rng, 200);
    RegressionSpec m1;
    m1.name = "(1)";
    m1.obstacles = {"corruption", "crime_disorder"};
    m1.controls = {"age", "size_medium"};
    auto m2 = m1;
    m2.name = "(2)";
    m2.sbs_theme = "justice";
    m2.interact = "corruption";
    const std::vector<RegressionResult> results{fit_2sls(rows, m1), fit_2sls(rows, m2)};
    auto rendered = render_regression_table(results, "Table 2");
    CHECK(rendered.text.find("Dependent Variable: Percentage of Foreign Ownership") != std::string::npos);
    CHECK(rendered.text.find("Note. Robust standard errors are in parentheses. *** p<0.01, ** p<0.05, * p<0.1.") !=
          std::string::npos);
    CHECK(rendered.text.find("country=") == std::string::npos);

    auto table = csv::parse(rendered.csv);
    CHECK(table.header == std::vector<std::string>{"variable", "(1)", "(2)"});
    std::vector<std::string> labels;
    for (const auto& r : table.rows) labels.push_back(r[0]);
    CHECK(labels == std::vector<std::string>{"Corruption", "Crime", "SBS justice", "SBS justice*Corruption", "Age",
                                             "Size (20-99 employees)", "Observations", "Country FE", "Industry FE"});
    CHECK(table.rows[2][1].empty());
    CHECK(table.rows[6][1] == "200");
    CHECK(table.rows[7][2] == "YES");
    const auto j = *results[1].index_of("corruption");
    CHECK(table.rows[0][2] == format_coef(results[1].coef[j], results[1].p[j]) + " (" +
                                  format_table_number(results[1].se[j]) + ")");

    auto other = m1;
    other.dependent = "age";
    other.controls = {"size_medium"};
    const std::vector<RegressionResult> mixed{results[0], fit_2sls(rows, other)};
    CHECK_THROWS_AS(render_regression_table(mixed), DataError);
}

TEST_CASE("describe equals a hand aggregation") {
    std::vector<DerivedFirmRow> rows(4);
    const double fo[] = {0, 50, 100, 10};
    const char* country[] = {"Nigeria", "Morocco", "Morocco", "Nigeria"};
    const char* region[] = {"lagos", "fes_meknes", "casablanca_settat", "lagos"};
    for (int i = 0; i < 4; ++i) {
        rows[i].country = country[i];
        rows[i].region_id = region[i];
        rows[i].foreign_ownership = fo[i];
        rows[i].obstacles[0] = i + 1;
        rows[i].sbs["land"] = 0.5 * i;
    }
    rows[3].obstacles[0].reset();
    const std::vector<std::string> themes{"land"};
    auto d = describe(rows, themes, {{"lagos", "Lagos"}});
    CHECK(d.variables[0].variable == "Foreign ownership");
    CHECK(d.variables[0].n == 4);
    CHECK(d.variables[0].mean == 40.0);
    CHECK(d.variables[0].min == 0.0);
    CHECK(d.variables[0].max == 100.0);
    CHECK(d.variables[0].sd == doctest::Approx(std::sqrt((1600.0 + 100 + 3600 + 900) / 3.0)).epsilon(1e-14));
    CHECK(d.variables[1].variable == "Corruption");
    CHECK(d.variables[1].n == 3);
    CHECK(d.variables[1].mean == 2.0);
    CHECK(d.variables.back().variable == "SBS land");
    CHECK(d.variables.back().max == 1.5);
    REQUIRE(d.countries.size() == 2);
    CHECK(d.countries[0].country == "Morocco");
    CHECK(d.countries[0].firms == 2);
    CHECK(d.countries[0].mean_foreign_ownership == 75.0);
    CHECK(d.countries[1].mean_foreign_ownership == 5.0);
    REQUIRE(d.regions.size() == 3);
    CHECK(d.regions[0].region_id == "casablanca_settat");
    CHECK(d.regions[0].region_name == "casablanca_settat");
    CHECK(d.regions[2].region_name == "Lagos");
    CHECK(d.regions[2].firms == 2);
}

TEST_CASE("joined SBS values equal the score file") {
    std::vector<DerivedFirmRow> rows(3);
    rows[0].region_id = "a";
    rows[1].region_id = "b";
    rows[2].region_id = "zz";
    std::vector<sbs::SbsScore> scores(3);
    scores[0].region_id = "a";
    scores[0].theme_id = "land";
    scores[0].sbs_shifted = 0.1 + 0.2;
    scores[1].region_id = "b";
    scores[1].theme_id = "land";
    scores[1].sbs_shifted = 1.25;
    scores[2].region_id = "a";
    scores[2].theme_id = "trade";
    scores[2].sbs_shifted = 7.0;
    join_sbs(rows, scores);
    CHECK(rows[0].sbs.at("land") == scores[0].sbs_shifted);
    CHECK(rows[0].sbs.at("trade") == 7.0);
    CHECK(rows[1].sbs.at("land") == 1.25);
    CHECK(rows[2].sbs.empty());
    CHECK_FALSE(variable_value(rows[2], "sbs_land"));
    CHECK(variable_value(rows[0], "sbs_land") == scores[0].sbs_shifted);

    scores.push_back(scores[0]);
    scores.back().slice.start = std::chrono::year{2015} / 1 / 1;
    CHECK_THROWS_AS(join_sbs(rows, scores), DataError);
}

TEST_CASE("Monte Carlo: 2SLS recovers the slope that OLS misses") {
    const auto draws = iv_monte_carlo(200, 500, 1000, 2.0, 2);
    std::size_t closer = 0;
    double mean_iv = 0;
    for (const auto& d : draws) {
        closer += std::abs(d.tsls - 2.0) < std::abs(d.ols - 2.0);
        mean_iv += d.tsls / 200.0;
    }
    CHECK(closer >= 180);
    CHECK(std::abs(mean_iv - 2.0) < 0.05);
    const auto again = iv_monte_carlo(200, 500, 1000, 2.0, 1);
    for (std::size_t i = 0; i < draws.size(); ++i) CHECK(again[i].tsls == draws[i].tsls);
}
