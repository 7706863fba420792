#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "newsfdi/econ.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/kernels.hpp"
#include "newsfdi/sbs.hpp"

namespace newsfdi::econ {
namespace {

using linalg::Matrix;
using linalg::PivotedQr;

std::string join_names(std::span<const std::string> names, std::span<const std::size_t> idx) {
    std::string out;
    for (auto i : idx) out += (out.empty() ? "" : ", ") + names[i];
    return out;
}

PivotedQr factor_or_throw(const Matrix& x, std::span<const std::string> names, std::string_view what) {
    PivotedQr qr(x);
    if (!qr.full_rank()) {
        auto dep = qr.dependent_columns();
        throw DataError(std::string(what) + " is rank deficient; collinear columns: " + join_names(names, dep));
    }
    return qr;
}

std::vector<double> residuals_of(const Matrix& x, std::span<const double> y, std::span<const double> beta) {
    auto fitted = x.multiply(beta);
    std::vector<double> e(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) e[i] = y[i] - fitted[i];
    return e;
}

// Sandwich covariance bread * meat * bread with `xs` as score regressors.
Matrix robust_cov(const Matrix& bread, const Matrix& xs, std::span<const double> e, SeType type,
                  std::span<const std::string> clusters) {
    const std::size_t n = xs.rows();
    const std::size_t k = xs.cols();
    Matrix meat(k, k);
    double scale = 1.0;
    if (type == SeType::hc1) {
        std::vector<double> e2(n);
        for (std::size_t i = 0; i < n; ++i) e2[i] = e[i] * e[i];
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) meat(a, b) = meat(b, a) = kernels::weighted_dot(e2, xs.col(a), xs.col(b));
        scale = static_cast<double>(n) / static_cast<double>(n - k);
    } else {
        if (clusters.size() != n) throw Error(ErrorKind::internal, "cluster labels missing");
        std::map<std::string, std::vector<double>> scores;
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = scores[clusters[i]];
            if (s.empty()) s.assign(k, 0.0);
            for (std::size_t a = 0; a < k; ++a) s[a] += xs(i, a) * e[i];
        }
        for (const auto& [g, s] : scores)
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b) meat(a, b) += s[a] * s[b];
        const double groups = static_cast<double>(scores.size());
        if (scores.size() < 2) throw DataError("clustered standard errors need at least two clusters");
        scale = groups / (groups - 1.0) * (static_cast<double>(n) - 1.0) / static_cast<double>(n - k);
    }
    Matrix tmp(k, k), out(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += bread(a, c) * meat(c, b);
            tmp(a, b) = s;
        }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += tmp(a, c) * bread(c, b);
            out(a, b) = s * scale;
        }
    return out;
}

void fill_inference(RegressionResult& r, const Matrix& cov) {
    const std::size_t k = r.coef.size();
    r.se.resize(k);
    r.t.resize(k);
    r.p.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        r.se[j] = std::sqrt(std::max(0.0, cov(j, j)));
        if (r.se[j] > 0.0) {
            r.t[j] = r.coef[j] / r.se[j];
        } else {
            r.t[j] = r.coef[j] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.coef[j]);
        }
        r.p[j] = r.t[j] == 0.0 ? 1.0 : stats::t_two_sided_p(r.t[j], static_cast<double>(r.df_resid));
    }
}

void check_shape(const Matrix& x, std::span<const double> y, std::span<const std::string> names) {
    if (y.size() != x.rows() || names.size() != x.cols())
        throw Error(ErrorKind::internal, "regression: inconsistent design dimensions");
    if (x.rows() <= x.cols())
        throw DataError("regression needs more observations than regressors (n = " + std::to_string(x.rows()) +
                        ", k = " + std::to_string(x.cols()) + ")");
}

double rss(std::span<const double> e) { return kernels::dot(e, e); }

}  // namespace

std::optional<InstrumentVariant> parse_instrument_variant(std::string_view s) {
    if (s == "leave_out") return InstrumentVariant::leave_out;
    if (s == "cell_mean") return InstrumentVariant::cell_mean;
    return std::nullopt;
}

std::optional<SeType> parse_se_type(std::string_view s) {
    if (s == "hc1") return SeType::hc1;
    if (s == "cluster_region") return SeType::cluster_region;
    return std::nullopt;
}

std::string_view instrument_variant_name(InstrumentVariant v) {
    return v == InstrumentVariant::leave_out ? "leave_out" : "cell_mean";
}

std::string_view se_type_name(SeType s) { return s == SeType::hc1 ? "hc1" : "cluster_region"; }

std::optional<std::size_t> RegressionResult::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

RegressionResult ols(const Matrix& x, std::span<const double> y, std::vector<std::string> names, SeType se,
                     std::span<const std::string> clusters) {
    check_shape(x, y, names);
    auto qr = factor_or_throw(x, names, "design matrix");
    RegressionResult r;
    r.estimator = "OLS";
    r.names = std::move(names);
    r.coef = qr.solve(y);
    r.residuals = residuals_of(x, y, r.coef);
    r.n_obs = x.rows();
    r.df_resid = x.rows() - x.cols();
    r.se_type = se;
    fill_inference(r, robust_cov(qr.gram_inverse(), x, r.residuals, se, clusters));
    return r;
}

RegressionResult tsls(const Matrix& x, std::span<const double> y, std::span<const std::size_t> endogenous,
                      const Matrix& z_excluded, std::vector<std::string> names, SeType se,
                      std::span<const std::string> clusters, std::span<const std::string> instrument_names) {
    check_shape(x, y, names);
    if (z_excluded.cols() < endogenous.size())
        throw DataError("2SLS needs at least as many excluded instruments (" + std::to_string(z_excluded.cols()) +
                        ") as endogenous regressors (" + std::to_string(endogenous.size()) + ")");
    if (z_excluded.cols() > 0 && z_excluded.rows() != x.rows())
        throw Error(ErrorKind::internal, "2SLS: instrument rows differ from design rows");

    std::vector<bool> is_endo(x.cols(), false);
    for (auto j : endogenous) {
        if (j >= x.cols() || is_endo[j]) throw Error(ErrorKind::internal, "2SLS: bad endogenous index");
        is_endo[j] = true;
    }
    std::vector<std::size_t> exog;
    for (std::size_t j = 0; j < x.cols(); ++j)
        if (!is_endo[j]) exog.push_back(j);

    const Matrix x_exog = x.select_columns(exog);
    const Matrix w = z_excluded.hconcat(x_exog);
    std::vector<std::string> w_names;
    for (std::size_t j = 0; j < z_excluded.cols(); ++j)
        w_names.push_back(j < instrument_names.size() ? instrument_names[j] : "instrument " + std::to_string(j + 1));
    for (auto j : exog) w_names.push_back(names[j]);
    auto w_qr = factor_or_throw(w, w_names, "first-stage instrument matrix");

    std::optional<PivotedQr> exog_qr;
    if (!exog.empty()) exog_qr.emplace(x_exog);

    RegressionResult r;
    r.estimator = "2SLS";
    Matrix x_hat = x;
    const std::size_t n = x.rows();
    for (auto j : endogenous) {
        auto col = x.col(j);
        auto pi = w_qr.solve(col);
        auto fitted = w.multiply(pi);
        std::copy(fitted.begin(), fitted.end(), x_hat.col(j).begin());

        FirstStage fs;
        fs.endogenous = names[j];
        const double rss_u = rss(residuals_of(w, col, pi));
        double rss_r = 0.0;
        if (exog_qr && exog_qr->full_rank()) rss_r = rss(residuals_of(x_exog, col, exog_qr->solve(col)));
        else rss_r = kernels::dot(col, col);
        fs.df_num = z_excluded.cols();
        fs.df_den = n - w.cols();
        if (rss_u > 0.0)
            fs.f_stat = ((rss_r - rss_u) / static_cast<double>(fs.df_num)) / (rss_u / static_cast<double>(fs.df_den));
        else
            fs.f_stat = std::numeric_limits<double>::infinity();
        const double mean = kernels::sum(col) / static_cast<double>(n);
        const double tss = kernels::sum_sq_dev(col, mean);
        fs.r2 = tss > 0.0 ? 1.0 - rss_u / tss : 1.0;
        r.first_stage.push_back(std::move(fs));
    }

    auto qr = factor_or_throw(x_hat, names, "second-stage design");
    r.names = std::move(names);
    r.coef = qr.solve(y);
    r.residuals = residuals_of(x, y, r.coef);
    r.n_obs = n;
    r.df_resid = n - x.cols();
    r.se_type = se;
    fill_inference(r, robust_cov(qr.gram_inverse(), x_hat, r.residuals, se, clusters));
    return r;
}

InstrumentColumn cell_mean_instrument(std::span<const double> x, std::span<const std::string> cells,
                                      InstrumentVariant variant) {
    if (x.size() != cells.size()) throw Error(ErrorKind::internal, "instrument: size mismatch");
    std::unordered_map<std::string, std::pair<double, std::size_t>> totals;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& t = totals[cells[i]];
        t.first += x[i];
        t.second += 1;
    }
    InstrumentColumn out;
    out.values.resize(x.size());
    out.flagged.assign(x.size(), false);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& [total, count] = totals[cells[i]];
        if (variant == InstrumentVariant::cell_mean) {
            out.values[i] = total / static_cast<double>(count);
        } else if (count >= 2) {
            out.values[i] = (total - x[i]) / static_cast<double>(count - 1);
        } else {
            out.values[i] = total / static_cast<double>(count);
            out.flagged[i] = true;
            ++out.warnings;
        }
    }
    return out;
}

std::string interaction_name(const RegressionSpec& spec) {
    if (!spec.interact || !spec.sbs_theme) return {};
    return "sbs_" + *spec.sbs_theme + "*" + *spec.interact;
}

void validate_spec(const RegressionSpec& spec) {
    const std::string who = spec.name.empty() ? "regression spec" : "model '" + spec.name + "'";
    if (!is_variable(spec.dependent)) throw ConfigError(who + ": unknown dependent variable " + spec.dependent);
    if (spec.obstacles.empty()) throw ConfigError(who + ": no obstacle regressors");
    std::set<std::string> seen;
    for (const auto& o : spec.obstacles) {
        if (!obstacle_index(o)) throw ConfigError(who + ": unknown obstacle " + o);
        if (!seen.insert(o).second) throw ConfigError(who + ": obstacle listed twice: " + o);
    }
    if (spec.sbs_theme.has_value() != spec.interact.has_value())
        throw ConfigError(who + ": sbs_theme and interact must be given together");
    if (spec.sbs_theme && !relevance::is_theme_id(*spec.sbs_theme))
        throw ConfigError(who + ": unknown theme " + *spec.sbs_theme);
    if (spec.interact && !seen.contains(*spec.interact))
        throw ConfigError(who + ": interacted obstacle must be among the obstacles: " + *spec.interact);
    for (const auto& c : spec.controls) {
        if (!is_variable(c) || c.starts_with("sbs_") || obstacle_index(c))
            throw ConfigError(who + ": unknown control " + c);
        if (c == spec.dependent) throw ConfigError(who + ": dependent variable used as control");
        if (!seen.insert(c).second) throw ConfigError(who + ": variable listed twice: " + c);
    }
}

Design build_design(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec) {
    validate_spec(spec);
    Design d;
    d.rows_in = rows.size();

    std::vector<std::string> needed{spec.dependent};
    for (const auto& o : spec.obstacles) needed.push_back(o);
    if (spec.sbs_theme) needed.push_back("sbs_" + *spec.sbs_theme);
    for (const auto& c : spec.controls) needed.push_back(c);

    for (const auto& v : needed) d.missing[v] = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool complete = true;
        for (const auto& v : needed) {
            if (!variable_value(rows[i], v)) {
                ++d.missing[v];
                complete = false;
            }
        }
        if (complete) d.rows_used.push_back(i);
    }
    const std::size_t n = d.rows_used.size();
    auto column = [&](const std::string& v) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = *variable_value(rows[d.rows_used[i]], v);
        return out;
    };

    std::vector<std::vector<double>> cols;
    d.y = column(spec.dependent);
    std::vector<std::string> cells(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[d.rows_used[i]];
        cells[i] = r.sector + '\x1f' + r.region_id;
        d.clusters.push_back(r.region_id);
    }

    std::vector<std::vector<double>> z_cols;
    std::vector<double> sbs_col;
    if (spec.sbs_theme) sbs_col = column("sbs_" + *spec.sbs_theme);

    for (const auto& o : spec.obstacles) {
        cols.push_back(column(o));
        d.names.push_back(o);
        d.endogenous.push_back(cols.size() - 1);
        auto iv = cell_mean_instrument(cols.back(), cells, spec.instruments);
        d.instrument_warnings += iv.warnings;
        z_cols.push_back(std::move(iv.values));
        d.instrument_names.push_back("cell mean of " + o);
    }
    if (spec.sbs_theme) {
        cols.push_back(sbs_col);
        d.names.push_back("sbs_" + *spec.sbs_theme);

        const auto k = static_cast<std::size_t>(
            std::find(spec.obstacles.begin(), spec.obstacles.end(), *spec.interact) - spec.obstacles.begin());
        std::vector<double> inter(n), inter_iv(n);
        for (std::size_t i = 0; i < n; ++i) {
            inter[i] = cols[k][i] * sbs_col[i];
            inter_iv[i] = z_cols[k][i] * sbs_col[i];
        }
        cols.push_back(std::move(inter));
        d.names.push_back(interaction_name(spec));
        d.endogenous.push_back(cols.size() - 1);
        z_cols.push_back(std::move(inter_iv));
        d.instrument_names.push_back("cell mean of " + *spec.interact + " * sbs_" + *spec.sbs_theme);
    }
    for (const auto& c : spec.controls) {
        cols.push_back(column(c));
        d.names.push_back(c);
    }

    auto add_dummies = [&](const char* prefix, auto key) {
        std::set<std::string> cats;
        for (auto i : d.rows_used) cats.insert(key(rows[i]));
        if (cats.size() < 2) return;
        for (auto it = std::next(cats.begin()); it != cats.end(); ++it) {
            std::vector<double> dummy(n);
            for (std::size_t i = 0; i < n; ++i) dummy[i] = key(rows[d.rows_used[i]]) == *it ? 1.0 : 0.0;
            cols.push_back(std::move(dummy));
            d.names.push_back(std::string(prefix) + *it);
        }
    };
    if (spec.country_fe) add_dummies("country=", [](const DerivedFirmRow& r) { return r.country; });
    if (spec.sector_fe) add_dummies("sector=", [](const DerivedFirmRow& r) { return r.sector; });

    cols.emplace_back(n, 1.0);
    d.names.push_back("Constant");

    d.x = n == 0 ? Matrix(0, cols.size()) : Matrix::from_columns(cols);
    d.z_excluded = n == 0 ? Matrix(0, z_cols.size()) : Matrix::from_columns(z_cols);
    return d;
}

namespace {

RegressionResult finish(RegressionResult r, const RegressionSpec& spec, const Design& d) {
    r.model = spec.name;
    r.table = spec.table;
    r.dependent = spec.dependent;
    r.country_fe = spec.country_fe;
    r.sector_fe = spec.sector_fe;
    r.instrument_warnings = d.instrument_warnings;
    return r;
}

std::string context(const RegressionSpec& spec) { return spec.name.empty() ? "" : spec.name + ": "; }

}  // namespace

RegressionResult fit_ols_fe(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec) {
    auto d = build_design(rows, spec);
    try {
        return finish(ols(d.x, d.y, d.names, spec.se, d.clusters), spec, d);
    } catch (const DataError& e) {
        throw DataError(context(spec) + e.what());
    }
}

RegressionResult fit_2sls(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec) {
    auto d = build_design(rows, spec);
    try {
        return finish(tsls(d.x, d.y, d.endogenous, d.z_excluded, d.names, spec.se, d.clusters, d.instrument_names), spec, d);
    } catch (const DataError& e) {
        throw DataError(context(spec) + e.what());
    }
}

}  // namespace newsfdi::econ
