#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "newsfdi/csv.hpp"
#include "newsfdi/econ.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/format.hpp"
#include "newsfdi/kernels.hpp"
#include "newsfdi/parallel.hpp"
#include "newsfdi/table_text.hpp"

namespace newsfdi::econ {

TTest welch_ttest(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw DataError("t-test needs at least two values per group (got " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()) + ")");
    TTest out;
    out.n_a = a.size();
    out.n_b = b.size();
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    out.mean_a = kernels::sum(a) / na;
    out.mean_b = kernels::sum(b) / nb;
    const double va = kernels::sum_sq_dev(a, out.mean_a) / (na - 1.0) / na;
    const double vb = kernels::sum_sq_dev(b, out.mean_b) / (nb - 1.0) / nb;
    const double diff = out.mean_a - out.mean_b;
    const double se2 = va + vb;
    if (se2 <= 0.0) {
        out.df = na + nb - 2.0;
        out.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        out.p = diff == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.t = diff / std::sqrt(se2);
    out.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    out.p = diff == 0.0 ? 1.0 : stats::t_two_sided_p(out.t, out.df);
    return out;
}

Descriptives describe(std::span<const DerivedFirmRow> rows, std::span<const std::string> themes,
                      const std::map<std::string, std::string>& region_names) {
    Descriptives d;
    std::vector<std::string> vars{"foreign_ownership"};
    for (auto o : kObstacleNames) vars.emplace_back(o);
    for (const char* v : {"age", "size_medium", "size_large", "agglomeration", "physical_infra", "financial_infra",
                          "has_email_web"})
        vars.emplace_back(v);
    for (const auto& t : themes) vars.push_back("sbs_" + t);

    for (const auto& v : vars) {
        std::vector<double> values;
        for (const auto& r : rows)
            if (auto x = variable_value(r, v)) values.push_back(*x);
        d.variables.push_back(stats::summarize(descriptive_label(v), values));
    }

    std::map<std::string, std::pair<std::size_t, std::vector<double>>> countries;
    std::map<std::pair<std::string, std::string>, std::size_t> regions;
    for (const auto& r : rows) {
        auto& c = countries[r.country];
        ++c.first;
        if (r.foreign_ownership) c.second.push_back(*r.foreign_ownership);
        ++regions[{r.country, r.region_id}];
    }
    for (const auto& [name, c] : countries) {
        CountryRow row{name, c.first, std::numeric_limits<double>::quiet_NaN()};
        if (!c.second.empty()) row.mean_foreign_ownership = kernels::sum(c.second) / static_cast<double>(c.second.size());
        d.countries.push_back(row);
    }
    for (const auto& [key, count] : regions) {
        auto it = region_names.find(key.second);
        d.regions.push_back({key.first, key.second, it == region_names.end() ? key.second : it->second, count});
    }
    return d;
}

void write_country_csv(std::ostream& out, std::span<const CountryRow> rows) {
    csv::write_row(out, {"Country", "Total no. of firms", "FDI ownership (average)"});
    for (const auto& r : rows)
        csv::write_row(out, {r.country, std::to_string(r.firms), format_fixed(r.mean_foreign_ownership, 3)});
}

void write_region_csv(std::ostream& out, std::span<const RegionRow> rows) {
    csv::write_row(out, {"Country", "Region ID", "Region", "Total no. of Firms"});
    for (const auto& r : rows) csv::write_row(out, {r.country, r.region_id, r.region_name, std::to_string(r.firms)});
}

void write_country_text(std::ostream& out, std::span<const CountryRow> rows) {
    TextTable t({"Country", "Total no. of firms", "FDI ownership (average)"});
    std::size_t total = 0;
    for (const auto& r : rows) {
        t.add_row({r.country, format_count(r.firms), format_fixed(r.mean_foreign_ownership, 3)});
        total += r.firms;
    }
    t.add_rule();
    t.add_row({"Total", format_count(total), ""});
    t.render(out);
}

void write_region_text(std::ostream& out, std::span<const RegionRow> rows) {
    TextTable t({"Country", "Region", "Total no. of Firms"});
    for (const auto& r : rows) t.add_row({r.country, r.region_name, format_count(r.firms)});
    t.render(out);
}

std::string format_table_number(double x) {
    if (!std::isfinite(x)) return x != x ? "nan" : (x > 0 ? "inf" : "-inf");
    int decimals = 3;
    if (x != 0.0) decimals = std::clamp(3 - static_cast<int>(std::floor(std::log10(std::abs(x)))), 0, 3);
    return format_fixed(x, decimals);
}

std::string format_coef(double coef, double p) { return format_table_number(coef) + stats::stars(p); }

std::string regressor_label(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> labels{
        {"foreign_ownership", "Percentage of Foreign Ownership"},
        {"corruption", "Corruption"},
        {"crime_disorder", "Crime"},
        {"business_license", "Bus. License"},
        {"labor_regulation", "Labor"},
        {"lack_education", "Education"},
        {"access_to_land", "Access to land"},
        {"access_to_finance", "Access to finance"},
        {"transport", "Transport"},
        {"telecom", "Telecom"},
        {"electricity", "Electricity"},
        {"age", "Age"},
        {"size_medium", "Size (20-99 employees)"},
        {"size_large", "Size (>100 employees)"},
        {"agglomeration", "Agglomeration"},
        {"physical_infra", "Physical infra."},
        {"financial_infra", "Financial infra."},
        {"has_email_web", "E-mail/website"},
    };
    if (auto star = name.find('*'); star != std::string_view::npos)
        return regressor_label(name.substr(0, star)) + "*" + regressor_label(name.substr(star + 1));
    if (name.starts_with("sbs_")) return sbs::theme_label(name.substr(4));
    if (auto it = labels.find(name); it != labels.end()) return it->second;
    return std::string(name);
}

std::string descriptive_label(std::string_view name) {
    static const std::map<std::string, std::string, std::less<>> labels{
        {"foreign_ownership", "Foreign ownership"},
        {"crime_disorder", "Crime and disorder"},
        {"business_license", "Business license"},
        {"labor_regulation", "Labor regulation"},
        {"lack_education", "Lack education"},
    };
    if (auto it = labels.find(name); it != labels.end()) return it->second;
    return regressor_label(name);
}

namespace {

bool is_fixed_effect(const std::string& name) { return name.starts_with("country=") || name.starts_with("sector="); }

std::string cell(const RegressionResult& r, const std::string& name) {
    auto j = r.index_of(name);
    if (!j) return "";
    return format_coef(r.coef[*j], r.p[*j]) + " (" + format_table_number(r.se[*j]) + ")";
}

}  // namespace

RenderedTable render_regression_table(std::span<const RegressionResult> results, std::string_view title) {
    for (const auto& r : results)
        if (r.dependent != results.front().dependent)
            throw DataError("regression table mixes dependent variables: " + results.front().dependent + " and " +
                            r.dependent);

    std::vector<std::string> header{""};
    for (std::size_t m = 0; m < results.size(); ++m)
        header.push_back(results[m].model.empty() ? "Model " + std::to_string(m + 1) : results[m].model);

    std::vector<std::string> regressors;
    for (const auto& r : results)
        for (const auto& n : r.names)
            if (!is_fixed_effect(n) && n != "Constant" &&
                std::find(regressors.begin(), regressors.end(), n) == regressors.end())
                regressors.push_back(n);
    // Obstacles, then SBS terms, then interactions, then controls.
    auto group = [](const std::string& n) {
        if (n.find('*') != std::string::npos) return 2;
        if (n.starts_with("sbs_")) return 1;
        return obstacle_index(n) ? 0 : 3;
    };
    std::stable_sort(regressors.begin(), regressors.end(),
                     [&](const std::string& a, const std::string& b) { return group(a) < group(b); });

    std::vector<std::vector<std::string>> body;
    for (const auto& name : regressors) {
        std::vector<std::string> row{regressor_label(name)};
        for (const auto& r : results) row.push_back(cell(r, name));
        body.push_back(std::move(row));
    }
    std::vector<std::vector<std::string>> footer;
    {
        std::vector<std::string> obs{"Observations"}, cfe{"Country FE"}, ife{"Industry FE"};
        for (const auto& r : results) {
            obs.push_back(format_count(r.n_obs));
            cfe.push_back(r.country_fe ? "YES" : "NO");
            ife.push_back(r.sector_fe ? "YES" : "NO");
        }
        footer = {obs, cfe, ife};
    }

    bool clustered = false;
    for (const auto& r : results) clustered = clustered || r.se_type == SeType::cluster_region;
    std::string note = clustered ? "Note. Standard errors clustered by region are in parentheses."
                                 : "Note. Robust standard errors are in parentheses.";
    note += " *** p<0.01, ** p<0.05, * p<0.1.";

    std::ostringstream text;
    if (!title.empty()) text << title << "\n";
    if (!results.empty()) text << "Dependent Variable: " << regressor_label(results.front().dependent) << "\n";
    TextTable t(header);
    for (auto& row : body) t.add_row(row);
    t.add_rule();
    for (auto& row : footer) t.add_row(row);
    t.render(text);
    text << note << "\n";

    std::ostringstream csv_out;
    auto csv_header = header;
    csv_header[0] = "variable";
    csv::write_row(csv_out, csv_header);
    for (const auto& row : body) csv::write_row(csv_out, row);
    for (const auto& row : footer) csv::write_row(csv_out, row);

    return {text.str(), csv_out.str()};
}

void write_coefficients_csv(std::ostream& out, const RegressionResult& r) {
    csv::write_row(out, {"variable", "coef", "se", "t", "p"});
    for (std::size_t j = 0; j < r.names.size(); ++j)
        csv::write_row(out, {r.names[j], format_real(r.coef[j]), format_real(r.se[j]), format_real(r.t[j]),
                             format_real(r.p[j])});
}

std::vector<MonteCarloDraw> iv_monte_carlo(std::size_t reps, std::size_t n, std::uint64_t seed0, double beta,
                                           unsigned threads) {
    std::vector<MonteCarloDraw> out(reps);
    parallel_for(reps, threads, [&](std::size_t rep) {
        std::mt19937_64 rng(seed0 + rep);
        std::normal_distribution<double> normal(0.0, 1.0);
        linalg::Matrix x(n, 2), z(n, 1);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = normal(rng);
            const double v = normal(rng);
            const double e = normal(rng);
            const double xi = zi + v;
            x(i, 0) = 1.0;
            x(i, 1) = xi;
            z(i, 0) = zi;
            y[i] = 1.0 + beta * xi + (v + e);
        }
        const std::vector<std::string> names{"Constant", "x"};
        const std::size_t endo[] = {1};
        out[rep].ols = ols(x, y, names).coef[1];
        out[rep].tsls = tsls(x, y, endo, z, names).coef[1];
    });
    return out;
}

}  // namespace newsfdi::econ
