#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_map>
#include <unordered_set>

#include "newsfdi/csv.hpp"
#include "newsfdi/econ.hpp"
#include "newsfdi/error.hpp"
#include "newsfdi/kernels.hpp"

namespace newsfdi::econ {
namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_missing(std::string_view s) {
    s = trim(s);
    return s.empty() || s == "NA" || s == "." || s == "na" || s == "NaN";
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(std::string_view s) {
    auto v = lower_ascii(trim(s));
    if (v == "1" || v == "yes" || v == "true") return true;
    if (v == "0" || v == "no" || v == "false") return false;
    return std::nullopt;
}

}  // namespace

std::optional<std::size_t> obstacle_index(std::string_view name) {
    for (std::size_t i = 0; i < kObstacleNames.size(); ++i)
        if (kObstacleNames[i] == name) return i;
    return std::nullopt;
}

const std::vector<std::string>& firm_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c{"firm_id",          "country",  "region_id",        "sector",
                                   "survey_year",      "years_established", "employees", "foreign_ownership"};
        for (auto n : kObstacleNames) c.emplace_back(n);
        c.emplace_back("has_email_web");
        return c;
    }();
    return cols;
}

std::optional<int> encode_obstacle(std::string_view answer) {
    auto a = lower_ascii(trim(answer));
    static const std::unordered_map<std::string, int> table{
        {"no obstacle", 1},
        {"minor obstacle", 2},
        {"moderate obstacle", 3},
        {"major obstacle", 4},
        {"very severe obstacle", 5},
        {"does not apply", 0},
        {"don't know (spontaneous)", 0},
        {"don't know", 0},
    };
    if (auto it = table.find(a); it != table.end()) return it->second;
    if (a.size() == 1 && a[0] >= '0' && a[0] <= '5') return a[0] - '0';
    return std::nullopt;
}

FirmLoadResult parse_firms(std::string_view csv_text, const std::set<std::string>* known_regions) {
    auto table = csv::parse(csv_text);
    const auto& expected = firm_columns();
    if (table.header != expected) {
        std::string want;
        for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
        throw DataError("firm file header must be: " + want);
    }

    FirmLoadResult out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];
        FirmRecord f;
        f.line = line;
        auto reject = [&](std::string reason) {
            out.rejections.push_back({line, f.firm_id, std::move(reason)});
        };
        if (row.size() != expected.size()) {
            f.firm_id = row.empty() ? "" : row[0];
            reject("field_count");
            continue;
        }
        f.firm_id = std::string(trim(row[0]));
        f.country = std::string(trim(row[1]));
        f.region_id = std::string(trim(row[2]));
        f.sector = std::string(trim(row[3]));

        std::string problem;
        for (std::size_t c = 0; c < 4 && problem.empty(); ++c)
            if (trim(row[c]).empty()) problem = "missing_field:" + expected[c];

        auto numeric = [&](std::size_t c, std::optional<double>& dst) {
            if (!problem.empty() || is_missing(row[c])) return;
            dst = parse_number(row[c]);
            if (!dst) problem = "not_a_number:" + expected[c];
        };
        std::optional<double> year;
        numeric(4, year);
        numeric(5, f.years_established);
        numeric(6, f.employees);
        numeric(7, f.foreign_ownership);
        if (problem.empty() && year) {
            if (*year != std::floor(*year)) problem = "not_an_integer:survey_year";
            else f.survey_year = static_cast<int>(*year);
        }
        if (problem.empty() && f.employees && *f.employees < 0) problem = "negative:employees";
        if (problem.empty() && f.foreign_ownership && (*f.foreign_ownership < 0 || *f.foreign_ownership > 100))
            problem = "out_of_range:foreign_ownership";
        for (std::size_t k = 0; k < kObstacleNames.size() && problem.empty(); ++k) {
            const auto& cell = row[8 + k];
            if (is_missing(cell)) continue;
            f.obstacles[k] = encode_obstacle(cell);
            if (!f.obstacles[k]) problem = "unrecognized_answer:" + std::string(kObstacleNames[k]);
        }
        if (problem.empty() && !is_missing(row[18])) {
            f.has_email_web = parse_bool(row[18]);
            if (!f.has_email_web) problem = "not_a_boolean:has_email_web";
        }
        if (problem.empty() && known_regions && !known_regions->contains(f.region_id)) problem = "unknown_region";
        if (problem.empty() && !seen.insert(f.firm_id).second) problem = "duplicate_id";

        if (!problem.empty()) {
            reject(problem);
            continue;
        }
        out.firms.push_back(std::move(f));
    }
    return out;
}

FirmLoadResult load_firms(const std::filesystem::path& path, const std::set<std::string>* known_regions) {
    auto table_text = [&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot read firm file: " + path.string());
        return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    return parse_firms(table_text, known_regions);
}

PcaResult pca_first_component(std::span<const double> c0, std::span<const double> c1, std::span<const double> c2,
                              const std::array<std::string, 3>& names) {
    const std::size_t n = c0.size();
    if (c1.size() != n || c2.size() != n) throw Error(ErrorKind::internal, "pca: column length mismatch");
    if (n < 3) throw DataError("PCA needs at least 3 complete rows, got " + std::to_string(n));

    std::array<std::span<const double>, 3> cols{c0, c1, c2};
    std::array<std::vector<double>, 3> z;
    for (std::size_t j = 0; j < 3; ++j) {
        const double mean = kernels::sum(cols[j]) / static_cast<double>(n);
        const double var = kernels::sum_sq_dev(cols[j], mean) / static_cast<double>(n);
        if (!(var > 0.0)) throw DataError("PCA column has zero variance: " + names[j]);
        const double sd = std::sqrt(var);
        z[j].resize(n);
        for (std::size_t i = 0; i < n; ++i) z[j][i] = (cols[j][i] - mean) / sd;
    }

    linalg::Matrix corr(3, 3);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) corr(a, b) = kernels::dot(z[a], z[b]) / static_cast<double>(n);

    auto eig = linalg::symmetric_eigen(corr);

    // Leading eigenspace; repeated eigenvalues widen it.
    const double lead = eig.values[0];
    std::size_t dim = 1;
    while (dim < 3 && std::abs(eig.values[dim] - lead) <= 1e-10 * std::max(1.0, std::abs(lead))) ++dim;

    std::array<double, 3> v{};
    if (dim == 1) {
        for (std::size_t k = 0; k < 3; ++k) v[k] = eig.vectors(k, 0);
    } else {
        // Lexicographically largest unit vector in the eigenspace: project
        // e_0, e_1, ... in turn and take the first nonzero projection.
        for (std::size_t axis = 0; axis < 3; ++axis) {
            std::array<double, 3> p{};
            for (std::size_t b = 0; b < dim; ++b) {
                const double coef = eig.vectors(axis, b);
                for (std::size_t k = 0; k < 3; ++k) p[k] += coef * eig.vectors(k, b);
            }
            const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            if (norm > 1e-8) {
                for (std::size_t k = 0; k < 3; ++k) v[k] = p[k] / norm;
                break;
            }
        }
    }
    if (v[1] < 0.0)
        for (auto& x : v) x = -x;
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& x : v) x /= norm;

    PcaResult out;
    out.loadings = v;
    out.eigenvalue = lead;
    out.explained = lead / 3.0;
    out.scores.assign(n, 0.0);
    for (std::size_t k = 0; k < 3; ++k) kernels::axpy(v[k], z[k], out.scores);
    return out;
}

DeriveResult derive_controls(std::span<const FirmRecord> firms) {
    DeriveResult out;
    const auto telecom = *obstacle_index("telecom");
    const auto transport = *obstacle_index("transport");
    const auto finance = *obstacle_index("access_to_finance");

    for (const auto& f : firms) {
        if (f.years_established && *f.years_established <= 0.0) {
            out.rejections.push_back({f.line, f.firm_id, "nonpositive:years_established"});
            continue;
        }
        DerivedFirmRow r;
        r.firm_id = f.firm_id;
        r.country = f.country;
        r.region_id = f.region_id;
        r.sector = f.sector;
        r.foreign_ownership = f.foreign_ownership;
        for (std::size_t k = 0; k < kObstacleNames.size(); ++k)
            if (f.obstacles[k]) r.obstacles[k] = static_cast<double>(*f.obstacles[k]);
        if (f.years_established) r.age = std::log(*f.years_established);
        if (f.employees) {
            r.size_medium = (*f.employees >= 20 && *f.employees < 100) ? 1.0 : 0.0;
            r.size_large = *f.employees >= 100 ? 1.0 : 0.0;
        }
        r.financial_infra = r.obstacles[finance];
        if (f.has_email_web) r.has_email_web = *f.has_email_web ? 1.0 : 0.0;
        out.rows.push_back(std::move(r));
    }

    std::map<std::pair<std::string, std::string>, std::size_t> foreign_in_cell;
    for (const auto& r : out.rows)
        if (r.foreign_ownership && *r.foreign_ownership > 0.0) ++foreign_in_cell[{r.region_id, r.sector}];
    for (auto& r : out.rows) {
        auto it = foreign_in_cell.find({r.region_id, r.sector});
        r.agglomeration = it == foreign_in_cell.end() ? 0.0 : static_cast<double>(it->second);
    }

    std::vector<std::size_t> complete;
    std::array<std::vector<double>, 3> cols;
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        const auto& r = out.rows[i];
        if (r.obstacles[telecom] && r.obstacles[transport] && r.has_email_web) {
            complete.push_back(i);
            cols[0].push_back(*r.obstacles[telecom]);
            cols[1].push_back(*r.obstacles[transport]);
            cols[2].push_back(*r.has_email_web);
        }
    }
    if (complete.size() < 3) {
        out.warnings.push_back("physical_infra not computed: " + std::to_string(complete.size()) +
                               " rows complete on telecom, transport, has_email_web");
        return out;
    }
    out.pca = pca_first_component(cols[0], cols[1], cols[2]);
    for (std::size_t k = 0; k < complete.size(); ++k) out.rows[complete[k]].physical_infra = out.pca->scores[k];
    return out;
}

void join_sbs(std::span<DerivedFirmRow> rows, std::span<const sbs::SbsScore> scores) {
    std::map<std::string, std::map<std::string, double>> by_region;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& s : scores) {
        if (!seen.insert({s.region_id, s.theme_id}).second)
            throw DataError("SBS scores hold several slices for region " + s.region_id + ", theme " + s.theme_id +
                            "; only pooled scores can be joined to firms");
        by_region[s.region_id][s.theme_id] = s.sbs_shifted;
    }
    for (auto& r : rows) {
        r.sbs.clear();
        if (auto it = by_region.find(r.region_id); it != by_region.end()) r.sbs = it->second;
    }
}

bool is_variable(std::string_view name) {
    static const std::set<std::string, std::less<>> fixed{
        "foreign_ownership", "age",           "size_medium",     "size_large",
        "agglomeration",     "physical_infra", "financial_infra", "has_email_web"};
    if (fixed.contains(name) || obstacle_index(name)) return true;
    return name.starts_with("sbs_") && relevance::is_theme_id(name.substr(4));
}

std::optional<double> variable_value(const DerivedFirmRow& row, std::string_view name) {
    if (name == "foreign_ownership") return row.foreign_ownership;
    if (auto k = obstacle_index(name)) return row.obstacles[*k];
    if (name == "age") return row.age;
    if (name == "size_medium") return row.size_medium;
    if (name == "size_large") return row.size_large;
    if (name == "agglomeration") return row.agglomeration;
    if (name == "physical_infra") return row.physical_infra;
    if (name == "financial_infra") return row.financial_infra;
    if (name == "has_email_web") return row.has_email_web;
    if (name.starts_with("sbs_") && relevance::is_theme_id(name.substr(4))) {
        auto it = row.sbs.find(std::string(name.substr(4)));
        if (it == row.sbs.end()) return std::nullopt;
        return it->second;
    }
    throw ConfigError("unknown variable: " + std::string(name));
}

}  // namespace newsfdi::econ
