#pragma once

// Firm-level variables, instrumental-variable regressions with country and
// sector fixed effects, t-tests and descriptive tables.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "newsfdi/linalg.hpp"
#include "newsfdi/sbs.hpp"
#include "newsfdi/stats.hpp"

namespace newsfdi::econ {

inline constexpr std::array<std::string_view, 10> kObstacleNames{
    "corruption",     "crime_disorder",    "business_license", "labor_regulation", "lack_education",
    "access_to_land", "access_to_finance", "transport",        "telecom",          "electricity"};

std::optional<std::size_t> obstacle_index(std::string_view name);

// Header of the firm file, in order.
const std::vector<std::string>& firm_columns();

struct FirmRecord {
    std::string firm_id;
    std::string country;
    std::string region_id;
    std::string sector;
    std::optional<int> survey_year;
    std::optional<double> years_established;
    std::optional<double> employees;
    std::optional<double> foreign_ownership;
    std::array<std::optional<int>, kObstacleNames.size()> obstacles{};
    std::optional<bool> has_email_web;
    std::size_t line = 0;
};

struct RowRejection {
    std::size_t line = 0;  // 0 when not tied to a file line
    std::string firm_id;
    std::string reason;
};

// "No obstacle" -> 1 ... "Very severe obstacle" -> 5; "Does Not Apply" and
// "Don't Know (Spontaneous)" -> 0. Case-insensitive; the integer codes 0-5
// are accepted as well. nullopt for anything else.
std::optional<int> encode_obstacle(std::string_view answer);

struct FirmLoadResult {
    std::vector<FirmRecord> firms;
    std::vector<RowRejection> rejections;
};

// Empty cells (or "NA", ".") are missing values. Rows with an unrecognized
// obstacle answer, out-of-range ownership, a duplicate firm_id or a region
// unknown to `known_regions` (when given) are rejected. Throws DataError on
// a bad header.
FirmLoadResult parse_firms(std::string_view csv_text, const std::set<std::string>* known_regions = nullptr);
FirmLoadResult load_firms(const std::filesystem::path& path, const std::set<std::string>* known_regions = nullptr);

struct PcaResult {
    std::array<double, 3> loadings{};
    double eigenvalue = 0.0;
    double explained = 0.0;  // eigenvalue / 3
    std::vector<double> scores;
};

// First principal component of three columns that are standardized here
// (population sd). The sign makes the second column's loading >= 0. When
// the leading eigenvalue is repeated the lexicographically largest unit
// eigenvector among the tied ones is returned. Throws DataError naming a
// zero-variance column, or with fewer than 3 rows.
PcaResult pca_first_component(std::span<const double> c0, std::span<const double> c1, std::span<const double> c2,
                              const std::array<std::string, 3>& names = {"telecom", "transport", "has_email_web"});

struct DerivedFirmRow {
    std::string firm_id;
    std::string country;
    std::string region_id;
    std::string sector;
    std::optional<double> foreign_ownership;
    std::array<std::optional<double>, kObstacleNames.size()> obstacles{};
    std::optional<double> age;
    std::optional<double> size_medium;
    std::optional<double> size_large;
    double agglomeration = 0.0;
    std::optional<double> physical_infra;
    std::optional<double> financial_infra;
    std::optional<double> has_email_web;
    std::map<std::string, double> sbs;  // theme_id -> shifted score
};

struct DeriveResult {
    std::vector<DerivedFirmRow> rows;
    std::vector<RowRejection> rejections;
    std::optional<PcaResult> pca;
    std::vector<std::string> warnings;
};

// age = ln(years_established) (years <= 0 rejects the row); size from
// employees (0-19 small, 20-99 medium, 100+ large); agglomeration = firms
// with foreign_ownership > 0 in the (region, sector) cell, self included;
// physical_infra = PCA score over rows complete on telecom, transport and
// has_email_web; financial_infra = access_to_finance code.
DeriveResult derive_controls(std::span<const FirmRecord> firms);

// Attaches sbs_shifted per theme by region_id. Throws DataError when a
// (region, theme) pair has more than one slice.
void join_sbs(std::span<DerivedFirmRow> rows, std::span<const sbs::SbsScore> scores);

// Value of a named variable: foreign_ownership, obstacle names, age,
// size_medium, size_large, agglomeration, physical_infra, financial_infra,
// has_email_web, or sbs_<theme>. nullopt when missing; throws ConfigError
// on an unknown name.
std::optional<double> variable_value(const DerivedFirmRow& row, std::string_view name);
bool is_variable(std::string_view name);

enum class InstrumentVariant { leave_out, cell_mean };
enum class SeType { hc1, cluster_region };

std::optional<InstrumentVariant> parse_instrument_variant(std::string_view s);
std::optional<SeType> parse_se_type(std::string_view s);
std::string_view instrument_variant_name(InstrumentVariant v);
std::string_view se_type_name(SeType s);

inline const std::vector<std::string> kDefaultControls{"age",           "size_medium",    "size_large",
                                                       "agglomeration", "physical_infra", "financial_infra"};

struct RegressionSpec {
    std::string name;
    std::string table;
    std::string dependent = "foreign_ownership";
    std::vector<std::string> obstacles;        // endogenous, instrumented
    std::optional<std::string> sbs_theme;
    std::optional<std::string> interact;       // obstacle multiplied by SBS
    std::vector<std::string> controls = kDefaultControls;
    bool country_fe = true;
    bool sector_fe = true;
    InstrumentVariant instruments = InstrumentVariant::leave_out;
    SeType se = SeType::hc1;
};

// Throws ConfigError: interaction iff sbs_theme, interact among obstacles,
// known variable names.
void validate_spec(const RegressionSpec& spec);

std::string interaction_name(const RegressionSpec& spec);  // "sbs_justice*corruption"

struct InstrumentColumn {
    std::vector<double> values;
    std::vector<bool> flagged;     // singleton cell under leave_out
    std::size_t warnings = 0;
};

// Mean of x over the row's cell, excluding the row itself under leave_out.
// A singleton cell cannot exclude itself: the cell mean is used, the row is
// flagged and counted.
InstrumentColumn cell_mean_instrument(std::span<const double> x, std::span<const std::string> cells,
                                      InstrumentVariant variant);

struct Design {
    std::vector<std::string> names;  // obstacles, sbs_<theme>, interaction, controls, FE dummies ("country=X", "sector=X"), Constant
    linalg::Matrix x;
    std::vector<std::size_t> endogenous;  // column indices into x
    linalg::Matrix z_excluded;
    std::vector<std::string> instrument_names;
    std::vector<double> y;
    std::vector<std::string> clusters;
    std::vector<std::size_t> rows_used;   // indices into the input rows
    std::map<std::string, std::size_t> missing;  // variable -> rows lacking it
    std::size_t rows_in = 0;
    std::size_t instrument_warnings = 0;
};

Design build_design(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec);

struct FirstStage {
    std::string endogenous;
    double f_stat = 0.0;  // excluded instruments, homoskedastic
    std::size_t df_num = 0;
    std::size_t df_den = 0;
    double r2 = 0.0;
};

struct RegressionResult {
    std::string model;
    std::string table;
    std::string dependent;
    std::string estimator;  // "OLS" or "2SLS"
    std::vector<std::string> names;
    std::vector<double> coef;
    std::vector<double> se;
    std::vector<double> t;
    std::vector<double> p;
    std::size_t n_obs = 0;
    std::size_t df_resid = 0;
    std::vector<FirstStage> first_stage;
    std::vector<double> residuals;
    SeType se_type = SeType::hc1;
    bool country_fe = false;
    bool sector_fe = false;
    std::size_t instrument_warnings = 0;

    std::optional<std::size_t> index_of(std::string_view name) const;
};

// Least squares on an explicit design. Throws DataError naming the collinear
// columns on rank deficiency, or when n <= k.
RegressionResult ols(const linalg::Matrix& x, std::span<const double> y, std::vector<std::string> names,
                     SeType se = SeType::hc1, std::span<const std::string> clusters = {});

// 2SLS: columns `endogenous` of x are replaced by first-stage fitted values
// from [z_excluded | exogenous columns of x]. Residuals use the original x.
RegressionResult tsls(const linalg::Matrix& x, std::span<const double> y, std::span<const std::size_t> endogenous,
                      const linalg::Matrix& z_excluded, std::vector<std::string> names, SeType se = SeType::hc1,
                      std::span<const std::string> clusters = {}, std::span<const std::string> instrument_names = {});

RegressionResult fit_ols_fe(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec);
RegressionResult fit_2sls(std::span<const DerivedFirmRow> rows, const RegressionSpec& spec);

struct TTest {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

// Welch statistic with Welch-Satterthwaite df. Throws DataError if a group
// has fewer than two values.
TTest welch_ttest(std::span<const double> a, std::span<const double> b);

struct CountryRow {
    std::string country;
    std::size_t firms = 0;
    double mean_foreign_ownership = 0.0;
};

struct RegionRow {
    std::string country;
    std::string region_id;
    std::string region_name;
    std::size_t firms = 0;
};

struct Descriptives {
    std::vector<stats::SummaryRow> variables;
    std::vector<CountryRow> countries;
    std::vector<RegionRow> regions;
};

// Variable rows: foreign_ownership, the ten obstacles, age, size dummies,
// agglomeration, infrastructure indices, then one SBS row per theme in
// `themes` (firms with a joined value). Missing values are skipped per
// variable. Countries and regions are sorted.
Descriptives describe(std::span<const DerivedFirmRow> rows, std::span<const std::string> themes = {},
                      const std::map<std::string, std::string>& region_names = {});

void write_country_csv(std::ostream& out, std::span<const CountryRow> rows);
void write_region_csv(std::ostream& out, std::span<const RegionRow> rows);
void write_country_text(std::ostream& out, std::span<const CountryRow> rows);
void write_region_text(std::ostream& out, std::span<const RegionRow> rows);

// Table number: 4 significant digits, at most 3 decimals ("33.15", "0.382", "-1.677").
std::string format_table_number(double x);

// Table number followed by stars from p ("2.816*").
std::string format_coef(double coef, double p);

// Display label of a regressor ("Bus. License", "SBS justice*Bus. License").
std::string regressor_label(std::string_view name);

// Label in the descriptive table ("Crime and disorder", "Business license").
std::string descriptive_label(std::string_view name);

struct RenderedTable {
    std::string text;
    std::string csv;
};

// Models as columns, regressors as rows ("coef*** (se)" cells), then the
// Observations row and Country FE / Industry FE YES/NO rows. Fixed-effect
// dummies and the constant are not shown. Throws DataError if the
// dependent variables differ.
RenderedTable render_regression_table(std::span<const RegressionResult> results, std::string_view title = {});

void write_coefficients_csv(std::ostream& out, const RegressionResult& r);

struct MonteCarloDraw {
    double ols = 0.0;
    double tsls = 0.0;
};

// y = 1 + beta x + u, x = z + v, u = v + e with z, v, e ~ N(0, 1); one
// draw per seed (seed0 + rep). Results are indexed by rep regardless of threads.
std::vector<MonteCarloDraw> iv_monte_carlo(std::size_t reps, std::size_t n, std::uint64_t seed0, double beta = 2.0,
                                           unsigned threads = 1);

}  // namespace newsfdi::econ
