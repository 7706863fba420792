#include "newsfdi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "newsfdi/csv.hpp"
#include "newsfdi/format.hpp"
#include "newsfdi/kernels.hpp"
#include "newsfdi/table_text.hpp"

namespace newsfdi::stats {

SummaryRow summarize(std::string variable, std::span<const double> values) {
    SummaryRow row;
    row.variable = std::move(variable);
    row.n = values.size();
    if (values.empty()) {
        row.mean = row.sd = row.min = row.max = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    const double n = static_cast<double>(values.size());
    row.mean = kernels::sum(values) / n;
    row.sd = values.size() > 1 ? std::sqrt(kernels::sum_sq_dev(values, row.mean) / (n - 1.0)) : 0.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    row.min = *lo;
    row.max = *hi;
    return row;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
    csv::write_row(out, {"Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"});
    for (const auto& r : rows) {
        csv::write_row(out, {r.variable, std::to_string(r.n), format_fixed(r.mean, 3), format_fixed(r.sd, 3),
                             format_fixed(r.min, 3), format_fixed(r.max, 3)});
    }
}

void write_summary_text(std::ostream& out, std::span<const SummaryRow> rows) {
    TextTable t({"Variable", "Obs", "Mean", "Std. Dev.", "Min", "Max"});
    for (const auto& r : rows) {
        t.add_row({r.variable, std::to_string(r.n), format_fixed(r.mean, 3), format_fixed(r.sd, 3),
                   format_fixed(r.min, 3), format_fixed(r.max, 3)});
    }
    t.render(out);
}

double t_two_sided_p(double t, double df) {
    if (std::isnan(t) || !(df > 0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

std::string stars(double p) {
    if (!(p >= 0)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

}  // namespace newsfdi::stats
