#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace newsfdi::stats {

// One row of an Obs/Mean/Std. Dev./Min/Max table. sd is the sample
// standard deviation (n - 1), reported as 0 for fewer than two values.
struct SummaryRow {
    std::string variable;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SummaryRow summarize(std::string variable, std::span<const double> values);

// "Variable,Obs,Mean,Std. Dev.,Min,Max", values rounded to 3 decimals.
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_summary_text(std::ostream& out, std::span<const SummaryRow> rows);

// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

// Significance stars at 0.01 / 0.05 / 0.1.
std::string stars(double p);

}  // namespace newsfdi::stats
