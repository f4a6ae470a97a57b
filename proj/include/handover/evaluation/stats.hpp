#pragma once

#include <span>
#include <vector>

namespace handover::evaluation {

/// Linear interpolation between order statistics (q in [0, 1]), numpy's default.
/// NaNs must be removed by the caller. Throws NumericError on empty input.
double percentile(std::span<const double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);
/// Population (ddof = 0) or sample (ddof = 1) standard deviation.
double stddev(std::span<const double> values, int ddof = 0);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;  // ANOVA only
};

/// Two-sided paired t-test on a - b with n - 1 degrees of freedom.
/// Throws DimensionError for unequal or too short inputs, NumericError when the
/// differences have zero variance.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// One-way ANOVA, F = MS_between / MS_within with (g - 1, N - g) degrees of freedom.
/// Throws NumericError for fewer than two groups, a group with fewer than two values,
/// or zero within-group variance.
TestResult anova_oneway(const std::vector<std::vector<double>>& groups);

}  // namespace handover::evaluation
