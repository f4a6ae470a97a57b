#include "handover/evaluation/stats.hpp"

#include "handover/core/error.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace handover::evaluation {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw NumericError("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw SpecError("percentile fraction outside [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0.0 ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::span<const double> values) { return percentile(values, 0.5); }

double mean(std::span<const double> values) {
  if (values.empty()) throw NumericError("mean of an empty set");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double stddev(std::span<const double> values, int ddof) {
  if (values.size() <= static_cast<std::size_t>(ddof)) throw NumericError("too few values for a standard deviation");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - static_cast<std::size_t>(ddof)));
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw DimensionError("paired t-test needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double n = static_cast<double>(d.size());
  const double sd = stddev(d, 1);
  if (!(sd > 0.0)) throw NumericError("paired differences have zero variance");
  TestResult r;
  r.df1 = n - 1.0;
  r.statistic = mean(d) / (sd / std::sqrt(n));
  boost::math::students_t dist(r.df1);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
  return r;
}

TestResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw NumericError("ANOVA needs at least two groups");
  double grand = 0.0;
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw NumericError("every ANOVA group needs at least two values");
    for (double v : g) grand += v;
    total += g.size();
  }
  grand /= static_cast<double>(total);
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }
  TestResult r;
  r.df1 = static_cast<double>(groups.size() - 1);
  r.df2 = static_cast<double>(total - groups.size());
  if (!(ss_within > 0.0)) throw NumericError("ANOVA groups have zero within-group variance");
  r.statistic = (ss_between / r.df1) / (ss_within / r.df2);
  boost::math::fisher_f dist(r.df1, r.df2);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace handover::evaluation
