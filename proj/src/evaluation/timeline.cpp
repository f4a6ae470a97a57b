#include "handover/evaluation/timeline.hpp"

#include "handover/core/error.hpp"

#include <cmath>

namespace handover::evaluation {

WindowStats WindowStats::from_aucs(std::span<const double> aucs) {
  if (aucs.empty()) return failed("no splits evaluated");
  WindowStats w;
  w.n_splits = static_cast<int>(aucs.size());
  w.mean = evaluation::mean(aucs);
  w.std = stddev(aucs, 0);
  w.sem = aucs.size() > 1 ? stddev(aucs, 1) / std::sqrt(static_cast<double>(aucs.size())) : 0.0;
  w.median = evaluation::median(aucs);
  w.q25 = percentile(aucs, 0.25);
  w.q75 = percentile(aucs, 0.75);
  return w;
}

WindowStats WindowStats::failed(std::string error) {
  WindowStats w;
  w.error = std::move(error);
  return w;
}

std::vector<double> AucTimeline::auc() const {
  std::vector<double> out;
  for (const auto& w : windows) out.push_back(w.mean);
  return out;
}

std::vector<double> AucTimeline::dispersion() const {
  std::vector<double> out;
  for (const auto& w : windows) out.push_back(w.std);
  return out;
}

void AucTimeline::validate() const {
  if (window_end_times_s.size() != windows.size()) throw DimensionError("timeline window grid and values differ in length");
  for (const auto& w : windows)
    if (!w.missing() && !(w.mean >= 0.0 && w.mean <= 1.0)) throw NumericError("timeline AUC outside [0, 1]");
}

std::optional<double> sustained_level_time(std::span<const double> ends, std::span<const double> auc, double level,
                                           int run_length) {
  if (run_length < 1) throw SpecError("run length must be at least 1");
  if (ends.size() != auc.size()) throw DimensionError("window ends and AUC values differ in length");
  const auto run = static_cast<std::size_t>(run_length);
  std::size_t streak = 0;
  for (std::size_t i = 0; i < auc.size(); ++i) {
    streak = auc[i] >= level ? streak + 1 : 0;  // NaN compares false
    if (streak == run) return ends[i + 1 - run];
  }
  return std::nullopt;
}

std::optional<double> sustained_level_time(const AucTimeline& timeline, double level, int run_length) {
  const auto a = timeline.auc();
  return sustained_level_time(timeline.window_end_times_s, a, level, run_length);
}

AggregateTimeline aggregate_participants(const std::vector<AucTimeline>& timelines) {
  if (timelines.empty()) throw NumericError("no timelines to aggregate");
  AggregateTimeline out;
  out.tag = timelines.front().tag;
  out.model = timelines.front().model;
  out.window_end_times_s = timelines.front().window_end_times_s;
  for (const auto& t : timelines) {
    t.validate();
    if (t.window_end_times_s != out.window_end_times_s) {
      throw DimensionError("participant " + std::to_string(t.participant_id) + " uses a different window grid");
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t w = 0; w < out.window_end_times_s.size(); ++w) {
    std::vector<double> values;
    for (const auto& t : timelines)
      if (!t.windows[w].missing()) values.push_back(t.windows[w].mean);
    out.n_participants.push_back(static_cast<int>(values.size()));
    out.median.push_back(values.empty() ? nan : median(values));
    out.q25.push_back(values.empty() ? nan : percentile(values, 0.25));
    out.q75.push_back(values.empty() ? nan : percentile(values, 0.75));
  }
  return out;
}

std::vector<double> default_levels() { return {0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90}; }

LatencyTable latency_table(const std::vector<std::vector<AucTimeline>>& per_tag, std::span<const double> levels,
                           int run_length) {
  LatencyTable table;
  table.levels.assign(levels.begin(), levels.end());
  std::vector<AggregateTimeline> medians;
  for (const auto& group : per_tag) {
    medians.push_back(aggregate_participants(group));
    table.tags.push_back(medians.back().tag);
    if (table.model.empty()) table.model = medians.back().model;
  }
  for (double level : levels) {
    std::vector<std::optional<double>> row;
    for (const auto& m : medians) row.push_back(sustained_level_time(m.window_end_times_s, m.median, level, run_length));
    table.times.push_back(std::move(row));

    std::vector<std::vector<double>> groups;
    for (const auto& group : per_tag) {
      std::vector<double> g;
      for (const auto& t : group)
        if (auto s = sustained_level_time(t, level, run_length)) g.push_back(*s);
      groups.push_back(std::move(g));
    }
    std::optional<TestResult> test;
    try {
      test = anova_oneway(groups);
    } catch (const Error&) {
      test.reset();
    }
    table.anova.push_back(test);
  }
  return table;
}

}  // namespace handover::evaluation
