#pragma once

#include "handover/evaluation/stats.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace handover::evaluation {

/// Cross-validated AUC of one window, summarized over splits. A window whose
/// evaluation failed is "missing": mean is NaN and `error` holds the reason.
struct WindowStats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();  // population std over splits
  double sem = std::numeric_limits<double>::quiet_NaN();  // sample std / sqrt(n)
  double median = std::numeric_limits<double>::quiet_NaN();
  double q25 = std::numeric_limits<double>::quiet_NaN();
  double q75 = std::numeric_limits<double>::quiet_NaN();
  int n_splits = 0;
  std::string error;

  bool missing() const { return n_splits == 0; }
  static WindowStats from_aucs(std::span<const double> aucs);
  static WindowStats failed(std::string error);
};

struct AucTimeline {
  int participant_id = 0;
  std::string tag;    // modality name or fusion tag ("early:eeg+gaze")
  std::string model;  // "lda" or "lstm"
  std::vector<double> window_end_times_s;
  std::vector<WindowStats> windows;

  std::vector<double> auc() const;         // mean per window, NaN when missing
  std::vector<double> dispersion() const;  // fold std per window
  void validate() const;
};

/// Earliest window end t with auc >= level at t and at the next run_length - 1 windows.
/// Missing (NaN) windows cannot be part of a run. nullopt when the level is not sustained.
std::optional<double> sustained_level_time(std::span<const double> ends, std::span<const double> auc,
                                           double level, int run_length = 3);
std::optional<double> sustained_level_time(const AucTimeline& timeline, double level, int run_length = 3);

/// Per-window median and 25th/75th percentiles across participants (linear
/// interpolation). Participants missing a window are skipped for that window.
struct AggregateTimeline {
  std::string tag;
  std::string model;
  std::vector<double> window_end_times_s;
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
  std::vector<int> n_participants;
};

/// Throws DimensionError when the timelines' window grids differ, NumericError when empty.
AggregateTimeline aggregate_participants(const std::vector<AucTimeline>& timelines);

/// Sustained-level times of the median timelines (one column per tag), plus a one-way
/// ANOVA per level over the participants' individual sustained times grouped by tag.
struct LatencyTable {
  std::string model;
  std::vector<double> levels;
  std::vector<std::string> tags;
  std::vector<std::vector<std::optional<double>>> times;  // [level][tag]
  std::vector<std::optional<TestResult>> anova;           // [level]; nullopt when not computable
  static constexpr const char* kAnovaGrouping = "participant sustained times per modality";
};

std::vector<double> default_levels();  // 0.60, 0.65, ..., 0.90

/// `per_tag` holds each tag's participant timelines; all must share the window grid.
LatencyTable latency_table(const std::vector<std::vector<AucTimeline>>& per_tag, std::span<const double> levels,
                           int run_length = 3);

}  // namespace handover::evaluation
