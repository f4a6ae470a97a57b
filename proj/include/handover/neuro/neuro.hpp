#pragma once

#include "handover/core/types.hpp"
#include "handover/evaluation/stats.hpp"
#include "handover/features/features.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace handover::neuro {

// ---- gaze zones ----

/// Axis-aligned rectangles are half-open, [x0, x1) x [y0, y1). Polygons use the
/// even-odd rule. Coordinates are reference-corrected gaze pixels.
struct Zone {
  std::string name;
  std::vector<std::pair<double, double>> polygon;  // rectangles are stored as 4 corners
  bool is_rect = false;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static Zone rect(std::string name, double x0, double y0, double x1, double y1);
  static Zone poly(std::string name, std::vector<std::pair<double, double>> vertices);
  bool contains(double x, double y) const;
};

/// Named, pairwise disjoint zones; every point outside them is "Other".
class ZoneMap {
public:
  static constexpr const char* kOther = "Other";

  explicit ZoneMap(std::vector<Zone> zones);
  /// Robot, PosB and PosC rectangles around the torso reference (see README).
  static ZoneMap defaults();

  /// Index into names(); the last index is Other.
  std::size_t classify(double x, double y) const;
  std::vector<std::string> names() const;
  const std::vector<Zone>& zones() const { return zones_; }

private:
  std::vector<Zone> zones_;
};

/// Lines "zone <name> rect x0 y0 x1 y1" or "zone <name> polygon x1 y1 x2 y2 x3 y3 ...";
/// '#' starts a comment. Throws DataError with the line number on malformed input
/// and on overlapping zones.
ZoneMap parse_zone_map(const std::filesystem::path& file);
ZoneMap parse_zone_map_text(const std::string& text, const std::string& origin = "<zones>");

struct ZoneTable {
  std::vector<std::string> zones;                      // columns, Other last
  std::map<Condition, std::vector<double>> percent;    // rows sum to 100
  std::map<Condition, long> samples;
};

/// Share of gaze samples in [t_start, t_end) falling in each zone, per condition.
/// `conditions[i]` is the condition of `seqs[i]`. Throws NumericError when no sample
/// falls in the interval.
ZoneTable gaze_zone_frequencies(const std::vector<features::FeatureSequence>& seqs,
                                const std::vector<Condition>& conditions, const ZoneMap& zones,
                                double t_start, double t_end);

// ---- EEG ----

struct BandSpec {
  std::string name;
  double low_hz = 0.0;
  double high_hz = 0.0;

  static BandSpec mu() { return {"mu", 8.0, 12.0}; }
  static BandSpec beta() { return {"beta", 13.0, 30.0}; }
  static BandSpec gamma() { return {"gamma", 30.0, 40.0}; }
  /// Throws SpecError unless 0 < low <= high <= 40 Hz (the feature low-pass).
  void validate() const;
};

const std::vector<std::string>& default_erp_channels();  // C3, C4, Cz, CP1, CP2, FC1, FC2

struct ErpResult {
  TimeSeries mean;  // [T x 1] grand average voltage
  Vector variance;  // [T] across participants (across trials with a single participant)
  int participants = 0;
  int trials = 0;
};

/// Channel-averaged voltage of every trial over [-5, 6) s, baseline-corrected by its
/// mean over [baseline_start, baseline_end), averaged over trials per participant and
/// then over participants. Throws NumericError without trials.
ErpResult erp_grand_average(const std::vector<TrialRecording>& trials,
                            const std::vector<std::string>& channels = default_erp_channels(),
                            double baseline_start = -5.0, double baseline_end = -4.5);

struct ErdsOptions {
  double baseline_start = -4.0;
  double baseline_end = -3.0;
  double freq_step_hz = 1.0;
  double n_cycles = 3.0;
  double output_step_s = 0.05;
  /// Same filtering and decimation as the EEG features.
  bool preprocess = true;
};

/// Band power (Morlet power averaged over the band's frequencies and over trials)
/// relative to its baseline mean: (P - P_base) / P_base. Throws NumericError when
/// the baseline power is zero.
TimeSeries erds(const std::vector<TrialRecording>& trials, const BandSpec& band, const std::string& channel,
                const ErdsOptions& options = {});

/// Per participant: paired t-test of handover against non-handover ERDS, pairing the
/// two condition-averaged curves sample by sample inside [t_start, t_end).
std::map<int, evaluation::TestResult> band_power_condition_test(const std::vector<TrialRecording>& trials,
                                                                const BandSpec& band, const std::string& channel,
                                                                double t_start, double t_end,
                                                                const ErdsOptions& options = {});

}  // namespace handover::neuro
