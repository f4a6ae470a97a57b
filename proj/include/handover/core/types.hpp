#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace handover {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Condition { Solo, Handover, Joint };

/// Handover is the positive class; Solo and Joint are pooled as class 0.
constexpr int label_of(Condition c) { return c == Condition::Handover ? 1 : 0; }

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view text);

enum class Modality { Eeg, Gaze, Motion };

inline constexpr std::array<Modality, 3> kAllModalities{Modality::Eeg, Modality::Gaze,
                                                        Modality::Motion};

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

/// Uniformly sampled multichannel series. Rows are time samples in temporal
/// order, columns are features/channels; times are onset-relative seconds.
struct TimeSeries {
  double start_time_s = 0.0;
  double step_s = 1.0;
  Matrix values;  // [T x D]

  TimeSeries() = default;
  TimeSeries(double start, double step, Matrix v);

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
  double time_at(Eigen::Index i) const { return start_time_s + static_cast<double>(i) * step_s; }
  /// One step past the last sample, i.e. the exclusive end of the covered interval.
  double end_time() const { return time_at(samples()); }
  double rate_hz() const { return 1.0 / step_s; }
};

struct RawEeg {
  std::vector<std::string> channel_names;
  TimeSeries series;  // [T x channels], microvolts
  bool truncated = false;

  double sample_rate_hz() const { return series.rate_hz(); }
};

/// Gaze in video pixels with the tracked robot-torso reference point on the same
/// grid. Missing gaze samples are NaN.
struct RawGaze {
  TimeSeries gaze_xy;       // [T x 2]
  TimeSeries reference_xy;  // [T x 2]
  bool truncated = false;

  double sample_rate_hz() const { return gaze_xy.rate_hz(); }
};

struct RawMotion {
  TimeSeries hand_xyz;  // [T x 3], metres, camera frame
  bool truncated = false;

  double sample_rate_hz() const { return hand_xyz.rate_hz(); }
};

struct TrialKey {
  int participant_id = 0;
  int trial_id = 0;

  friend auto operator<=>(const TrialKey&, const TrialKey&) = default;
};

struct TrialRecording {
  int participant_id = 1;
  int trial_id = 0;
  Condition condition = Condition::Solo;
  double onset_time_s = 0.0;
  std::optional<RawEeg> eeg;
  std::optional<RawGaze> gaze;
  std::optional<RawMotion> motion;

  TrialKey key() const { return {participant_id, trial_id}; }
  bool has(Modality m) const;
};

struct LabeledTrial {
  TrialRecording trial;
  int label = 0;

  explicit LabeledTrial(TrialRecording t) : trial(std::move(t)), label(label_of(trial.condition)) {}
};

std::vector<LabeledTrial> label_trials(std::vector<TrialRecording> trials);

}  // namespace handover
