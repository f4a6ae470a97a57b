#pragma once

#include "handover/core/types.hpp"
#include "handover/dsp/morlet.hpp"

#include <string>
#include <vector>

namespace handover::features {

/// One trial's feature time series for one modality (D = 2 gaze, 3 motion, F for EEG).
struct FeatureSequence {
  Modality modality = Modality::Gaze;
  TimeSeries series;
  TrialKey trial_ref;
  int label = 0;
};

enum class PowerScale { Raw, Log };

/// Central and frontal channels used for EEG features.
const std::vector<std::string>& default_eeg_channels();

struct EegOptions {
  std::vector<std::string> channels = default_eeg_channels();
  dsp::TfSpec tf = dsp::TfSpec::defaults();
  PowerScale scale = PowerScale::Raw;
  /// Band-pass 1-100 Hz, low-pass 40 Hz, then decimation to `target_rate_hz`.
  bool preprocess = true;
  double target_rate_hz = 250.0;

  /// Fingerprint of everything that changes the feature values.
  std::uint64_t fingerprint() const;
};

/// Channel selection, filtering, epoching to [-5, 6) s and decimation; [T x channels].
TimeSeries preprocess_eeg(const RawEeg& eeg, const EegOptions& options);

/// Gaze relative to the robot-torso reference, gaps interpolated, on the stream's grid
/// over [-5, 6) s.
FeatureSequence build_gaze_features(const TrialRecording& trial);
/// Right-hand XYZ on the stream's grid over [-5, 6) s, untransformed.
FeatureSequence build_motion_features(const TrialRecording& trial);
/// Channel-averaged Morlet power, [T' x F].
FeatureSequence build_eeg_features(const TrialRecording& trial, const EegOptions& options = {});

FeatureSequence build_features(const TrialRecording& trial, Modality modality,
                               const EegOptions& eeg_options = {});

/// Growing-window grid: windows [start, end) for end = first_end + k * step up to last_end.
struct WindowGrid {
  double start = -5.0;
  double first_end = -4.75;
  double last_end = 6.0;
  double step = 0.25;

  std::vector<double> ends() const;
  /// Index of `end_time_s` on the grid, or -1 when it is off-grid.
  int index_of(double end_time_s) const;
  void validate() const;
};

/// Restriction of the sequence to [grid.start, end_time_s). Throws SpecError for
/// off-grid end times.
FeatureSequence window_features(const FeatureSequence& seq, double end_time_s,
                                const WindowGrid& grid = {});

/// Time-major flattening: all D features of the first sample, then the second, ...
Vector flatten(const TimeSeries& series);
Vector flatten(const FeatureSequence& seq);
Matrix unflatten(const Vector& flat, Eigen::Index samples, Eigen::Index dims);

/// Stacks flattened sequences as rows.
Matrix flatten_rows(const std::vector<FeatureSequence>& seqs);

}  // namespace handover::features
