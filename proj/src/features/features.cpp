#include "handover/features/features.hpp"

#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/dsp/filter.hpp"
#include "handover/dsp/resample.hpp"

#include <algorithm>
#include <cmath>

namespace handover::features {

namespace {

// Restricts a stream to the analysis epoch. Streams covering the whole epoch are
// placed on the onset-aligned grid at their own rate; shorter streams keep whatever
// samples fall inside the epoch.
TimeSeries to_epoch_grid(const TimeSeries& s, const char* what) {
  if (covers(s, kEpochStart, kEpochEnd)) {
    const Eigen::Index n = grid_count(kEpochStart, kEpochEnd, s.step_s);
    return dsp::resample_to_grid(s, kEpochStart, s.step_s, n);
  }
  Eigen::Index i0 = 0;
  while (i0 < s.samples() && s.time_at(i0) < kEpochStart - kGridTolerance * s.step_s) ++i0;
  Eigen::Index i1 = i0;
  while (i1 < s.samples() && s.time_at(i1) < kEpochEnd - kGridTolerance * s.step_s) ++i1;
  if (i1 == i0) {
    throw CoverageError(std::string(what) + " stream has no samples inside the analysis epoch",
                        s.start_time_s, s.end_time());
  }
  return TimeSeries(s.time_at(i0), s.step_s, s.values.middleRows(i0, i1 - i0));
}

}  // namespace

const std::vector<std::string>& default_eeg_channels() {
  static const std::vector<std::string> channels{"Cz",  "C3",  "C4",  "FC1", "FC2", "FC5",
                                                 "FC6", "CP1", "CP2", "F3",  "F4",  "Fz"};
  return channels;
}

std::uint64_t EegOptions::fingerprint() const {
  std::string s = "eeg-v1|";
  for (const auto& c : channels) s += c + ",";
  s += "|";
  for (double f : tf.freqs_hz) s += text::format_double(f) + ",";
  s += "|" + text::format_double(tf.n_cycles) + "|" + text::format_double(tf.output_step_s);
  s += "|" + std::string(scale == PowerScale::Log ? "log" : "raw");
  s += "|" + std::string(preprocess ? "pre" : "nopre") + "|" + text::format_double(target_rate_hz);
  return text::fnv1a(s);
}

TimeSeries preprocess_eeg(const RawEeg& eeg, const EegOptions& options) {
  std::vector<Eigen::Index> picks;
  for (const auto& name : options.channels) {
    const auto it = std::find(eeg.channel_names.begin(), eeg.channel_names.end(), name);
    if (it == eeg.channel_names.end()) {
      std::string available;
      for (const auto& c : eeg.channel_names) available += (available.empty() ? "" : ", ") + c;
      throw SpecError("EEG channel '" + name + "' not in montage; available: " + available);
    }
    picks.push_back(it - eeg.channel_names.begin());
  }
  Matrix selected(eeg.series.samples(), static_cast<Eigen::Index>(picks.size()));
  for (std::size_t i = 0; i < picks.size(); ++i) selected.col(static_cast<Eigen::Index>(i)) = eeg.series.values.col(picks[i]);
  TimeSeries s(eeg.series.start_time_s, eeg.series.step_s, std::move(selected));

  const double fs = s.rate_hz();
  int factor = 1;
  if (options.preprocess) {
    if (100.0 < fs / 2.0) s = dsp::apply_filter(s, dsp::FilterSpec::band_pass(1.0, 100.0));
    else s = dsp::apply_filter(s, dsp::FilterSpec::high_pass(1.0));
    if (40.0 < fs / 2.0) s = dsp::apply_filter(s, dsp::FilterSpec::low_pass(40.0));
    const double ratio = fs / options.target_rate_hz;
    factor = static_cast<int>(std::lround(ratio));
    if (factor < 1 || std::abs(ratio - factor) > 1e-6 * ratio) {
      throw SpecError("EEG rate " + text::format_double(fs) + " Hz is not an integer multiple of the target rate " +
                      text::format_double(options.target_rate_hz) + " Hz");
    }
  }
  s = to_epoch_grid(s, "EEG");
  return dsp::decimate(s, factor);
}

FeatureSequence build_gaze_features(const TrialRecording& trial) {
  if (!trial.gaze) throw ModalityAbsentError("trial " + std::to_string(trial.participant_id) + "/" + std::to_string(trial.trial_id) + " has no gaze stream");
  const RawGaze& g = *trial.gaze;
  if (g.gaze_xy.samples() != g.reference_xy.samples()) throw DimensionError("gaze and reference traces differ in length");
  const TimeSeries filled = dsp::interpolate_gaps(g.gaze_xy);
  TimeSeries relative(filled.start_time_s, filled.step_s, filled.values - g.reference_xy.values);
  FeatureSequence seq;
  seq.modality = Modality::Gaze;
  seq.series = to_epoch_grid(relative, "gaze");
  seq.trial_ref = trial.key();
  seq.label = label_of(trial.condition);
  return seq;
}

FeatureSequence build_motion_features(const TrialRecording& trial) {
  if (!trial.motion) throw ModalityAbsentError("trial " + std::to_string(trial.participant_id) + "/" + std::to_string(trial.trial_id) + " has no motion stream");
  if (trial.motion->hand_xyz.dims() != 3) throw DimensionError("motion stream must have three columns");
  FeatureSequence seq;
  seq.modality = Modality::Motion;
  seq.series = to_epoch_grid(trial.motion->hand_xyz, "motion");
  seq.trial_ref = trial.key();
  seq.label = label_of(trial.condition);
  return seq;
}

FeatureSequence build_eeg_features(const TrialRecording& trial, const EegOptions& options) {
  if (!trial.eeg) throw ModalityAbsentError("trial " + std::to_string(trial.participant_id) + "/" + std::to_string(trial.trial_id) + " has no EEG stream");
  const TimeSeries cleaned = preprocess_eeg(*trial.eeg, options);
  const auto per_channel = dsp::morlet_tf(cleaned, options.tf);
  dsp::TfFeature avg = dsp::average_channels(per_channel);
  if (options.scale == PowerScale::Log) {
    avg.power = avg.power.array().max(1e-300).log().matrix();
  }
  FeatureSequence seq;
  seq.modality = Modality::Eeg;
  seq.series = TimeSeries(avg.times_s.front(), options.tf.output_step_s, std::move(avg.power));
  seq.trial_ref = trial.key();
  seq.label = label_of(trial.condition);
  return seq;
}

FeatureSequence build_features(const TrialRecording& trial, Modality modality,
                               const EegOptions& eeg_options) {
  switch (modality) {
    case Modality::Eeg: return build_eeg_features(trial, eeg_options);
    case Modality::Gaze: return build_gaze_features(trial);
    case Modality::Motion: return build_motion_features(trial);
  }
  throw SpecError("unknown modality");
}

std::vector<double> WindowGrid::ends() const {
  validate();
  std::vector<double> out;
  const int n = static_cast<int>(std::llround((last_end - first_end) / step)) + 1;
  for (int k = 0; k < n; ++k) out.push_back(first_end + k * step);
  return out;
}

int WindowGrid::index_of(double end_time_s) const {
  const double k = (end_time_s - first_end) / step;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-6) return -1;
  const int n = static_cast<int>(std::llround((last_end - first_end) / step)) + 1;
  if (r < 0 || r >= n) return -1;
  return static_cast<int>(r);
}

void WindowGrid::validate() const {
  if (!(step > 0.0)) throw SpecError("window step must be positive");
  if (!(first_end > start)) throw SpecError("first window end must be after the window start");
  if (!(last_end >= first_end)) throw SpecError("last window end must not precede the first");
  const double k = (last_end - first_end) / step;
  if (std::abs(k - std::round(k)) > 1e-6) throw SpecError("last window end is not on the window grid");
}

FeatureSequence window_features(const FeatureSequence& seq, double end_time_s, const WindowGrid& grid) {
  if (grid.index_of(end_time_s) < 0) {
    throw SpecError("window end " + text::format_double(end_time_s) + " s is not on the window grid");
  }
  FeatureSequence out = seq;
  out.series = epoch(seq.series, grid.start, end_time_s);
  return out;
}

Vector flatten(const TimeSeries& series) {
  const Eigen::Index t = series.samples();
  const Eigen::Index d = series.dims();
  Vector out(t * d);
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i * d + j) = series.values(i, j);
  return out;
}

Vector flatten(const FeatureSequence& seq) { return flatten(seq.series); }

Matrix unflatten(const Vector& flat, Eigen::Index samples, Eigen::Index dims) {
  if (flat.size() != samples * dims) throw DimensionError("flat vector length does not match T x D");
  Matrix out(samples, dims);
  for (Eigen::Index i = 0; i < samples; ++i)
    for (Eigen::Index j = 0; j < dims; ++j) out(i, j) = flat(i * dims + j);
  return out;
}

Matrix flatten_rows(const std::vector<FeatureSequence>& seqs) {
  if (seqs.empty()) return Matrix(0, 0);
  const Eigen::Index len = seqs.front().series.samples() * seqs.front().series.dims();
  Matrix out(static_cast<Eigen::Index>(seqs.size()), len);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Vector f = flatten(seqs[i]);
    if (f.size() != len) throw DimensionError("sequences of unequal length cannot be stacked");
    out.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return out;
}

}  // namespace handover::features
