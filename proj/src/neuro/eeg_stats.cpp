#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/dsp/morlet.hpp"
#include "handover/dsp/resample.hpp"
#include "handover/neuro/neuro.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace handover::neuro {

namespace {

Eigen::Index channel_index(const RawEeg& eeg, const std::string& name) {
  const auto it = std::find(eeg.channel_names.begin(), eeg.channel_names.end(), name);
  if (it == eeg.channel_names.end()) throw SpecError("EEG channel '" + name + "' not in montage");
  return it - eeg.channel_names.begin();
}

// Channel-averaged voltage on the onset-aligned grid over the analysis epoch.
Vector epoch_voltage(const RawEeg& eeg, const std::vector<std::string>& channels, double& step_out) {
  if (channels.empty()) throw SpecError("no ERP channels given");
  Vector avg = Vector::Zero(eeg.series.samples());
  for (const auto& c : channels) avg += eeg.series.values.col(channel_index(eeg, c));
  avg /= static_cast<double>(channels.size());
  const TimeSeries s(eeg.series.start_time_s, eeg.series.step_s, avg);
  if (!covers(s, kEpochStart, kEpochEnd)) {
    throw CoverageError("EEG stream does not cover the analysis epoch", s.start_time_s, s.end_time());
  }
  step_out = s.step_s;
  return dsp::resample_to_grid(s, kEpochStart, s.step_s, grid_count(kEpochStart, kEpochEnd, s.step_s)).values.col(0);
}

double window_mean(const Vector& v, double start, double step, double t0, double t1) {
  double sum = 0.0;
  long n = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = start + static_cast<double>(i) * step;
    if (t >= t0 - kGridTolerance * step && t < t1 - kGridTolerance * step) {
      sum += v(i);
      ++n;
    }
  }
  if (n == 0) throw SpecError("window [" + text::format_double(t0) + ", " + text::format_double(t1) + ") holds no samples");
  return sum / static_cast<double>(n);
}

// Trial-averaged band power on the TF grid.
TimeSeries band_power(const std::vector<const TrialRecording*>& trials, const BandSpec& band,
                      const std::string& channel, const ErdsOptions& options) {
  band.validate();
  features::EegOptions eo;
  eo.channels = {channel};
  eo.preprocess = options.preprocess;
  eo.tf.n_cycles = options.n_cycles;
  eo.tf.output_step_s = options.output_step_s;
  eo.tf.freqs_hz.clear();
  for (double f = band.low_hz; f <= band.high_hz + 1e-9; f += options.freq_step_hz) eo.tf.freqs_hz.push_back(f);

  Vector sum;
  double start = 0.0;
  for (const TrialRecording* t : trials) {
    if (!t->eeg) throw ModalityAbsentError("trial without EEG passed to band-power analysis");
    const TimeSeries x = features::preprocess_eeg(*t->eeg, eo);
    const auto tf = dsp::morlet_tf(x, eo.tf);
    const Vector p = tf.front().power.rowwise().mean();
    if (sum.size() == 0) {
      sum = p;
      start = tf.front().times_s.front();
    } else {
      if (p.size() != sum.size()) throw DimensionError("trials yield different TF grids");
      sum += p;
    }
  }
  if (trials.empty()) throw NumericError("no trials for band-power analysis");
  return TimeSeries(start, options.output_step_s, sum / static_cast<double>(trials.size()));
}

TimeSeries relative_change(const TimeSeries& power, const ErdsOptions& options) {
  const double base = window_mean(power.values.col(0), power.start_time_s, power.step_s, options.baseline_start,
                                  options.baseline_end);
  if (!(base > 0.0)) throw NumericError("baseline band power is zero");
  return TimeSeries(power.start_time_s, power.step_s, (power.values.array() - base) / base);
}

}  // namespace

void BandSpec::validate() const {
  if (!(low_hz > 0.0 && high_hz >= low_hz && high_hz <= 40.0)) {
    throw SpecError("band '" + name + "' must lie inside (0, 40] Hz");
  }
}

const std::vector<std::string>& default_erp_channels() {
  static const std::vector<std::string> c{"C3", "C4", "Cz", "CP1", "CP2", "FC1", "FC2"};
  return c;
}

ErpResult erp_grand_average(const std::vector<TrialRecording>& trials, const std::vector<std::string>& channels,
                            double baseline_start, double baseline_end) {
  std::map<int, std::pair<Vector, int>> per_participant;
  double step = 0.0;
  int n_trials = 0;
  for (const auto& t : trials) {
    if (!t.eeg) continue;
    double s = 0.0;
    Vector v = epoch_voltage(*t.eeg, channels, s);
    if (step != 0.0 && std::abs(s - step) > 1e-12 * step) throw DimensionError("ERP trials use different sampling rates");
    step = s;
    v.array() -= window_mean(v, kEpochStart, step, baseline_start, baseline_end);
    auto& [sum, count] = per_participant[t.participant_id];
    if (count == 0) sum = v;
    else sum += v;
    ++count;
    ++n_trials;
  }
  if (n_trials == 0) throw NumericError("no EEG trials for the ERP grand average");

  ErpResult r;
  r.trials = n_trials;
  r.participants = static_cast<int>(per_participant.size());
  std::vector<Vector> means;
  for (const auto& [id, acc] : per_participant) means.push_back(acc.first / static_cast<double>(acc.second));
  Vector grand = Vector::Zero(means.front().size());
  for (const auto& m : means) grand += m;
  grand /= static_cast<double>(means.size());

  Vector var = Vector::Zero(grand.size());
  if (means.size() > 1) {
    for (const auto& m : means) var.array() += (m - grand).array().square();
    var /= static_cast<double>(means.size());
  } else {
    for (const auto& t : trials) {
      if (!t.eeg) continue;
      double s = 0.0;
      Vector v = epoch_voltage(*t.eeg, channels, s);
      v.array() -= window_mean(v, kEpochStart, step, baseline_start, baseline_end);
      var.array() += (v - grand).array().square();
    }
    var /= static_cast<double>(n_trials);
  }
  r.mean = TimeSeries(kEpochStart, step, grand);
  r.variance = var;
  return r;
}

TimeSeries erds(const std::vector<TrialRecording>& trials, const BandSpec& band, const std::string& channel,
                const ErdsOptions& options) {
  std::vector<const TrialRecording*> ptrs;
  for (const auto& t : trials) ptrs.push_back(&t);
  return relative_change(band_power(ptrs, band, channel, options), options);
}

std::map<int, evaluation::TestResult> band_power_condition_test(const std::vector<TrialRecording>& trials,
                                                                const BandSpec& band, const std::string& channel,
                                                                double t_start, double t_end,
                                                                const ErdsOptions& options) {
  std::map<int, std::pair<std::vector<const TrialRecording*>, std::vector<const TrialRecording*>>> groups;
  for (const auto& t : trials) {
    if (!t.eeg) continue;
    auto& g = groups[t.participant_id];
    (label_of(t.condition) == 1 ? g.first : g.second).push_back(&t);
  }
  std::map<int, evaluation::TestResult> out;
  for (const auto& [id, g] : groups) {
    if (g.first.empty() || g.second.empty()) {
      throw NumericError("participant " + std::to_string(id) + " lacks handover or non-handover EEG trials");
    }
    const TimeSeries a = relative_change(band_power(g.first, band, channel, options), options);
    const TimeSeries b = relative_change(band_power(g.second, band, channel, options), options);
    std::vector<double> xa, xb;
    for (Eigen::Index i = 0; i < a.samples(); ++i) {
      const double t = a.time_at(i);
      if (t >= t_start - kGridTolerance && t < t_end - kGridTolerance) {
        xa.push_back(a.values(i, 0));
        xb.push_back(b.values(i, 0));
      }
    }
    out[id] = evaluation::paired_t_test(xa, xb);
  }
  return out;
}

}  // namespace handover::neuro
