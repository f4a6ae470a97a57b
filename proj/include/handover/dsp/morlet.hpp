#pragma once

#include "handover/core/types.hpp"

#include <span>
#include <vector>

namespace handover::dsp {

struct TfSpec {
  std::vector<double> freqs_hz;
  double n_cycles = 3.0;
  double output_step_s = 0.05;

  /// Integer frequencies 5..40 Hz, three cycles, 50 ms feature step.
  static TfSpec defaults();
  /// Throws SpecError when the spec cannot be evaluated at `sample_rate_hz`.
  void validate(double sample_rate_hz) const;
};

/// Power of one channel on a (time x frequency) grid.
struct TfFeature {
  std::vector<double> times_s;
  std::vector<double> freqs_hz;
  Matrix power;  // [times x freqs], nonnegative
};

/// Complex Morlet wavelet: Gaussian envelope with sigma_t = n_cycles / (2 pi f),
/// support truncated at +-5 sigma_t, scaled so the sampled wavelet has unit energy.
struct MorletWavelet {
  double freq_hz;
  double sigma_s;
  double amplitude;
  Eigen::Index half_width;  // taps on each side of the centre at the given rate

  MorletWavelet(double freq_hz, double n_cycles, double sample_rate_hz);
};

/// Squared magnitude of the signal convolved with the wavelet, evaluated at the output
/// grid start + k * output_step (k while inside the signal). Output times that fall on
/// samples reproduce sample selection; others use the wavelet evaluated at the exact
/// fractional offset. Samples outside the signal count as zero.
/// Throws SpecError when the longest wavelet is longer than the signal.
std::vector<TfFeature> morlet_tf(const TimeSeries& x, const TfSpec& spec);

/// Elementwise mean over channels; all inputs must share the time and frequency grids.
TfFeature average_channels(std::span<const TfFeature> channels);

}  // namespace handover::dsp
