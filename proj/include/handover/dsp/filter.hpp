#pragma once

#include "handover/core/types.hpp"

#include <complex>
#include <span>
#include <vector>

namespace handover::dsp {

enum class FilterKind { BandPass, LowPass, HighPass };

struct FilterSpec {
  FilterKind kind = FilterKind::LowPass;
  double low_cut_hz = 0.0;   // band-pass and high-pass
  double high_cut_hz = 0.0;  // band-pass and low-pass
  int order = 4;
  bool zero_phase = true;

  static FilterSpec band_pass(double low, double high, int order = 4) {
    return {FilterKind::BandPass, low, high, order, true};
  }
  static FilterSpec low_pass(double high, int order = 4) {
    return {FilterKind::LowPass, 0.0, high, order, true};
  }
  static FilterSpec high_pass(double low, int order = 4) {
    return {FilterKind::HighPass, low, 0.0, order, true};
  }
};

/// Transposed direct form II section, a0 normalised to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

/// Throws SpecError unless 0 < low < high < Nyquist (as applicable) and order >= 1.
void validate(const FilterSpec& spec, double sample_rate_hz);

/// Butterworth design by bilinear transform with pre-warped cutoffs, as second-order
/// sections. A band-pass is the cascade of a high-pass and a low-pass of the given order.
std::vector<Biquad> design_butterworth(const FilterSpec& spec, double sample_rate_hz);

/// H(e^{j 2 pi f / fs}) of a single forward pass through the cascade.
std::complex<double> frequency_response(const std::vector<Biquad>& sos, double freq_hz,
                                        double sample_rate_hz);

/// Forward-only filtering from rest, one column.
void sos_filter(const std::vector<Biquad>& sos, std::span<double> x);
/// Forward-backward filtering with odd-extension padding and steady-state initial
/// conditions; zero group delay, squared magnitude response.
void sos_filtfilt(const std::vector<Biquad>& sos, std::span<double> x);

/// Filters every column; grid and shape are preserved.
TimeSeries apply_filter(const TimeSeries& x, const FilterSpec& spec);

}  // namespace handover::dsp
