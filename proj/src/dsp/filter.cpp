#include "handover/dsp/filter.hpp"

#include "handover/core/error.hpp"
#include "handover/core/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace handover::dsp {

namespace {

using std::numbers::pi;

// Second-order analog section s^2 + c1 s + c0 mapped through s = K (1 - z^-1) / (1 + z^-1).
Biquad bilinear_pair(double c1, double c0, double K, bool high_pass, double gain) {
  const double a0 = K * K + c1 * K + c0;
  Biquad q;
  q.a1 = (2.0 * c0 - 2.0 * K * K) / a0;
  q.a2 = (K * K - c1 * K + c0) / a0;
  if (high_pass) {
    q.b0 = gain * K * K / a0;
    q.b1 = -2.0 * q.b0;
    q.b2 = q.b0;
  } else {
    q.b0 = gain / a0;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
  }
  return q;
}

// First-order analog section s + wc.
Biquad bilinear_single(double wc, double K, bool high_pass) {
  const double a0 = K + wc;
  Biquad q;
  q.a1 = (wc - K) / a0;
  q.a2 = 0.0;
  if (high_pass) {
    q.b0 = K / a0;
    q.b1 = -q.b0;
  } else {
    q.b0 = wc / a0;
    q.b1 = q.b0;
  }
  q.b2 = 0.0;
  return q;
}

void append_butterworth(std::vector<Biquad>& sos, int order, double cutoff_hz, double fs,
                        bool high_pass) {
  const double K = 2.0 * fs;
  const double wc = K * std::tan(pi * cutoff_hz / fs);  // pre-warped
  for (int k = 0; k < order / 2; ++k) {
    // Pole pair of the normalised prototype at angle theta from the negative real axis.
    const double theta = pi * (2.0 * k + 1.0) / (2.0 * order);
    const double re = -std::sin(theta);
    // Low-pass: s^2 - 2 re wc s + wc^2 (numerator wc^2). High-pass has the same
    // denominator after s -> wc / s with numerator s^2.
    sos.push_back(bilinear_pair(-2.0 * re * wc, wc * wc, K, high_pass, high_pass ? 1.0 : wc * wc));
  }
  if (order % 2 == 1) sos.push_back(bilinear_single(wc, K, high_pass));
}

// Steady-state internal state of each section for a unit step at the cascade input.
std::vector<std::array<double, 2>> step_state(const std::vector<Biquad>& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double gain_in = 1.0;
  for (std::size_t i = 0; i < sos.size(); ++i) {
    const Biquad& q = sos[i];
    const double dc = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    const double y = dc * gain_in;
    const double x = gain_in;
    zi[i][1] = q.b2 * x - q.a2 * y;
    zi[i][0] = q.b1 * x - q.a1 * y + zi[i][1];
    gain_in = y;
  }
  return zi;
}

void run(const std::vector<Biquad>& sos, std::vector<std::array<double, 2>> state,
         std::span<double> x) {
  for (std::size_t s = 0; s < sos.size(); ++s) {
    const Biquad& q = sos[s];
    double z1 = state[s][0];
    double z2 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + z1;
      z1 = q.b1 * in - q.a1 * out + z2;
      z2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
}

}  // namespace

void validate(const FilterSpec& spec, double fs) {
  const double nyquist = fs / 2.0;
  if (spec.order < 1) throw SpecError("filter order must be at least 1");
  auto check_cut = [&](double f, const char* what) {
    if (!(f > 0.0) || !(f < nyquist)) {
      throw SpecError(std::string(what) + " " + text::format_double(f) +
                      " Hz must lie strictly between 0 and the Nyquist frequency " +
                      text::format_double(nyquist) + " Hz");
    }
  };
  switch (spec.kind) {
    case FilterKind::BandPass:
      check_cut(spec.low_cut_hz, "low cutoff");
      check_cut(spec.high_cut_hz, "high cutoff");
      if (!(spec.low_cut_hz < spec.high_cut_hz)) throw SpecError("band-pass low cutoff must be below the high cutoff");
      break;
    case FilterKind::LowPass: check_cut(spec.high_cut_hz, "low-pass cutoff"); break;
    case FilterKind::HighPass: check_cut(spec.low_cut_hz, "high-pass cutoff"); break;
  }
}

std::vector<Biquad> design_butterworth(const FilterSpec& spec, double fs) {
  validate(spec, fs);
  std::vector<Biquad> sos;
  if (spec.kind == FilterKind::BandPass || spec.kind == FilterKind::HighPass) {
    append_butterworth(sos, spec.order, spec.low_cut_hz, fs, true);
  }
  if (spec.kind == FilterKind::BandPass || spec.kind == FilterKind::LowPass) {
    append_butterworth(sos, spec.order, spec.high_cut_hz, fs, false);
  }
  return sos;
}

std::complex<double> frequency_response(const std::vector<Biquad>& sos, double freq_hz, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * pi * freq_hz / fs);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& q : sos) h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  return h;
}

void sos_filter(const std::vector<Biquad>& sos, std::span<double> x) {
  run(sos, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}), x);
}

void sos_filtfilt(const std::vector<Biquad>& sos, std::span<double> x) {
  const std::size_t n = x.size();
  if (n == 0 || sos.empty()) return;
  const std::size_t pad = std::min<std::size_t>(3 * (2 * sos.size() + 1), n - 1);

  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto unit = step_state(sos);
  auto scaled = [&](double s) {
    auto z = unit;
    for (auto& p : z) {
      p[0] *= s;
      p[1] *= s;
    }
    return z;
  };
  run(sos, scaled(ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  run(sos, scaled(ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n), x.begin());
}

TimeSeries apply_filter(const TimeSeries& x, const FilterSpec& spec) {
  const auto sos = design_butterworth(spec, x.rate_hz());
  TimeSeries out = x;
  for (Eigen::Index c = 0; c < out.dims(); ++c) {
    std::span<double> col(out.values.col(c).data(), static_cast<std::size_t>(out.samples()));
    if (spec.zero_phase) sos_filtfilt(sos, col);
    else sos_filter(sos, col);
  }
  return out;
}

}  // namespace handover::dsp
