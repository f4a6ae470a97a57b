#include "handover/dsp/morlet.hpp"

#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/simd/kernels.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace handover::dsp {

using std::numbers::pi;

namespace {

constexpr double kSupportSigmas = 5.0;

struct Taps {
  Eigen::Index first = 0;  // offset of taps[0] relative to the centre sample
  std::vector<double> re;
  std::vector<double> im;
};

// Wavelet sampled at t_n - tau = (j - frac) * dt for every j whose offset lies inside
// the truncated support.
Taps make_taps(const MorletWavelet& w, double frac, double dt) {
  Taps t;
  const double support = kSupportSigmas * w.sigma_s;
  const auto lo = static_cast<Eigen::Index>(std::ceil(frac - support / dt - 1e-12));
  const auto hi = static_cast<Eigen::Index>(std::floor(frac + support / dt + 1e-12));
  t.first = lo;
  for (Eigen::Index j = lo; j <= hi; ++j) {
    const double u = (static_cast<double>(j) - frac) * dt;
    const double g = w.amplitude * std::exp(-0.5 * u * u / (w.sigma_s * w.sigma_s));
    const double phase = 2.0 * pi * w.freq_hz * u;
    t.re.push_back(g * std::cos(phase));
    t.im.push_back(-g * std::sin(phase));
  }
  return t;
}

}  // namespace

TfSpec TfSpec::defaults() {
  TfSpec s;
  for (int f = 5; f <= 40; ++f) s.freqs_hz.push_back(f);
  return s;
}

void TfSpec::validate(double sample_rate_hz) const {
  if (freqs_hz.empty()) throw SpecError("TF frequency list is empty");
  const double nyquist = sample_rate_hz / 2.0;
  for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
    if (!(freqs_hz[i] > 0.0) || !(freqs_hz[i] < nyquist)) {
      throw SpecError("TF frequency " + text::format_double(freqs_hz[i]) + " Hz outside (0, " +
                      text::format_double(nyquist) + ") Hz");
    }
    if (i > 0 && !(freqs_hz[i] > freqs_hz[i - 1])) throw SpecError("TF frequencies must be strictly ascending");
  }
  if (!(n_cycles > 0.0)) throw SpecError("n_cycles must be positive");
  if (output_step_s < (1.0 - 1e-9) / sample_rate_hz) {
    throw SpecError("TF output step " + text::format_double(output_step_s) +
                    " s is finer than the input sample step");
  }
}

MorletWavelet::MorletWavelet(double f, double n_cycles, double fs)
    : freq_hz(f), sigma_s(n_cycles / (2.0 * pi * f)) {
  const double dt = 1.0 / fs;
  // Continuous energy of the envelope is amplitude^2 * sigma * sqrt(pi); per sample, / dt.
  amplitude = std::sqrt(dt / (sigma_s * std::sqrt(pi)));
  half_width = static_cast<Eigen::Index>(std::floor(kSupportSigmas * sigma_s / dt + 1e-12));
}

std::vector<TfFeature> morlet_tf(const TimeSeries& x, const TfSpec& spec) {
  const double fs = x.rate_hz();
  spec.validate(fs);
  const double dt = x.step_s;
  const Eigen::Index n = x.samples();

  std::vector<MorletWavelet> wavelets;
  for (double f : spec.freqs_hz) wavelets.emplace_back(f, spec.n_cycles, fs);
  const Eigen::Index longest = 2 * wavelets.front().half_width + 1;
  if (longest > n) {
    throw SpecError("signal has " + std::to_string(n) + " samples but the " +
                    text::format_double(spec.freqs_hz.front()) + " Hz wavelet needs at least " +
                    std::to_string(longest));
  }

  const Eigen::Index n_out = grid_count(x.start_time_s, x.end_time(), spec.output_step_s);
  std::vector<double> times(static_cast<std::size_t>(n_out));
  std::vector<Eigen::Index> centre(times.size());
  std::vector<double> frac(times.size());
  for (Eigen::Index k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) * spec.output_step_s / dt;
    double c = std::floor(pos + 1e-9);
    double r = pos - c;
    if (r < 1e-9) r = 0.0;
    times[static_cast<std::size_t>(k)] = x.start_time_s + static_cast<double>(k) * spec.output_step_s;
    centre[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(c);
    frac[static_cast<std::size_t>(k)] = r;
  }

  // One tap set per (frequency, fractional offset).
  std::vector<std::map<long long, Taps>> taps(wavelets.size());
  for (std::size_t fi = 0; fi < wavelets.size(); ++fi) {
    for (double r : frac) {
      const auto key = std::llround(r * 1e9);
      if (!taps[fi].count(key)) taps[fi].emplace(key, make_taps(wavelets[fi], r, dt));
    }
  }

  std::vector<TfFeature> out;
  out.reserve(static_cast<std::size_t>(x.dims()));
  for (Eigen::Index ch = 0; ch < x.dims(); ++ch) {
    const Vector column = x.values.col(ch);
    const double* data = column.data();
    TfFeature tf;
    tf.times_s = times;
    tf.freqs_hz = spec.freqs_hz;
    tf.power.resize(n_out, static_cast<Eigen::Index>(wavelets.size()));
    for (std::size_t fi = 0; fi < wavelets.size(); ++fi) {
      for (Eigen::Index k = 0; k < n_out; ++k) {
        const Taps& t = taps[fi].at(std::llround(frac[static_cast<std::size_t>(k)] * 1e9));
        const Eigen::Index tap_count = static_cast<Eigen::Index>(t.re.size());
        Eigen::Index start = centre[static_cast<std::size_t>(k)] + t.first;
        Eigen::Index skip = 0;
        if (start < 0) {
          skip = -start;
          start = 0;
        }
        const Eigen::Index stop = std::min(n, centre[static_cast<std::size_t>(k)] + t.first + tap_count);
        double power = 0.0;
        if (stop > start) {
          const auto len = static_cast<std::size_t>(stop - start);
          const auto [re, im] = simd::dot2({data + start, len},
                                           {t.re.data() + skip, len}, {t.im.data() + skip, len});
          power = re * re + im * im;
        }
        tf.power(k, static_cast<Eigen::Index>(fi)) = power;
      }
    }
    out.push_back(std::move(tf));
  }
  return out;
}

TfFeature average_channels(std::span<const TfFeature> channels) {
  if (channels.empty()) throw DimensionError("cannot average zero channels");
  TfFeature out = channels.front();
  for (std::size_t i = 1; i < channels.size(); ++i) {
    const TfFeature& c = channels[i];
    if (c.times_s != out.times_s || c.freqs_hz != out.freqs_hz ||
        c.power.rows() != out.power.rows() || c.power.cols() != out.power.cols()) {
      throw DimensionError("channel " + std::to_string(i) + " has a different time/frequency grid");
    }
    out.power += c.power;
  }
  out.power /= static_cast<double>(channels.size());
  return out;
}

}  // namespace handover::dsp
