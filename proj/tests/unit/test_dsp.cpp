#include "helpers.hpp"

#include "handover/core/error.hpp"
#include "handover/dsp/filter.hpp"
#include "handover/dsp/morlet.hpp"
#include "handover/dsp/resample.hpp"
#include "handover/dsp/standardize.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace handover;
using namespace handover::dsp;
using std::numbers::pi;

namespace {

// Squared magnitude of an order-N Butterworth prototype mapped by the bilinear
// transform with pre-warped cutoff.
double butter_lp2(double f, double fc, double fs, int order) {
  const double r = std::tan(pi * f / fs) / std::tan(pi * fc / fs);
  return 1.0 / (1.0 + std::pow(r, 2 * order));
}
double butter_hp2(double f, double fc, double fs, int order) {
  const double r = std::tan(pi * fc / fs) / std::tan(pi * f / fs);
  return 1.0 / (1.0 + std::pow(r, 2 * order));
}

TimeSeries sine(double f, double fs, double seconds, double amp = 1.0, double start = 0.0) {
  const auto n = static_cast<Eigen::Index>(std::llround(seconds * fs));
  Matrix v(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) v(i, 0) = amp * std::sin(2 * pi * f * (start + i / fs));
  return TimeSeries(start, 1.0 / fs, v);
}

double rms(const Eigen::Ref<const Vector>& v) { return std::sqrt(v.squaredNorm() / v.size()); }

}  // namespace

TEST_CASE("Butterworth designs match the analytic magnitude") {
  const double fs = 1000.0;
  for (int order : {1, 2, 4, 5}) {
    CAPTURE(order);
    const auto lp = design_butterworth(FilterSpec::low_pass(40.0, order), fs);
    const auto hp = design_butterworth(FilterSpec::high_pass(1.0, order), fs);
    const auto bp = design_butterworth(FilterSpec::band_pass(1.0, 100.0, order), fs);
    for (double f : {0.3, 1.0, 5.0, 20.0, 40.0, 80.0, 150.0, 400.0}) {
      CAPTURE(f);
      CHECK(std::norm(frequency_response(lp, f, fs)) == doctest::Approx(butter_lp2(f, 40.0, fs, order)).epsilon(1e-9));
      CHECK(std::norm(frequency_response(hp, f, fs)) == doctest::Approx(butter_hp2(f, 1.0, fs, order)).epsilon(1e-9));
      CHECK(std::norm(frequency_response(bp, f, fs)) ==
            doctest::Approx(butter_hp2(f, 1.0, fs, order) * butter_lp2(f, 100.0, fs, order)).epsilon(1e-9));
    }
    CHECK(std::abs(frequency_response(lp, 40.0, fs)) == doctest::Approx(std::sqrt(0.5)));
  }
}

TEST_CASE("filter specs outside Nyquist are rejected") {
  CHECK_THROWS_AS(validate(FilterSpec::low_pass(130.0), 250.0), SpecError);
  CHECK_THROWS_AS(validate(FilterSpec::band_pass(50.0, 10.0), 250.0), SpecError);
  CHECK_THROWS_AS(validate(FilterSpec::high_pass(-1.0), 250.0), SpecError);
  CHECK_THROWS_AS(validate(FilterSpec::low_pass(10.0, 0), 250.0), SpecError);
  CHECK_NOTHROW(validate(FilterSpec::band_pass(1.0, 100.0), 250.0));
}

TEST_CASE("zero-phase filtering applies the squared magnitude without delay") {
  const double fs = 250.0;
  const auto spec = FilterSpec::low_pass(40.0);
  const auto sos = design_butterworth(spec, fs);
  for (double f : {5.0, 30.0, 40.0, 50.0}) {
    CAPTURE(f);
    const TimeSeries x = sine(f, fs, 8.0);
    const TimeSeries y = apply_filter(x, spec);
    const Eigen::Index a = 500, n = 1000;  // interior, away from edge transients
    const double gain = rms(y.values.col(0).segment(a, n)) / rms(x.values.col(0).segment(a, n));
    CHECK(gain == doctest::Approx(std::norm(frequency_response(sos, f, fs))).epsilon(0.01));
    // No phase shift: the residual against the scaled input is small.
    const Vector resid = y.values.col(0).segment(a, n) - gain * x.values.col(0).segment(a, n);
    CHECK(rms(resid) < 0.01 * std::max(gain, 1e-3) + 1e-6);
  }
}

TEST_CASE("forward filtering is linear and causal") {
  const auto sos = design_butterworth(FilterSpec::low_pass(10.0), 100.0);
  std::vector<double> impulse(50, 0.0), shifted(50, 0.0);
  impulse[0] = 1.0;
  shifted[5] = 2.0;
  sos_filter(sos, impulse);
  sos_filter(sos, shifted);
  for (int i = 0; i < 5; ++i) CHECK(shifted[i] == 0.0);
  for (int i = 5; i < 50; ++i) CHECK(shifted[i] == doctest::Approx(2.0 * impulse[i - 5]).epsilon(1e-12));
}

TEST_CASE("Morlet wavelets have unit energy") {
  for (double f : {5.0, 12.0, 40.0}) {
    const MorletWavelet w(f, 3.0, 250.0);
    double e = 0.0;
    for (Eigen::Index j = -w.half_width; j <= w.half_width; ++j) {
      const double u = j / 250.0;
      e += std::pow(w.amplitude * std::exp(-0.5 * u * u / (w.sigma_s * w.sigma_s)), 2);
    }
    CHECK(e == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(w.sigma_s == doctest::Approx(3.0 / (2 * pi * f)));
  }
}

TEST_CASE("Morlet power equals direct convolution, including fractional output times") {
  Rng rng(3);
  const double fs = 250.0;
  Matrix v = testing::random_matrix(rng, 800, 2);
  const TimeSeries x(-1.0, 1.0 / fs, v);
  TfSpec spec;
  spec.freqs_hz = {6.0, 13.0, 31.0};
  spec.output_step_s = 0.05;  // 12.5 samples: every other output falls between samples
  const auto tf = morlet_tf(x, spec);
  REQUIRE(tf.size() == 2);
  CHECK(tf[0].power.rows() == 64);
  for (std::size_t fi = 0; fi < spec.freqs_hz.size(); ++fi) {
    const MorletWavelet w(spec.freqs_hz[fi], spec.n_cycles, fs);
    for (Eigen::Index k : {0, 1, 7, 30, 31, 63}) {
      const double tau = -1.0 + k * 0.05;
      std::complex<double> acc = 0.0;
      for (Eigen::Index n = 0; n < 800; ++n) {
        const double u = (-1.0 + n / fs) - tau;
        if (std::abs(u) > 5.0 * w.sigma_s + 1e-9) continue;
        acc += v(n, 1) * w.amplitude * std::exp(-0.5 * u * u / (w.sigma_s * w.sigma_s)) *
               std::exp(std::complex<double>(0.0, -2 * pi * spec.freqs_hz[fi] * u));
      }
      CHECK(tf[1].power(k, static_cast<Eigen::Index>(fi)) == doctest::Approx(std::norm(acc)).epsilon(1e-10));
      CHECK(tf[1].times_s[static_cast<std::size_t>(k)] == doctest::Approx(tau));
    }
  }
}

TEST_CASE("Morlet power of a sinusoid peaks where unit-energy wavelets predict") {
  // With unit-energy wavelets |W(f)|^2 ~ sigma(f) exp(-4 pi^2 sigma^2 (f - f0)^2), sigma = n / (2 pi f),
  // whose maximum lies at f0 (sqrt(n^4 + 2 n^2) - n^2): about 0.95 f0 for three cycles.
  const double fs = 250.0;
  const double n = 3.0;
  const double shrink = std::sqrt(n * n * n * n + 2 * n * n) - n * n;
  for (double f0 : {7.0, 12.0, 25.0, 38.0}) {
    CAPTURE(f0);
    const auto tf = morlet_tf(sine(f0, fs, 6.0), TfSpec::defaults());
    const Matrix& p = tf[0].power;
    const Eigen::Index mid0 = p.rows() / 4, len = p.rows() / 2;
    Eigen::Index best = 0;
    p.middleRows(mid0, len).colwise().mean().maxCoeff(&best);
    CHECK(std::abs(tf[0].freqs_hz[static_cast<std::size_t>(best)] - f0 * shrink) <= 0.5 + 1e-9);
  }
}

TEST_CASE("TF spec validation") {
  TfSpec s = TfSpec::defaults();
  CHECK(s.freqs_hz.size() == 36);
  CHECK_NOTHROW(s.validate(250.0));
  CHECK_THROWS_AS(s.validate(60.0), SpecError);  // 40 Hz above Nyquist
  s.output_step_s = 0.001;
  CHECK_THROWS_AS(s.validate(250.0), SpecError);
  TfSpec desc;
  desc.freqs_hz = {10.0, 5.0};
  CHECK_THROWS_AS(desc.validate(250.0), SpecError);
  // Signal shorter than the 5 Hz wavelet.
  CHECK_THROWS_AS(morlet_tf(sine(10.0, 250.0, 0.5), TfSpec::defaults()), SpecError);
}

TEST_CASE("average_channels requires identical grids") {
  TfFeature a{{0.0, 0.1}, {5.0}, Matrix::Constant(2, 1, 2.0)};
  TfFeature b{{0.0, 0.1}, {5.0}, Matrix::Constant(2, 1, 4.0)};
  const std::vector<TfFeature> both{a, b};
  CHECK(average_channels(both).power(1, 0) == 3.0);
  TfFeature c{{0.0, 0.2}, {5.0}, Matrix::Constant(2, 1, 4.0)};
  const std::vector<TfFeature> mixed{a, c};
  CHECK_THROWS_AS(average_channels(mixed), DimensionError);
}

TEST_CASE("decimate keeps every factor-th sample of a band-limited signal") {
  const TimeSeries x = sine(5.0, 1000.0, 2.0);
  const TimeSeries y = decimate(x, 4);
  CHECK(y.samples() == 500);
  CHECK(y.step_s == doctest::Approx(0.004));
  for (Eigen::Index i = 100; i < 400; ++i) CHECK(y.values(i, 0) == doctest::Approx(x.values(4 * i, 0)).epsilon(0.01).scale(1.0));
  CHECK(decimate(sine(5.0, 1000.0, 0.101), 4).samples() == 26);  // ceil(101 / 4)
  CHECK(decimate(x, 1).values == x.values);
  CHECK_THROWS_AS(decimate(x, 0), SpecError);
}

TEST_CASE("interpolate_gaps is linear between neighbours") {
  Matrix v(6, 2);
  const double nan = std::nan("");
  v << nan, 1, 2, nan, nan, nan, nan, 4, 8, nan, 10, 6;
  const auto y = interpolate_gaps(TimeSeries(0.0, 1.0, v));
  CHECK(y.values(0, 0) == 2.0);  // leading gap takes the nearest value
  CHECK(y.values(2, 0) == 4.0);
  CHECK(y.values(3, 0) == 6.0);
  CHECK(y.values(1, 1) == 2.0);
  CHECK(y.values(2, 1) == 3.0);
  CHECK(y.values(4, 1) == 5.0);
  Matrix empty = Matrix::Constant(3, 1, nan);
  CHECK_THROWS_AS(interpolate_gaps(TimeSeries(0.0, 1.0, empty)), NumericError);
}

TEST_CASE("resample_to_grid reproduces linear signals and copies coincident samples") {
  Rng rng(8);
  Matrix v(50, 1);
  for (int i = 0; i < 50; ++i) v(i, 0) = 3.0 - 0.5 * (0.1 * i);
  const TimeSeries x(0.0, 0.1, v);
  for (int trial = 0; trial < 50; ++trial) {
    const double start = rng.uniform(0.0, 2.0);
    const double step = rng.uniform(0.01, 0.2);
    const auto count = static_cast<Eigen::Index>((4.8 - start) / step);
    if (count < 1) continue;
    const auto y = resample_to_grid(x, start, step, count);
    for (Eigen::Index k = 0; k < count; ++k) CHECK(y.values(k, 0) == doctest::Approx(3.0 - 0.5 * (start + k * step)).epsilon(1e-12));
  }
  const auto same = resample_to_grid(x, 0.0, 0.1, 50);
  CHECK(same.values == x.values);
  CHECK_THROWS_AS(resample_to_grid(x, -0.5, 0.1, 10), CoverageError);
}

TEST_CASE("standardizer uses training statistics only") {
  Matrix train(4, 2);
  train << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto s = Standardizer::fit(train);
  CHECK(s.mean(0) == 2.5);
  CHECK(s.scale(0) == doctest::Approx(std::sqrt(1.25)));
  CHECK(s.scale(1) == 1.0);  // constant column passes through centred
  Matrix test(1, 2);
  test << 10, 7;
  const Matrix z = s.apply(test);
  CHECK(z(0, 0) == doctest::Approx(7.5 / std::sqrt(1.25)));
  CHECK(z(0, 1) == 2.0);
  auto [out, again] = standardize(test, s);
  CHECK(out == z);
  Matrix wrong(1, 3);
  CHECK_THROWS_AS(s.apply(wrong), DimensionError);
}
