#include "helpers.hpp"

#include "handover/app/synth.hpp"
#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/features/cache.hpp"
#include "handover/features/features.hpp"
#include "handover/features/pca.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>

using namespace handover;
using namespace handover::features;

namespace {

TrialRecording one_trial(std::set<Modality> mods, std::vector<std::string> channels = {"Cz", "C3", "C4"}) {
  app::SynthProfile p;
  p.participants = 1;
  p.trials_per_condition = 1;
  p.modalities = std::move(mods);
  p.eeg_channels = std::move(channels);
  p.gaze_dropout = 0.05;
  return app::synthesize_trial(p, 1, 1, Condition::Handover);
}

EegOptions small_eeg() {
  EegOptions o;
  o.channels = {"Cz", "C3"};
  return o;
}

}  // namespace

TEST_CASE("default window grid has 44 windows") {
  const WindowGrid g;
  const auto ends = g.ends();
  REQUIRE(ends.size() == 44);
  CHECK(ends.front() == -4.75);
  CHECK(ends.back() == 6.0);
  CHECK(g.index_of(1.25) == 24);
  CHECK(g.index_of(1.3) == -1);
  CHECK(g.index_of(6.25) == -1);
  WindowGrid bad;
  bad.last_end = 5.9;
  CHECK_THROWS_AS(bad.validate(), SpecError);
}

TEST_CASE("gaze features are reference-relative, gap-free and on the 25 Hz epoch grid") {
  const TrialRecording t = one_trial({Modality::Gaze});
  const auto seq = build_gaze_features(t);
  CHECK(seq.modality == Modality::Gaze);
  CHECK(seq.label == 1);
  CHECK(seq.series.samples() == 275);
  CHECK(seq.series.start_time_s == doctest::Approx(-5.0));
  CHECK(seq.series.values.allFinite());
  // A sample that was recorded matches gaze minus reference exactly.
  const auto& g = t.gaze->gaze_xy;
  const Eigen::Index offset = static_cast<Eigen::Index>(std::llround((-5.0 - g.start_time_s) / g.step_s));
  for (Eigen::Index i = 0; i < 275; ++i) {
    if (std::isnan(g.values(offset + i, 0))) continue;
    CHECK(seq.series.values(i, 0) == g.values(offset + i, 0) - t.gaze->reference_xy.values(offset + i, 0));
  }
}

TEST_CASE("a 0.25 s gaze window holds seven samples") {
  const auto seq = build_gaze_features(one_trial({Modality::Gaze}));
  const auto w = window_features(seq, -4.75);
  CHECK(w.series.samples() == 7);
  CHECK(flatten(w).size() == 14);
  CHECK(window_features(seq, 6.0).series.samples() == 275);
  CHECK_THROWS_AS(window_features(seq, -4.7), SpecError);
}

TEST_CASE("motion features keep XYZ at 5 Hz") {
  const auto seq = build_motion_features(one_trial({Modality::Motion}));
  CHECK(seq.series.dims() == 3);
  CHECK(seq.series.samples() == 55);
  CHECK_THROWS_AS(build_motion_features(one_trial({Modality::Gaze})), ModalityAbsentError);
}

TEST_CASE("EEG features are channel-averaged Morlet power on a 50 ms grid") {
  const auto t = one_trial({Modality::Eeg});
  const auto seq = build_eeg_features(t, small_eeg());
  CHECK(seq.series.dims() == 36);
  CHECK(seq.series.samples() == 220);
  CHECK(seq.series.start_time_s == doctest::Approx(-5.0));
  CHECK(seq.series.step_s == doctest::Approx(0.05));
  CHECK((seq.series.values.array() >= 0.0).all());

  auto log_opts = small_eeg();
  log_opts.scale = PowerScale::Log;
  const auto logged = build_eeg_features(t, log_opts);
  CHECK(logged.series.values(10, 3) == doctest::Approx(std::log(seq.series.values(10, 3))));
  CHECK(log_opts.fingerprint() != small_eeg().fingerprint());
}

TEST_CASE("EEG preprocessing validates channels and rates") {
  const auto t = one_trial({Modality::Eeg});
  EegOptions o = small_eeg();
  o.channels = {"Cz", "Oz"};
  try {
    preprocess_eeg(*t.eeg, o);
    FAIL("missing channel accepted");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("Oz") != std::string::npos);
    CHECK(std::string(e.what()).find("C3") != std::string::npos);
  }
  EegOptions odd = small_eeg();
  odd.target_rate_hz = 100.0;  // 250 / 100 is not an integer
  CHECK_THROWS_AS(preprocess_eeg(*t.eeg, odd), SpecError);
  EegOptions half = small_eeg();
  half.target_rate_hz = 125.0;
  const auto x = preprocess_eeg(*t.eeg, half);
  CHECK(x.samples() == 1375);
  CHECK(x.dims() == 2);
}

TEST_CASE("flattening is time-major and invertible") {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto t = static_cast<Eigen::Index>(1 + rng.below(9));
    const auto d = static_cast<Eigen::Index>(1 + rng.below(5));
    const Matrix m = testing::random_matrix(rng, t, d);
    const Vector f = flatten(TimeSeries(0.0, 1.0, m));
    CHECK(f(0) == m(0, 0));
    if (d > 1) CHECK(f(1) == m(0, 1));
    CHECK(unflatten(f, t, d) == m);
  }
  CHECK_THROWS_AS(unflatten(Vector::Zero(5), 2, 3), DimensionError);
}

TEST_CASE("PCA matches the covariance eigendecomposition") {
  Rng rng(11);
  for (auto [n, d] : {std::pair<int, int>{40, 6}, {8, 30}}) {
    CAPTURE(n);
    CAPTURE(d);
    Matrix x = testing::random_matrix(rng, n, d);
    x.col(0) *= 5.0;
    const auto model = pca_fit(x, 0.999999);
    const Matrix c = x.rowwise() - x.colwise().mean();
    const Matrix cov = c.transpose() * c / (n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector ev = es.eigenvalues().reverse();
    const double total = ev.sum();
    const int rank = std::min(n - 1, d);
    CHECK(model.k() <= rank);
    for (Eigen::Index i = 0; i < model.k(); ++i) {
      CHECK(model.explained_variance_ratio(i) == doctest::Approx(ev(i) / total).epsilon(1e-8));
      const Vector axis = es.eigenvectors().col(d - 1 - i);
      CHECK(std::abs(model.components.row(i).dot(axis)) == doctest::Approx(1.0).epsilon(1e-8));
      // Sign rule: the largest-magnitude entry is positive.
      Eigen::Index arg = 0;
      model.components.row(i).cwiseAbs().maxCoeff(&arg);
      CHECK(model.components(i, arg) > 0.0);
    }
    const Matrix gram = model.components * model.components.transpose();
    CHECK((gram - Matrix::Identity(model.k(), model.k())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("PCA keeps the fewest components reaching the target") {
  Rng rng(12);
  Matrix x = testing::random_matrix(rng, 50, 5);
  for (int j = 0; j < 5; ++j) x.col(j) *= std::pow(3.0, 4 - j);
  const auto full = pca_fit(x, 1.0);
  for (double target : {0.5, 0.8, 0.9, 0.99}) {
    const auto m = pca_fit(x, target);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < m.k(); ++i) cum += full.explained_variance_ratio(i);
    CHECK(cum >= target - 1e-12);
    CHECK(cum - full.explained_variance_ratio(m.k() - 1) < target);
  }
  for (Eigen::Index i = 1; i < full.k(); ++i)
    CHECK(full.explained_variance_ratio(i) <= full.explained_variance_ratio(i - 1));
  const Matrix z = pca_apply(full, x);
  CHECK(z.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(pca_fit(Matrix::Ones(5, 3), 0.9), NumericError);
  CHECK_THROWS_AS(pca_fit(x, 0.0), SpecError);
  CHECK_THROWS_AS(pca_fit(x.topRows(1), 0.9), NumericError);
}

TEST_CASE("feature cache round-trips bit-exactly and rejects stale files") {
  testing::TempDir dir("feature_cache");
  const FeatureCache cache(dir.path(), 77);
  const auto t = one_trial({Modality::Eeg});
  const auto opts = small_eeg();
  const auto key = cache.key(t.key(), Modality::Eeg, opts);
  CHECK(key != cache.key(t.key(), Modality::Gaze, opts));
  CHECK(key != FeatureCache(dir.path(), 78).key(t.key(), Modality::Eeg, opts));
  CHECK(!cache.load(key));

  const auto built = cache.get_or_build(t, Modality::Eeg, opts);
  const auto loaded = cache.load(key);
  REQUIRE(loaded);
  CHECK(loaded->values == built.series.values);
  CHECK(loaded->start_time_s == built.series.start_time_s);
  CHECK(cache.get_or_build(t, Modality::Eeg, opts).series.values == built.series.values);

  {
    std::fstream f(cache.path_for(key), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(6);
    f.put('\x7f');
  }
  CHECK(!cache.load(key));
  std::ofstream(cache.path_for(key), std::ios::trunc) << "HOFC";
  CHECK(!cache.load(key));
}
