#include "helpers.hpp"

#include "handover/core/error.hpp"
#include "handover/evaluation/cv.hpp"
#include "handover/fusion/fusion.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace handover;
using namespace handover::fusion;

namespace {

FusionMember member(Rng& rng, Modality m, int n, Eigen::Index dims, double step, double signal) {
  FusionMember out;
  out.modality = m;
  const auto samples = static_cast<Eigen::Index>(std::llround(11.0 / step));
  for (int i = 0; i < n; ++i) {
    features::FeatureSequence s;
    s.modality = m;
    s.label = i % 2;
    s.trial_ref = {1, i + 1};
    Matrix v = testing::random_matrix(rng, samples, dims);
    for (Eigen::Index t = 0; t < samples; ++t)
      if (s.label && -5.0 + step * t >= 0.0) v(t, 0) += signal;
    s.series = TimeSeries(-5.0, step, v);
    out.seqs.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("late fusion weights follow training performance") {
  const std::vector<double> p{0.2, 0.8};
  const std::vector<double> perf{0.6, 0.9};
  const auto r = late_fuse(p, perf);
  CHECK(r.weights[0] == doctest::Approx(0.4));
  CHECK(r.weights[1] == doctest::Approx(0.6));
  CHECK(r.probability == doctest::Approx(0.56));
  CHECK(!r.equal_weight_fallback);

  const std::vector<double> zero{0.0, 0.0, 0.0};
  const std::vector<double> p3{0.1, 0.5, 0.9};
  const auto e = late_fuse(p3, zero);
  CHECK(e.equal_weight_fallback);
  CHECK(e.probability == doctest::Approx(0.5));

  CHECK_THROWS_AS(late_fuse(std::vector<double>{0.5}, std::vector<double>{0.5}), SpecError);
  CHECK_THROWS_AS(late_fuse(p, std::vector<double>{0.5, 1.2}), SpecError);
  CHECK_THROWS_AS(late_fuse(p, std::vector<double>{0.5, std::nan("")}), SpecError);
  CHECK_THROWS_AS(late_fuse(p, std::vector<double>{0.5}), DimensionError);
}

TEST_CASE("late fusion is a convex combination") {
  Rng rng(11);
  for (int rep = 0; rep < 5000; ++rep) {
    const auto n = static_cast<std::size_t>(2 + rng.below(4));
    std::vector<double> p(n), perf(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform(0.0, 1.0);
      perf[i] = rng.below(5) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
    }
    const auto r = late_fuse(p, perf);
    double wsum = 0.0, combo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r.weights[i] >= 0.0);
      wsum += r.weights[i];
      combo += r.weights[i] * p[i];
    }
    CHECK(std::abs(wsum - 1.0) <= 1e-12);
    CHECK(r.probability >= *std::min_element(p.begin(), p.end()));
    CHECK(r.probability <= *std::max_element(p.begin(), p.end()));
    CHECK(std::abs(r.probability - combo) <= 1e-15);
  }
}

TEST_CASE("early fusion concatenates in order") {
  Vector a(2), b(3);
  a << 1, 2;
  b << 3, 4, 5;
  const std::vector<Vector> parts{a, b};
  const Vector f = early_fuse(parts);
  REQUIRE(f.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(f(i) == i + 1);
}

TEST_CASE("fusion spec tags and validation") {
  FusionSpec s;
  s.modalities = {Modality::Motion, Modality::Eeg};
  CHECK(s.tag() == "late:eeg+motion");
  s.mode = FusionMode::Early;
  s.modalities.insert(Modality::Gaze);
  CHECK(s.tag() == "early:eeg+gaze+motion");
  CHECK_NOTHROW(s.validate());
  s.eeg_pca_target = 1.5;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s.eeg_pca_target = 0.99;
  s.modalities = {Modality::Gaze};
  CHECK_THROWS_AS(s.validate(), SpecError);
}

TEST_CASE("early fusion reduces the EEG part and keeps the rest") {
  Rng rng(12);
  const std::vector<FusionMember> members{member(rng, Modality::Eeg, 40, 6, 0.05, 2.0),
                                          member(rng, Modality::Motion, 40, 3, 0.2, 2.0)};
  const std::vector<int> y = [&] {
    std::vector<int> out;
    for (const auto& s : members[0].seqs) out.push_back(s.label);
    return out;
  }();
  const auto splits = evaluation::make_splits(y, evaluation::CvScheme::repeated(5, 1, 1));
  FusionSpec spec;
  spec.mode = FusionMode::Early;
  spec.modalities = {Modality::Eeg, Modality::Motion};
  Eigen::Index dims = 0;
  const double auc = early_fusion_split(members, 1.0, splits[0], spec, {}, &dims);
  // Motion contributes 30 samples x 3; EEG is reduced below the training-fold size.
  CHECK(dims > 90);
  CHECK(dims <= 90 + static_cast<Eigen::Index>(splits[0].train.size()));
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
  const double late = late_fusion_split(members, 2.0, splits[0], spec);
  CHECK(late > 0.9);
}

TEST_CASE("fusion jobs reject mismatched members") {
  Rng rng(13);
  auto a = member(rng, Modality::Gaze, 20, 2, 0.04, 1.0);
  auto b = member(rng, Modality::Motion, 20, 3, 0.2, 1.0);
  FusionSpec spec;
  spec.modalities = {Modality::Gaze, Modality::Motion};
  const auto scheme = evaluation::CvScheme::repeated(5, 1, 1);
  CHECK_NOTHROW(make_fusion_job(1, {a, b}, spec, scheme));
  CHECK_THROWS_AS(make_fusion_job(1, {a}, spec, scheme), SpecError);
  b.seqs.pop_back();
  CHECK_THROWS_AS(make_fusion_job(1, {a, b}, spec, scheme), DimensionError);
  b.seqs.push_back(a.seqs.back());
  b.seqs.back().trial_ref.trial_id = 99;
  CHECK_THROWS_AS(make_fusion_job(1, {a, b}, spec, scheme), DimensionError);
}

TEST_CASE("late fusion sweep improves after the signal starts") {
  Rng rng(14);
  FusionSpec spec;
  spec.modalities = {Modality::Gaze, Modality::Motion};
  features::WindowGrid grid;
  grid.first_end = -1.0;
  grid.last_end = 2.0;
  grid.step = 1.0;
  const auto tl = run_fusion_sweep({member(rng, Modality::Gaze, 40, 2, 0.04, 1.5), member(rng, Modality::Motion, 40, 3, 0.2, 1.5)},
                                   spec, evaluation::CvScheme::repeated(5, 1, 2), {grid, 2});
  REQUIRE(tl.windows.size() == 4);
  CHECK(tl.tag == "late:gaze+motion");
  CHECK(tl.windows[3].mean > tl.windows[0].mean);
  CHECK(tl.windows[3].mean > 0.85);
}
