#include "helpers.hpp"

#include "handover/classifiers/lda.hpp"
#include "handover/classifiers/lstm.hpp"
#include "handover/classifiers/trained.hpp"
#include "handover/core/error.hpp"
#include "handover/evaluation/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace handover;
using namespace handover::classifiers;

namespace {

std::pair<Matrix, std::vector<int>> two_blobs(Rng& rng, int n, int d, double sep) {
  Matrix x = testing::random_matrix(rng, n, d);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : 0;
    if (y[static_cast<std::size_t>(i)]) x(i, 0) += sep;
  }
  return {x, y};
}

}  // namespace

TEST_CASE("one-dimensional LDA matches the closed form") {
  // With D = 1 the shrinkage target equals S, so Sigma = S for every lambda.
  Matrix x(6, 1);
  x << 1, 2, 3, 5, 6, 10;
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const double m0 = 2.0, m1 = 7.0;
  const double s = ((1 + 0 + 1) + (4 + 1 + 9)) / 6.0;
  for (double lambda : {0.0, 0.3, 1.0}) {
    const auto model = lda_fit(x, y, lambda);
    CHECK(model.weights(0) == doctest::Approx((m1 - m0) / s));
    CHECK(model.bias == doctest::Approx(-(m0 + m1) / 2 * (m1 - m0) / s));
  }
  const std::vector<int> y_unbalanced{0, 0, 0, 0, 1, 1};
  const auto m = lda_fit(x, y_unbalanced, 0.0);
  CHECK(m.log_priors(1) - m.log_priors(0) == doctest::Approx(std::log(2.0 / 4.0)));
}

TEST_CASE("LDA posterior equals the ratio of shared-covariance Gaussian densities") {
  Rng rng(4);
  auto [x, y] = two_blobs(rng, 60, 4, 1.5);
  const double lambda = 0.2;
  const auto model = lda_fit(x, y, lambda);
  // Independent reconstruction with an explicit inverse.
  Vector mu[2] = {Vector::Zero(4), Vector::Zero(4)};
  int cnt[2] = {0, 0};
  for (int i = 0; i < 60; ++i) {
    mu[y[i]] += x.row(i).transpose();
    ++cnt[y[i]];
  }
  mu[0] /= cnt[0];
  mu[1] /= cnt[1];
  Matrix s = Matrix::Zero(4, 4);
  for (int i = 0; i < 60; ++i) {
    const Vector r = x.row(i).transpose() - mu[y[i]];
    s += r * r.transpose();
  }
  s /= 60.0;
  const Matrix sigma = (1 - lambda) * s + lambda * s.trace() / 4.0 * Matrix::Identity(4, 4);
  const Matrix inv = sigma.inverse();
  const Vector p = lda_predict_proba(model, x);
  for (int i = 0; i < 60; ++i) {
    const Vector v = x.row(i).transpose();
    const double l1 = -0.5 * (v - mu[1]).dot(inv * (v - mu[1])) + std::log(cnt[1] / 60.0);
    const double l0 = -0.5 * (v - mu[0]).dot(inv * (v - mu[0])) + std::log(cnt[0] / 60.0);
    CHECK(p(i) == doctest::Approx(1.0 / (1.0 + std::exp(l0 - l1))).epsilon(1e-9));
  }
}

TEST_CASE("primal and dual LDA solvers agree") {
  Rng rng(5);
  for (int d : {5, 80}) {
    auto [x, y] = two_blobs(rng, 30, d, 2.0);
    for (double lambda : {1e-4, 0.1, 0.9}) {
      const auto p = lda_fit(x, y, lambda, LdaSolver::Primal);
      const auto q = lda_fit(x, y, lambda, LdaSolver::Dual);
      CHECK((p.weights - q.weights).norm() <= 1e-7 * p.weights.norm());
      CHECK(p.bias == doctest::Approx(q.bias).epsilon(1e-7));
    }
  }
}

TEST_CASE("LDA input validation") {
  Rng rng(6);
  auto [x, y] = two_blobs(rng, 20, 3, 1.0);
  const std::vector<int> one_class(20, 1);
  CHECK_THROWS_AS(lda_fit(x, one_class), NumericError);
  CHECK_THROWS_AS(lda_fit(x, y, 1.5), SpecError);
  CHECK_THROWS_AS(lda_fit(x, std::vector<int>(5, 0)), DimensionError);
  Matrix wide = testing::random_matrix(rng, 10, 40);
  std::vector<int> yw(10, 0);
  yw[0] = yw[1] = 1;
  CHECK_THROWS_AS(lda_fit(wide, yw, 0.0, LdaSolver::Primal), NumericError);
  // Posteriors stay finite for extreme inputs.
  const auto model = lda_fit(x, y);
  Matrix far = Matrix::Constant(2, 3, 1e300);
  far(1, 0) = -1e300;
  CHECK(lda_predict_proba(model, far).allFinite());
}

TEST_CASE("LSTM parameter layout") {
  LstmSpec s;
  s.layers = 2;
  s.hidden = 3;
  s.input_dim = 2;
  const std::size_t expect = 4 * 3 * (2 + 3 + 1) + 4 * 3 * (3 + 3 + 1) + 3 + 1;
  CHECK(s.parameter_count() == expect);
  const LstmLayout layout(s);
  CHECK(layout.total == expect);
  CHECK(layout.layers[1].input_dim == 3);
  CHECK(lstm_forward(LstmModel::zeros(s), Matrix::Ones(4, 2)) == 0.5);
  const auto init = LstmModel::initialize(s);
  // Forget-gate biases start at one.
  for (std::size_t h = 0; h < 3; ++h) CHECK(init.parameters[layout.layers[0].bias + 3 + h] == 1.0);
  LstmSpec bad = s;
  bad.hidden = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  CHECK(LstmSpec::eeg_recipe(36).hidden == 128);
  CHECK(!LstmSpec::eeg_recipe(36).early_stop_after);
  CHECK(LstmSpec::gaze_motion_recipe(2).layers == 2);
}

TEST_CASE("BPTT gradients match central differences") {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    LstmSpec s;
    s.layers = 1 + static_cast<int>(rng.below(2));
    s.hidden = 2 + static_cast<int>(rng.below(3));
    s.input_dim = 1 + static_cast<int>(rng.below(3));
    s.seed = rng.next_u64();
    auto model = LstmModel::initialize(s);
    for (auto& p : model.parameters) p += 0.3 * rng.normal();
    std::vector<Matrix> seqs;
    SequenceBatch batch;
    for (int i = 0; i < 3; ++i) seqs.push_back(testing::random_matrix(rng, 2 + static_cast<Eigen::Index>(rng.below(5)), s.input_dim));
    for (int i = 0; i < 3; ++i) {
      batch.sequences.push_back(&seqs[static_cast<std::size_t>(i)]);
      batch.labels.push_back(i % 2);
    }
    const auto r = gradient_check(model, batch);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("LSTM training separates an easy problem") {
  Rng rng(8);
  auto make = [&](int n, std::vector<Matrix>& xs, std::vector<int>& ys) {
    for (int i = 0; i < n; ++i) {
      const int y = i % 2;
      Matrix m = testing::random_matrix(rng, 6, 2) * 0.5;
      if (y) m.col(0).array() += 1.0;
      xs.push_back(m);
      ys.push_back(y);
    }
  };
  std::vector<Matrix> tx, vx;
  std::vector<int> ty, vy;
  make(60, tx, ty);
  make(30, vx, vy);
  auto spec = LstmSpec::gaze_motion_recipe(2);
  spec.max_epochs = 40;
  spec.learning_rate = 0.01;
  spec.seed = 1;
  LstmTrainReport report;
  const auto model = lstm_train(spec, tx, ty, vx, vy, &report);
  CHECK(report.epochs_run == 40);
  REQUIRE(report.best_epoch > 0);
  CHECK(report.val_loss[static_cast<std::size_t>(report.best_epoch - 1)] == report.best_val_loss);
  std::vector<double> scores;
  for (const auto& m : vx) scores.push_back(lstm_forward(model, m));
  CHECK(evaluation::auc_roc(scores, vy) > 0.9);
  // Same seed, same model.
  CHECK(lstm_train(spec, tx, ty, vx, vy).parameters == model.parameters);

  std::vector<Matrix> broken = tx;
  broken[0](0, 0) = std::nan("");
  try {
    lstm_train(spec, broken, ty, vx, vy);
    FAIL("NaN input trained");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    CHECK(std::string(e.what()).find("learning rate") != std::string::npos);
  }
  CHECK_THROWS_AS(lstm_train(spec, tx, std::vector<int>(60, 1), vx, vy), NumericError);
}

TEST_CASE("ensemble weights") {
  const std::vector<double> scores{0.5, 1.5, 0.0};
  const auto w = normalize_weights(scores);
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.75);
  CHECK(w[2] == 0.0);
  const auto eq = normalize_weights(std::vector<double>{0.0, 0.0});
  CHECK(eq[0] == 0.5);
  CHECK_THROWS_AS(normalize_weights(std::vector<double>{-0.1, 1.0}), SpecError);
}

TEST_CASE("models round-trip through the binary format bit-exactly") {
  Rng rng(9);
  auto [x, y] = two_blobs(rng, 30, 4, 1.0);
  TrainedClassifier lda;
  lda.model = lda_fit(x, y);
  lda.preprocessing.standardizer = dsp::Standardizer::fit(x);
  lda.preprocessing.pca = features::pca_fit(lda.preprocessing.standardizer->apply(x), 0.9);

  LstmSpec s = LstmSpec::gaze_motion_recipe(4);
  s.seed = 3;
  TrainedClassifier ens;
  ens.model = std::vector<LstmMember>{{LstmModel::initialize(s), 0.4}, {LstmModel::initialize(LstmSpec::gaze_motion_recipe(4)), 0.6}};

  for (const auto* m : {&lda, &ens}) {
    std::stringstream buf;
    save_model(buf, *m);
    const auto back = load_model(buf);
    std::vector<features::FeatureSequence> seqs(3);
    for (auto& q : seqs) q.series = TimeSeries(0.0, 1.0, testing::random_matrix(rng, 1, 4));
    const Vector a = m->predict(seqs), b = back.predict(seqs);
    CHECK(a == b);
    CHECK(back.is_lda() == m->is_lda());
  }
  std::stringstream junk("HOMDxx");
  CHECK_THROWS_AS(load_model(junk), DataError);
}
