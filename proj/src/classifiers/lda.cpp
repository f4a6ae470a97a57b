#include "handover/classifiers/lda.hpp"

#include "handover/core/error.hpp"
#include "handover/core/linalg.hpp"
#include "handover/core/text.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace handover::classifiers {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LdaModel lda_fit(const Matrix& x, std::span<const int> y, double shrinkage, LdaSolver solver) {
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
    throw SpecError("LDA shrinkage " + text::format_double(shrinkage) + " outside [0, 1]");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw DimensionError("LDA: label count does not match rows");
  if (d < 1) throw DimensionError("LDA: no features");

  LdaModel m;
  m.shrinkage = shrinkage;
  m.class_means = Matrix::Zero(2, d);
  Eigen::Index count[2] = {0, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    if (c != 0 && c != 1) throw SpecError("LDA labels must be 0 or 1");
    m.class_means.row(c) += x.row(i);
    ++count[c];
  }
  if (count[0] == 0 || count[1] == 0) throw NumericError("LDA needs both classes in the training data");
  m.class_means.row(0) /= static_cast<double>(count[0]);
  m.class_means.row(1) /= static_cast<double>(count[1]);
  m.log_priors.resize(2);
  m.log_priors << std::log(static_cast<double>(count[0]) / n), std::log(static_cast<double>(count[1]) / n);

  Matrix centred(n, d);
  for (Eigen::Index i = 0; i < n; ++i) centred.row(i) = x.row(i) - m.class_means.row(y[static_cast<std::size_t>(i)]);
  const Vector diff = (m.class_means.row(1) - m.class_means.row(0)).transpose();

  const double trace_s = centred.squaredNorm() / static_cast<double>(n);
  const double ridge = shrinkage * trace_s / static_cast<double>(d);
  const double scale = (1.0 - shrinkage) / static_cast<double>(n);

  if (solver == LdaSolver::Auto) solver = d <= n ? LdaSolver::Primal : LdaSolver::Dual;
  if (solver == LdaSolver::Primal) {
    Matrix sigma = scale * (centred.transpose() * centred);
    sigma.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw NumericError("LDA pooled covariance is singular; increase shrinkage");
    }
    m.weights = llt.solve(diff);
  } else {
    if (!(ridge > 0.0)) throw NumericError("LDA dual solve needs positive shrinkage and nonzero within-class variance");
    // Sigma^-1 v = (v - Cᵀ (ridge/scale I + C Cᵀ)^-1 C v) / ridge
    Matrix inner = gram_rows(centred);
    if (scale > 0.0) {
      inner.diagonal().array() += ridge / scale;
      Eigen::LLT<Matrix> llt(inner);
      if (llt.info() != Eigen::Success) throw NumericError("LDA dual system is not positive definite");
      const Vector cv = centred * diff;
      m.weights = (diff - centred.transpose() * llt.solve(cv)) / ridge;
    } else {
      m.weights = diff / ridge;
    }
  }
  if (!m.weights.allFinite()) throw NumericError("LDA discriminant is not finite");
  const Vector mid = 0.5 * (m.class_means.row(0) + m.class_means.row(1)).transpose();
  m.bias = -mid.dot(m.weights) + m.log_priors(1) - m.log_priors(0);
  return m;
}

Vector lda_decision(const LdaModel& model, const Matrix& x) {
  if (x.cols() != model.dims()) {
    throw DimensionError("LDA fitted on " + std::to_string(model.dims()) + " features applied to " +
                         std::to_string(x.cols()));
  }
  return (x * model.weights).array() + model.bias;
}

Vector lda_predict_proba(const LdaModel& model, const Matrix& x) {
  return lda_decision(model, x).unaryExpr([](double z) { return sigmoid(z); });
}

}  // namespace handover::classifiers
