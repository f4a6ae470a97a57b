#include "handover/features/pca.hpp"

#include "handover/core/error.hpp"
#include "handover/core/linalg.hpp"
#include "handover/core/text.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace handover::features {

PcaModel pca_fit(const Matrix& x, double variance_target) {
  if (!(variance_target > 0.0) || variance_target > 1.0) {
    throw SpecError("PCA variance target " + text::format_double(variance_target) + " outside (0, 1]");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw NumericError("PCA needs at least two samples");

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Matrix centred = x.rowwise() - model.mean.transpose();

  // Eigenpairs of the covariance, largest first. With fewer samples than dimensions the
  // nonzero spectrum is obtained from the n x n Gram matrix instead.
  Vector eigval;
  Matrix axes;  // [D x m], unit columns
  if (d > n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram_rows(centred));
    eigval = es.eigenvalues().reverse() / static_cast<double>(n - 1);
    const Matrix u = es.eigenvectors().rowwise().reverse();
    axes = centred.transpose() * u;
    for (Eigen::Index j = 0; j < axes.cols(); ++j) {
      const double norm = axes.col(j).norm();
      if (norm > 0.0) axes.col(j) /= norm;
    }
  } else {
    const Matrix cov = centred.transpose() * centred / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    eigval = es.eigenvalues().reverse();
    axes = es.eigenvectors().rowwise().reverse();
  }

  eigval = eigval.cwiseMax(0.0);
  const double total = eigval.sum();
  if (!(total > 0.0)) throw NumericError("PCA input has zero variance");
  const double floor = 1e-12 * eigval(0);
  Eigen::Index positive = 0;
  while (positive < eigval.size() && eigval(positive) > floor) ++positive;

  Eigen::Index k = 0;
  double cumulative = 0.0;
  while (k < positive) {
    cumulative += eigval(k) / total;
    ++k;
    if (cumulative >= variance_target - 1e-12) break;
  }

  model.components.resize(k, d);
  model.explained_variance_ratio.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector axis = axes.col(j);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    model.components.row(j) = axis.transpose();
    model.explained_variance_ratio(j) = eigval(j) / total;
  }
  return model;
}

Matrix pca_apply(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.dims()) {
    throw DimensionError("PCA fitted on " + std::to_string(model.dims()) + " features applied to " +
                         std::to_string(x.cols()));
  }
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace handover::features
