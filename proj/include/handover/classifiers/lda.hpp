#pragma once

#include "handover/core/types.hpp"

#include <span>

namespace handover::classifiers {

/// Two-class linear discriminant with a shared, shrunk covariance
///   Sigma = (1 - lambda) S + lambda (tr S / D) I,   S = within-class scatter / n.
/// The fitted discriminant w = Sigma^-1 (m1 - m0) and offset b are kept instead of a
/// factor of Sigma: the posterior of class 1 is sigmoid(wᵀx + b), which is exactly the
/// softmax over the two log-Gaussian densities plus log priors.
struct LdaModel {
  Matrix class_means;  // [2 x D]
  Vector log_priors;   // [2]
  double shrinkage = 1e-4;
  Vector weights;      // [D]
  double bias = 0.0;

  Eigen::Index dims() const { return weights.size(); }
};

enum class LdaSolver {
  Auto,    // primal when D <= n, dual otherwise
  Primal,  // D x D Cholesky
  Dual,    // n x n Woodbury solve; needs shrinkage > 0
};

/// Throws NumericError for single-class labels or a singular covariance (e.g. zero
/// shrinkage with D > n), SpecError for shrinkage outside [0, 1].
LdaModel lda_fit(const Matrix& x, std::span<const int> y, double shrinkage = 1e-4,
                 LdaSolver solver = LdaSolver::Auto);

/// wᵀx + b per row: the log posterior odds of class 1.
Vector lda_decision(const LdaModel& model, const Matrix& x);
/// Class-1 posterior per row.
Vector lda_predict_proba(const LdaModel& model, const Matrix& x);

}  // namespace handover::classifiers
