#pragma once

#include "handover/core/types.hpp"

namespace handover::features {

struct PcaModel {
  Vector mean;                     // [D]
  Matrix components;               // [k x D], orthonormal rows
  Vector explained_variance_ratio; // [k], nonincreasing

  Eigen::Index dims() const { return mean.size(); }
  Eigen::Index k() const { return components.rows(); }
};

/// Principal axes of the centred data, keeping the fewest components whose cumulative
/// explained variance reaches `variance_target`. Components with numerically zero
/// variance are never kept, so k <= rank. Each component is signed so that its
/// largest-magnitude entry is positive.
/// Throws NumericError for n < 2 or data with no variance, SpecError for a bad target.
PcaModel pca_fit(const Matrix& x, double variance_target);

/// (X - mean) componentsᵀ, [n x k].
Matrix pca_apply(const PcaModel& model, const Matrix& x);

}  // namespace handover::features
