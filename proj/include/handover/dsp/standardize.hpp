#pragma once

#include "handover/core/types.hpp"

#include <optional>
#include <utility>

namespace handover::dsp {

/// Per-column location/scale fitted on training data only.
struct Standardizer {
  Vector mean;
  Vector scale;  // population std; 1 for constant columns

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_in_place(Matrix& x) const;
  Eigen::Index dims() const { return mean.size(); }
};

/// Fits on `x` when `stats` is empty, otherwise applies the given statistics unchanged.
std::pair<Matrix, Standardizer> standardize(const Matrix& x,
                                            const std::optional<Standardizer>& stats = std::nullopt);

}  // namespace handover::dsp
