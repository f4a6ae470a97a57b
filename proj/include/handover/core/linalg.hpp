#pragma once

#include "handover/core/types.hpp"

namespace handover {

/// X Xᵀ for a [n x D] matrix, accumulated row by row with the active SIMD backend.
/// Used by the dual (n < D) solves in PCA and LDA.
Matrix gram_rows(const Matrix& x);

}  // namespace handover
