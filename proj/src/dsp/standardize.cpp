#include "handover/dsp/standardize.hpp"

#include "handover/core/error.hpp"

#include <cmath>

namespace handover::dsp {

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() < 1) throw NumericError("cannot fit standardization on an empty matrix");
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.scale(c) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(c))) ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply_in_place(Matrix& x) const {
  if (x.cols() != mean.size()) {
    throw DimensionError("standardizer fitted on " + std::to_string(mean.size()) +
                         " columns applied to " + std::to_string(x.cols()));
  }
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    x.col(c) = (x.col(c).array() - mean(c)) / scale(c);
  }
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  apply_in_place(out);
  return out;
}

std::pair<Matrix, Standardizer> standardize(const Matrix& x, const std::optional<Standardizer>& stats) {
  Standardizer s = stats ? *stats : Standardizer::fit(x);
  Matrix out = s.apply(x);
  return {std::move(out), std::move(s)};
}

}  // namespace handover::dsp
