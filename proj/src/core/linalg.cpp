#include "handover/core/linalg.hpp"

#include "handover/simd/kernels.hpp"

namespace handover {

Matrix gram_rows(const Matrix& x) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rows = x;
  const Eigen::Index n = rows.rows();
  const auto d = static_cast<std::size_t>(rows.cols());
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* ri = rows.data() + i * rows.cols();
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = simd::dot({ri, d}, {rows.data() + j * rows.cols(), d});
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

}  // namespace handover
