#pragma once

#include <Eigen/Dense>

namespace conslab {

// V(x) = sum_i (x_i - x_ave)^2, computed as a centered sum of squares.
template <typename Derived>
[[nodiscard]] double disagreement(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) return 0.0;
  const double mean = x.mean();
  return (x.array() - mean).square().sum();
}

}  // namespace conslab
