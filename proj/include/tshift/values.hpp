#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace tshift {

// The pointwise norm used throughout: max row sum for matrices, which
// restricts to the max absolute component for (column) vectors, and the plain
// magnitude for scalars.
inline double max_abs(double v) { return std::abs(v); }

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.derived().cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace tshift
