#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/MatrixFunctions>

#include "tshift/errors.hpp"

namespace tshift {

inline Eigen::VectorXcd spectrum_of(const Eigen::MatrixXd& M) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(M, false).eigenvalues();
}

// Fractional powers M^x = exp(x Log M) with the principal logarithm.
// Diagonalizable matrices go through their eigendecomposition; otherwise a
// Schur-based dense logarithm is used.  A spectrum touching the closed
// negative real axis is rejected when the matrix is defective there, since the
// principal branch is then undefined.
class MatrixPower {
 public:
  explicit MatrixPower(const Eigen::MatrixXd& M) : n_(M.rows()) {
    const Eigen::MatrixXcd Mc = M.cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Mc, true);
    vals_ = es.eigenvalues();

    double vmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    bool on_cut = false;
    for (Eigen::Index i = 0; i < vals_.size(); ++i) {
      const double a = std::abs(vals_(i));
      vmax = std::max(vmax, a);
      vmin = std::min(vmin, a);
      if (vals_(i).real() < 0.0 && std::abs(vals_(i).imag()) <= 1e-12 * a) on_cut = true;
    }
    if (!(vmin > 1e-14 * std::max(1.0, vmax)))
      throw SingularMatrixError("monodromy matrix is singular; no logarithm exists");

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const double rcond = sv(sv.size() - 1) / sv(0);
    diagonalizable_ = rcond > 1e-9;
    if (diagonalizable_) {
      V_ = es.eigenvectors();
      Vinv_ = V_.inverse();
    } else if (on_cut) {
      throw LogBranchError(
          "matrix has a defective eigenvalue on the closed negative real axis; "
          "the principal logarithm is undefined");
    } else {
      logM_ = Mc.log();
    }
  }

  Eigen::Index dim() const { return n_; }
  const Eigen::VectorXcd& eigenvalues() const { return vals_; }

  Eigen::MatrixXcd pow(double x) const {
    if (diagonalizable_) {
      Eigen::VectorXcd px(vals_.size());
      for (Eigen::Index i = 0; i < vals_.size(); ++i) px(i) = std::pow(vals_(i), x);
      return V_ * px.asDiagonal() * Vinv_;
    }
    return Eigen::MatrixXcd(x * logM_).exp();
  }

  Eigen::MatrixXcd log() const {
    if (!diagonalizable_) return logM_;
    Eigen::VectorXcd lg(vals_.size());
    for (Eigen::Index i = 0; i < vals_.size(); ++i) lg(i) = std::log(vals_(i));
    return V_ * lg.asDiagonal() * Vinv_;
  }

 private:
  Eigen::Index n_;
  bool diagonalizable_ = false;
  Eigen::VectorXcd vals_;
  Eigen::MatrixXcd V_, Vinv_;
  Eigen::MatrixXcd logM_;
};

inline Eigen::MatrixXcd matrix_power(const Eigen::MatrixXd& M, double x) {
  return MatrixPower(M).pow(x);
}

}  // namespace tshift
