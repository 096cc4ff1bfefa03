#include "bergext/linalg.hpp"

#include <cmath>
#include <limits>

#include "bergext/types.hpp"

namespace bergext {

HermitianFactor::HermitianFactor(const Matrix& h) {
  const Eigen::Index n = h.rows();
  scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = h(i, i).real();
    if (!(d > 0.0) || !std::isfinite(d)) throw DegeneracyError("HermitianFactor: non-positive diagonal entry");
    scale_(i) = 1.0 / std::sqrt(d);
  }
  Matrix a = scale_.asDiagonal() * h * scale_.asDiagonal();
  a = 0.5 * (a + a.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) throw DegeneracyError("HermitianFactor: eigensolver failed");
  lambda_ = eig.eigenvalues();
  vectors_ = eig.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) {
    auto col = vectors_.col(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        col *= std::conj(col(i)) / std::abs(col(i));
        break;
      }
    }
  }
  if (n > 0 && !(lambda_(0) > 0.0))
    throw DegeneracyError("HermitianFactor: matrix is not positive definite");
  c_ = scale_.asDiagonal() * vectors_ * lambda_.cwiseSqrt().cwiseInverse().asDiagonal();
}

Vector HermitianFactor::solve(const Vector& b) const { return c_ * (c_.adjoint() * b); }

Matrix HermitianFactor::solve(const Matrix& b) const { return c_ * (c_.adjoint() * b); }

Matrix HermitianFactor::inverse() const { return c_ * c_.adjoint(); }

double HermitianFactor::scaled_condition() const {
  if (lambda_.size() == 0) return 1.0;
  return lambda_(lambda_.size() - 1) / lambda_(0);
}

double hermitian_condition(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0) return 1.0;
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

double hermitian_defect(const Matrix& h) {
  const double scale = h.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace bergext
