#pragma once

#include <Eigen/Dense>

namespace bergext {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Eigendecomposition-based factorization of a Hermitian positive definite
/// matrix H, after symmetric diagonal equilibration S H S with
/// S = diag(H_ii^{-1/2}).
///
/// `orthonormal()` returns C = S V L^{-1/2}, so that C* H C = I and
/// H^{-1} = C C*. Eigenvector phases are fixed so that the first entry of
/// magnitude above 1e-12 is real positive, which makes C deterministic.
class HermitianFactor {
 public:
  HermitianFactor() = default;
  explicit HermitianFactor(const Matrix& h);

  [[nodiscard]] Vector solve(const Vector& b) const;
  [[nodiscard]] Matrix solve(const Matrix& b) const;
  [[nodiscard]] Matrix inverse() const;
  [[nodiscard]] const Matrix& orthonormal() const { return c_; }
  /// Eigenvalues of the equilibrated matrix, ascending.
  [[nodiscard]] const Eigen::VectorXd& scaled_eigenvalues() const { return lambda_; }
  [[nodiscard]] double scaled_condition() const;
  [[nodiscard]] Eigen::Index size() const { return c_.rows(); }

 private:
  Eigen::VectorXd scale_;
  Eigen::VectorXd lambda_;
  Matrix vectors_;
  Matrix c_;
};

/// 2-norm condition number of a Hermitian matrix from its eigenvalues.
double hermitian_condition(const Matrix& h);

/// max |h_ij - conj(h_ji)| / max |h_ij|.
double hermitian_defect(const Matrix& h);

}  // namespace bergext
