#pragma once

#include <Eigen/Dense>

namespace memcurse::models {

struct Diagonalization {
  Eigen::MatrixXcd P;      ///< unit-norm eigenvector columns
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd P_inv;
  int qr_iterations = 0;
};

/// A = P diag(λ) P⁻¹ via Householder-Hessenberg reduction, complex
/// Wilkinson-shifted QR for the eigenvalues, and inverse iteration for the
/// eigenvectors. For real input, conjugate eigenvalues are paired exactly
/// (adjacent, positive imaginary part first) with conjugate eigenvectors and
/// real eigenvalues get real eigenvectors. Eigenvalues are ordered by
/// decreasing magnitude.
///
/// Throws ConvergenceError if QR stalls or the reconstruction residual
/// exceeds `residual_tol` (relative Frobenius).
Diagonalization diagonalize(const Eigen::MatrixXd& A, double residual_tol = 1e-8);

/// Eigenvalues only (same QR iteration).
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A);

double spectral_radius(const Eigen::MatrixXd& A);

/// ‖P diag(λ) P⁻¹ - A‖_F / ‖A‖_F.
double reconstruction_residual(const Diagonalization& d, const Eigen::MatrixXd& A);

}  // namespace memcurse::models
