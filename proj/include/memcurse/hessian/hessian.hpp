#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>
#include <json.hpp>

#include "memcurse/models/cells.hpp"
#include "memcurse/stochastic/process.hpp"

namespace memcurse::hessian {

struct SymmetricEigen {
  Eigen::VectorXd values;   ///< descending
  Eigen::MatrixXd vectors;  ///< column k pairs with values(k)
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// tol·‖H‖_F. Throws ContractError if H deviates from symmetry by more than
/// 1e-8 (relative to its largest entry) and ConvergenceError after 100 sweeps.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& H, double tol = 1e-10);

/// (Σ v²)² / Σ v⁴; 1 for a canonical vector, p for a uniform one.
double inverse_participation_ratio(const Eigen::VectorXd& v);

struct DiagonalityMetrics {
  std::vector<double> top_k_ipr;  ///< IPR of the leading eigenvectors, largest eigenvalue first
  double axis_alignment = 0.0;    ///< Σ_k |H_kk| / Σ_{k,l} |H_kl|
  double mean_top_k_ipr() const;
};

struct HessianReport {
  Eigen::MatrixXd matrix;
  std::vector<std::string> param_labels;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  DiagonalityMetrics metrics;
  double residual_rms = 0.0;  ///< student - teacher output RMS at the probed step
  std::size_t samples = 0;

  /// Sub-matrix over the given parameter-group label (e.g. "lambda.re").
  std::vector<Eigen::Index> indices_of(const std::string& group) const;
};

/// Fills eigenpairs and metrics for a symmetric matrix.
HessianReport make_report(Eigen::MatrixXd matrix, std::vector<std::string> labels,
                          std::size_t top_k = 10);

DiagonalityMetrics diagonality_metrics(const HessianReport& report, std::size_t top_k = 10);

/// Σ_k J_k J_kᵀ averaged over sequences, with J_k the exact BPTT gradient of
/// output k at step `burn_in` (the first burn_in inputs warm the state up).
/// Sequences are reduced in fixed chunks, so the result does not depend on
/// `jobs`. Throws OverflowError naming the parameters with non-finite rows.
HessianReport gauss_newton_hessian(const models::RecurrentCell& student,
                                   const models::RecurrentCell& teacher,
                                   const stochastic::SequenceBatch& batch, std::size_t burn_in,
                                   unsigned jobs = 1);

/// Smallest t with max_radius^t <= tol (0 for a memoryless student).
std::size_t burn_in_length(double max_radius, double tol = 1e-8);

/// Adam state: raw second-moment estimate v (not bias corrected).
struct AdamProbe {
  Eigen::VectorXd second_moment;
  long step_count = 0;
  double alpha = 1e-3;
  double eps = 1e-8;
  double beta2 = 0.999;
};

/// α / (√v̂ + ε) with v̂ = v / (1 - β2^t): the step a unit gradient would take.
Eigen::VectorXd adam_effective_lr(const AdamProbe& probe);

nlohmann::json report_to_json(const HessianReport& report);

}  // namespace memcurse::hessian
