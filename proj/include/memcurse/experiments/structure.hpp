#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "memcurse/hessian/hessian.hpp"
#include "memcurse/models/cells.hpp"

namespace memcurse::experiments {

struct StructureConfig {
  Eigen::Index n = 4;
  double nu = 0.99;
  double theta0 = std::numbers::pi;
  std::size_t samples = 2000;
  double burn_in_tol = 1e-6;  ///< transient left at the probed step, relative
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// Gauss-Newton Hessians at an exact optimum. The teacher has sampled
/// conjugate eigenpairs; "dense" is the teacher itself, "diagonal" its
/// one-unit-per-eigenvalue complex form (same parameter count) and
/// "diagonal_reduced" the one-unit-per-pair form.
struct StructureComparison {
  models::DenseLinearSSM teacher;
  hessian::HessianReport dense, diagonal, diagonal_reduced;
  std::size_t burn_in = 0;
};

/// Teacher from RngStream(seed).child(0), inputs from child(1).
StructureComparison hessian_structure_comparison(const StructureConfig& cfg);

struct ConcentrationConfig {
  Eigen::Index n = 10;
  double nu = 0.99;
  std::vector<double> theta0 = {std::numbers::pi, std::numbers::pi / 4, std::numbers::pi / 16};
  std::size_t draws = 16;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

struct ConcentrationRow {
  double theta0 = 0.0;
  std::size_t draw = 0;
  double axis_alignment = 0.0;
  double mean_top_k_ipr = 0.0;
};

/// Analytic real/imaginary λ-Hessian at optimality for n eigenvalues with
/// magnitudes uniform on [ν, (1+ν)/2] and angles θ0·u, u uniform on [-1, 1],
/// b and c standard complex Gaussian. Draw k uses RngStream(seed).child(k);
/// magnitudes, u, b and c are shared across θ0 so only the spread changes.
std::vector<ConcentrationRow> eigenvalue_concentration(const ConcentrationConfig& cfg);

/// Mean axis alignment per θ0, in the order of cfg.theta0.
std::vector<double> mean_alignment_by_theta(const std::vector<ConcentrationRow>& rows,
                                            const std::vector<double>& theta0);

}  // namespace memcurse::experiments
