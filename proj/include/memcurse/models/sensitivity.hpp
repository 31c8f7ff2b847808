#pragma once

#include <cstddef>

#include "memcurse/models/cells.hpp"
#include "memcurse/stochastic/process.hpp"

namespace memcurse::models {

/// Root-mean-square (over sequences) norms at step `horizon` of the three
/// factors of dh_t/dA = ∂h_t/∂P·∂P/∂A + P·dh_t^diag/dλ·∂λ/∂A + P·dh_t^diag/dP⁻¹·∂P⁻¹/∂A,
/// excluding the ∂·/∂A factors:
///   p_term      = ‖∂h_t/∂P‖_F = √n ‖h_t^diag‖
///   lambda_term = ‖dh_t^diag/dλ‖, s_t = λ⊙s_{t-1} + h_{t-1}^diag
///   p_inv_term  = ‖dh_t^diag/dP⁻¹‖_F, r_t,ij = λ_i r_{t-1,ij} + (B x_t)_j
struct SensitivityNorms {
  double p_term = 0.0;
  double lambda_term = 0.0;
  double p_inv_term = 0.0;
};

SensitivityNorms sensitivity_decomposition(const DenseLinearSSM& ssm,
                                           const stochastic::SequenceBatch& inputs,
                                           std::size_t horizon);

}  // namespace memcurse::models
