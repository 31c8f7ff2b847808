#pragma once

#include <string>
#include <vector>

#include "memcurse/models/cells.hpp"
#include "memcurse/stochastic/rng.hpp"

namespace memcurse::models {

struct GroupCheck {
  std::string label;
  double relative_error = 0.0;  ///< ‖analytic - fd‖ / max(‖fd‖, ‖analytic‖)
  double analytic_norm = 0.0;
};

/// Compares backward() with central finite differences of Σ_t e_tᵀ y_t.
/// Stop-gradient normalizations are honored by freezing γ at its unperturbed
/// value during the perturbed forward passes.
std::vector<GroupCheck> check_gradients(const RecurrentCell& cell, const TimeSeries& inputs,
                                        const TimeSeries& output_errors, double step = 1e-5);

/// Random small instance of a cell kind ("dense", "block_diagonal",
/// "complex_diagonal", "lru", "lstm") with all |λ| <= max_radius.
RecurrentCell random_cell(const std::string& kind, Eigen::Index n, Eigen::Index input_dim,
                          Eigen::Index output_dim, double max_radius, stochastic::RngStream& rng);

/// Gaussian time-major series of shape length x (dim x batch).
TimeSeries random_series(std::size_t length, Eigen::Index dim, Eigen::Index batch,
                         stochastic::RngStream& rng);

}  // namespace memcurse::models
