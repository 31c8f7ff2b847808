#pragma once

#include <utility>

#include "memcurse/analytic/eigenvalue.hpp"

namespace memcurse::analytic {

/// lim_t ½E|h_t - h*_t|² for one-dimensional filters driven by R_x(Δ)=ρ^|Δ|.
double loss_1d(complex lambda, complex lambda_star, double rho);

/// 1 - Re[γ(λ)γ(λ*)/(1 - λ̄λ*)], γ = √(1-|·|²), i.i.d. inputs.
double normalized_loss_1d(complex lambda, complex lambda_star);

/// (∂/∂ν, ∂/∂θ) of normalized_loss_1d at λ = ν e^{iθ}.
std::pair<double, double> normalized_loss_1d_polar_gradient(double nu, double theta,
                                                            complex lambda_star);

}  // namespace memcurse::analytic
