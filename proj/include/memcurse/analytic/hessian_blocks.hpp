#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>

#include "memcurse/analytic/eigenvalue.hpp"
#include "memcurse/analytic/parametrization.hpp"

namespace memcurse::analytic {

/// Loss-Hessian block at optimality of y = Re[cᵀh] + d x, h_{t+1} = λ⊙h_t + b x_{t+1},
/// in coordinates (Re λ_i, Im λ_i) x (Re λ_j, Im λ_j).
Eigen::Matrix2d hessian_block_ri(std::size_t i, std::size_t j, std::span<const complex> b,
                                 std::span<const complex> c, std::span<const complex> lambda,
                                 double rho);

/// Same block in coordinates (ω_ν, ω_θ); ω values are recovered by inverting
/// the parametrizations at the given λ.
Eigen::Matrix2d hessian_block_polar(std::size_t i, std::size_t j, std::span<const complex> b,
                                    std::span<const complex> c, std::span<const complex> lambda,
                                    const Parametrization& param_nu,
                                    const Parametrization& param_theta, double rho);

/// Σ_i |b_i|²|c_i|² S(λ_i, λ̄_i).
double lambda_hessian_trace(std::span<const complex> b, std::span<const complex> c,
                            std::span<const complex> lambda, double rho);

/// Full 2n x 2n matrix ordered [Re λ_1..Re λ_n, Im λ_1..Im λ_n].
Eigen::MatrixXd full_hessian_ri(std::span<const complex> b, std::span<const complex> c,
                                std::span<const complex> lambda, double rho);

/// Full 2n x 2n matrix ordered [ω_ν,1..ω_ν,n, ω_θ,1..ω_θ,n].
Eigen::MatrixXd full_hessian_polar(std::span<const complex> b, std::span<const complex> c,
                                   std::span<const complex> lambda,
                                   const Parametrization& param_nu,
                                   const Parametrization& param_theta, double rho);

}  // namespace memcurse::analytic
