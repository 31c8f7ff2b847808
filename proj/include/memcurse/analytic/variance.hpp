#pragma once

#include <utility>

#include "memcurse/analytic/eigenvalue.hpp"
#include "memcurse/analytic/parametrization.hpp"
#include "memcurse/stochastic/process.hpp"

namespace memcurse::analytic {

using stochastic::AutocorrelationModel;

/// Generating function G(α, β) = Σ_{n,m} α^n β^m R_x(n-m).
complex generating_function(complex alpha, complex beta, const AutocorrelationModel& model);
/// ∂G/∂α.
complex generating_function_dalpha(complex alpha, complex beta, const AutocorrelationModel& model);

/// E[|h_t|²] for h_{t+1} = λ h_t + x_{t+1}.
double hidden_variance(const Eigenvalue& lambda, const AutocorrelationModel& model);

/// E[|dh_t/dλ|²].
double sensitivity_variance(const Eigenvalue& lambda, const AutocorrelationModel& model);

/// E[|dh_t/dω|²] for h_{t+1} = λ h_t + γ x_{t+1}, λ moved by one parameter ω.
/// Magnitude kinds move ν at fixed θ; angle kinds move θ at fixed ν.
double normalized_sensitivity(const Eigenvalue& lambda, const NormalizationSpec& norm,
                              const Parametrization& param, const AutocorrelationModel& model);

/// (¼E|dh/dλ|²ν′², ¼E|dh/dλ|²ν²θ′²), Wirtinger convention.
std::pair<double, double> polar_sensitivity_split(const Eigenvalue& lambda, double nu_prime,
                                                  double theta_prime,
                                                  const AutocorrelationModel& model);

/// S(λi, λj) = Σ_{n,m} n m λi^{n-1} λj^{m-1} ρ^{|n-m|}.
complex s_kernel(complex lambda_i, complex lambda_j, double rho);

}  // namespace memcurse::analytic
