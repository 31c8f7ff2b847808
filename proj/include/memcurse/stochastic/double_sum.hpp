#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include "memcurse/stochastic/process.hpp"

namespace memcurse::stochastic {

/// Symmetric lag function u_Δ = u_{-Δ}, evaluated for Δ >= 0, with a bound on
/// sup |u| used by the truncation rule.
struct LagFunction {
  std::function<double(std::size_t)> value;
  double sup = 1.0;
};

LagFunction lag_function(const AutocorrelationModel& model);

inline constexpr double kDefaultSeriesTol = 1e-12;

/// Σ_{n,m>=0} α^n β^m u_{n-m} = (u_0 + Σ_{Δ>=1}(α^Δ + β^Δ) u_Δ) / (1 - αβ).
std::complex<double> geometric_double_sum(std::complex<double> alpha, std::complex<double> beta,
                                          const LagFunction& u, double tol = kDefaultSeriesTol);

/// Σ_{n,m>=0} n m α^{n-1} β^{m-1} u_{n-m}, i.e. ∂α∂β of the sum above.
std::complex<double> weighted_double_sum(std::complex<double> alpha, std::complex<double> beta,
                                         const LagFunction& u, double tol = kDefaultSeriesTol);

/// Σ_{n,m>=0} n α^{n-1} β^m u_{n-m}, i.e. ∂α of the geometric sum.
std::complex<double> geometric_double_sum_dalpha(std::complex<double> alpha,
                                                 std::complex<double> beta, const LagFunction& u,
                                                 double tol = kDefaultSeriesTol);

/// Number of lag terms kept for a given contraction radius r and tolerance.
std::size_t truncation_length(double r, double sup, double tol, bool weighted);

}  // namespace memcurse::stochastic
