#pragma once

#include <complex>
#include <cstddef>

#include "memcurse/stochastic/process.hpp"

namespace memcurse::stochastic {

struct VarianceEstimate {
  double hidden = 0.0;       ///< mean |h_T|²
  double sensitivity = 0.0;  ///< mean |dh_T/dλ|²
  std::size_t samples = 0;
};

/// T_burn = ceil(ln tol / ln r), at least 1; r = 0 needs a single step.
std::size_t burn_in_steps(double r, double tol = 1e-8);

/// Monte-Carlo estimate of E|h|² and E|dh/dλ|² for h_{t+1} = λ h_t + x_{t+1}
/// from `samples` independent sequences of burn_in + 1 steps, h_0 = 0; only
/// the last step is recorded. Sequence s draws from stream.child(s).
VarianceEstimate simulate_variances(std::complex<double> lambda, const AutocorrelationModel& model,
                                    std::size_t samples, std::size_t burn_in,
                                    const RngStream& stream);

}  // namespace memcurse::stochastic
