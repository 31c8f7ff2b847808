#include "memcurse/stochastic/simulate.hpp"

#include <cmath>

#include "memcurse/errors.hpp"

namespace memcurse::stochastic {

std::size_t burn_in_steps(double r, double tol) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("burn_in_steps: radius must lie in [0, 1)");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("burn_in_steps: tol must lie in (0, 1)");
  if (r == 0.0) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(r))));
}

VarianceEstimate simulate_variances(std::complex<double> lambda, const AutocorrelationModel& model,
                                    std::size_t samples, std::size_t burn_in,
                                    const RngStream& stream) {
  if (!(std::abs(lambda) < 1.0)) throw DomainError("simulate_variances: |lambda| must be < 1");
  if (samples < 1) throw DomainError("simulate_variances: samples must be >= 1");
  VarianceEstimate est;
  est.samples = samples;
  const std::size_t length = burn_in + 1;
  for (std::size_t s = 0; s < samples; ++s) {
    const SequenceBatch x = sample_wss_sequence(model, length, 1, 1, stream.child(s));
    std::complex<double> h = 0.0, dh = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
      dh = lambda * dh + h;
      h = lambda * h + x.data[t];
    }
    est.hidden += std::norm(h);
    est.sensitivity += std::norm(dh);
  }
  est.hidden /= static_cast<double>(samples);
  est.sensitivity /= static_cast<double>(samples);
  return est;
}

}  // namespace memcurse::stochastic
