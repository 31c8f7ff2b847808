#include "memcurse/analytic/loss.hpp"

#include <cmath>

#include "memcurse/errors.hpp"
#include "memcurse/stochastic/double_sum.hpp"

namespace memcurse::analytic {

namespace {

void check_pair(complex a, complex b) {
  if (1.0 - std::norm(a) < kPoleTolerance || 1.0 - std::norm(b) < kPoleTolerance)
    throw DivergenceError("1D loss requires |lambda| < 1");
}

}  // namespace

double loss_1d(complex l, complex ls, double rho) {
  check_pair(l, ls);
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("loss_1d: rho must lie in [0, 1]");
  if (rho == 1.0) {
    if (std::abs(1.0 - l) < kPoleTolerance || std::abs(1.0 - ls) < kPoleTolerance)
      throw DivergenceError("loss_1d: constant input at lambda = 1");
    return 0.5 * std::norm(1.0 / (1.0 - l) - 1.0 / (1.0 - ls));
  }
  if (std::abs(1.0 - std::conj(l) * ls) < kPoleTolerance)
    throw DivergenceError("loss_1d: 1 - conj(lambda) lambda* ~ 0");
  if (rho == 0.0) {
    return 0.5 * (1.0 / (1.0 - std::norm(l)) + 1.0 / (1.0 - std::norm(ls)) -
                  2.0 * (1.0 / (1.0 - l * std::conj(ls))).real());
  }
  const auto u = stochastic::lag_function(stochastic::AutocorrelationModel::exp_decay(rho));
  using stochastic::geometric_double_sum;
  const complex hh = geometric_double_sum(l, std::conj(l), u);
  const complex ss = geometric_double_sum(ls, std::conj(ls), u);
  const complex hs = geometric_double_sum(l, std::conj(ls), u);
  const complex sh = geometric_double_sum(ls, std::conj(l), u);
  return 0.5 * (hh + ss - hs - sh).real();
}

double normalized_loss_1d(complex l, complex ls) {
  check_pair(l, ls);
  const complex q = 1.0 - std::conj(l) * ls;
  if (std::abs(q) < kPoleTolerance) throw DivergenceError("normalized_loss_1d: pole");
  const double g = std::sqrt(1.0 - std::norm(l));
  const double gs = std::sqrt(1.0 - std::norm(ls));
  return 1.0 - (g * gs / q).real();
}

std::pair<double, double> normalized_loss_1d_polar_gradient(double nu, double theta,
                                                            complex ls) {
  const complex l = std::polar(nu, theta);
  check_pair(l, ls);
  const double g = std::sqrt(1.0 - nu * nu);
  const double gs = std::sqrt(1.0 - std::norm(ls));
  // z = conj(λ)λ*, f = Re 1/(1-z).
  const complex unit_conj = std::polar(1.0, -theta);
  const complex z = std::conj(l) * ls;
  const complex q = 1.0 - z;
  if (std::abs(q) < kPoleTolerance) throw DivergenceError("normalized_loss_1d: pole");
  const double f = (1.0 / q).real();
  const complex dz_dnu = unit_conj * ls;
  const double dnu = -gs * (-nu / g * f + g * (dz_dnu / (q * q)).real());
  const double dtheta = -g * gs * (z / (q * q)).imag();
  return {dnu, dtheta};
}

}  // namespace memcurse::analytic
