#include "memcurse/analytic/variance.hpp"

#include <cmath>

#include "memcurse/errors.hpp"
#include "memcurse/stochastic/double_sum.hpp"

namespace memcurse::analytic {

using stochastic::AutocorrelationKind;

namespace {

void check_pole(complex denom, const char* what) {
  if (std::abs(denom) < kPoleTolerance) throw DivergenceError(std::string(what) + ": pole");
}

void check_stable(const Eigenvalue& lambda) {
  const double nu = lambda.magnitude();
  if (1.0 - nu * nu < kPoleTolerance) throw DivergenceError("|lambda| too close to 1");
}

}  // namespace

complex generating_function(complex a, complex b, const AutocorrelationModel& model) {
  if (auto rho = model.closed_form_rho()) {
    const double r = *rho;
    const complex q = 1.0 - a * b, qa = 1.0 - r * a, qb = 1.0 - r * b;
    check_pole(q, "generating_function");
    check_pole(qa * qb, "generating_function");
    return (1.0 - r * r * a * b) / (q * qa * qb);
  }
  return stochastic::geometric_double_sum(a, b, stochastic::lag_function(model));
}

complex generating_function_dalpha(complex a, complex b, const AutocorrelationModel& model) {
  if (auto rho = model.closed_form_rho()) {
    const double r = *rho;
    const complex g = generating_function(a, b, model);
    return g * (-r * r * b / (1.0 - r * r * a * b) + b / (1.0 - a * b) + r / (1.0 - r * a));
  }
  return stochastic::geometric_double_sum_dalpha(a, b, stochastic::lag_function(model));
}

double hidden_variance(const Eigenvalue& lambda, const AutocorrelationModel& model) {
  check_stable(lambda);
  const complex l = lambda.value();
  const double nu2 = std::norm(l);
  switch (model.kind()) {
    case AutocorrelationKind::IID: return 1.0 / (1.0 - nu2);
    case AutocorrelationKind::Constant:
      check_pole(1.0 - l, "hidden_variance");
      return 1.0 / std::norm(1.0 - l);
    case AutocorrelationKind::ExpDecay: {
      const double rho = model.rho();
      if (rho == 0.0) return 1.0 / (1.0 - nu2);
      const complex q = 1.0 - rho * l;
      check_pole(q, "hidden_variance");
      if (rho == 1.0) return 1.0 / std::norm(q);
      return (1.0 - rho * rho * nu2) / (std::norm(q) * (1.0 - nu2));
    }
    case AutocorrelationKind::Empirical:
      return stochastic::geometric_double_sum(l, std::conj(l), stochastic::lag_function(model))
          .real();
  }
  return 0.0;
}

double sensitivity_variance(const Eigenvalue& lambda, const AutocorrelationModel& model) {
  check_stable(lambda);
  const complex l = lambda.value();
  switch (model.kind()) {
    case AutocorrelationKind::Empirical:
      return stochastic::weighted_double_sum(l, std::conj(l), stochastic::lag_function(model))
          .real();
    default: return s_kernel(l, std::conj(l), *model.closed_form_rho()).real();
  }
}

complex s_kernel(complex a, complex b, double rho) {
  if (!(std::abs(a) < 1.0) || !(std::abs(b) < 1.0))
    throw DivergenceError("s_kernel requires |lambda| < 1");
  const complex p = a * b;
  const complex q = 1.0 - p;
  check_pole(q, "s_kernel");
  if (rho == 0.0) return (1.0 + p) / (q * q * q);
  const complex qa = 1.0 - rho * a, qb = 1.0 - rho * b;
  check_pole(qa * qb, "s_kernel");
  if (rho == 1.0) return 1.0 / (qa * qa * qb * qb);
  const double r2 = rho * rho, r4 = r2 * r2;
  const complex num = 1.0 + p - 4.0 * r2 * p + 4.0 * r2 * p * p - r4 * p * p - r4 * p * p * p -
                      2.0 * rho * (1.0 - r2) * p * (a + b);
  return num / (q * q * q * qa * qa * qb * qb);
}

double normalized_sensitivity(const Eigenvalue& lambda, const NormalizationSpec& norm,
                              const Parametrization& param, const AutocorrelationModel& model) {
  check_stable(lambda);
  const complex l = lambda.value();
  const double nu = lambda.magnitude();
  const double theta = lambda.angle();
  const complex phase = std::polar(1.0, theta);

  // dλ/dω and dν/dω for the single moving coordinate.
  complex dl;
  double dnu;
  if (param.is_angle()) {
    const double omega = param.inverse(theta, nu);
    dl = complex(0.0, 1.0) * l * param.derivative(omega, nu);
    dnu = 0.0;
  } else {
    const double omega = param.inverse(nu);
    dnu = param.derivative(omega);
    dl = phase * dnu;
  }

  const double gamma = norm.gamma(nu);
  const double sens = sensitivity_variance(lambda, model);
  double out = gamma * gamma * std::norm(dl) * sens;
  if (!norm.stop_gradient && dnu != 0.0) {
    const double g = norm.dgamma(nu) * dnu;
    const complex cross = generating_function_dalpha(l, std::conj(l), model);
    out += 2.0 * gamma * g * (dl * cross).real() + g * g * hidden_variance(lambda, model);
  }
  return out;
}

std::pair<double, double> polar_sensitivity_split(const Eigenvalue& lambda, double nu_prime,
                                                  double theta_prime,
                                                  const AutocorrelationModel& model) {
  const double s = sensitivity_variance(lambda, model);
  const double nu = lambda.magnitude();
  return {0.25 * s * nu_prime * nu_prime, 0.25 * s * nu * nu * theta_prime * theta_prime};
}

}  // namespace memcurse::analytic
