#include "memcurse/analytic/parametrization.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "memcurse/errors.hpp"

namespace memcurse::analytic {

Eigenvalue Eigenvalue::cartesian(double re, double im) {
  const complex z(re, im);
  if (!std::isfinite(re) || !std::isfinite(im) || !(std::abs(z) < 1.0))
    throw DivergenceError("eigenvalue must satisfy |lambda| < 1");
  return Eigenvalue(z, Representation::Cartesian);
}

Eigenvalue Eigenvalue::polar(double nu, double theta) {
  if (!(nu >= 0.0) || !(nu < 1.0)) throw DivergenceError("eigenvalue magnitude must lie in [0, 1)");
  if (!std::isfinite(theta)) throw DomainError("eigenvalue angle must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::remainder(theta, two_pi);
  if (t <= -std::numbers::pi) t += two_pi;
  return Eigenvalue(std::polar(nu, t), Representation::Polar);
}

NormalizationSpec NormalizationSpec::sqrt_one_minus_nu_sq(bool stop_gradient) {
  NormalizationSpec n;
  n.kind = Kind::SqrtOneMinusNuSq;
  n.stop_gradient = stop_gradient;
  return n;
}

NormalizationSpec NormalizationSpec::custom(std::function<double(double)> gamma,
                                            std::function<double(double)> dgamma,
                                            bool stop_gradient) {
  NormalizationSpec n;
  n.kind = Kind::Custom;
  n.stop_gradient = stop_gradient;
  n.custom_gamma = std::move(gamma);
  n.custom_dgamma = std::move(dgamma);
  return n;
}

double NormalizationSpec::gamma(double nu) const {
  switch (kind) {
    case Kind::None: return 1.0;
    case Kind::SqrtOneMinusNuSq: return std::sqrt(std::max(0.0, 1.0 - nu * nu));
    case Kind::Custom: return custom_gamma(nu);
  }
  return 1.0;
}

double NormalizationSpec::dgamma(double nu) const {
  switch (kind) {
    case Kind::None: return 0.0;
    case Kind::SqrtOneMinusNuSq: {
      const double g = std::sqrt(1.0 - nu * nu);
      if (!(g > 0.0)) throw DivergenceError("dgamma: nu at the unit circle");
      return -nu / g;
    }
    case Kind::Custom: return custom_dgamma ? custom_dgamma(nu) : 0.0;
  }
  return 0.0;
}

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::Direct: return "direct";
    case ParamKind::Tanh: return "tanh";
    case ParamKind::DoubleExp: return "double_exp";
    case ParamKind::Optimal1D: return "optimal_1d";
    case ParamKind::PolarDirect: return "polar_direct";
    case ParamKind::PolarExpAngle: return "polar_exp_angle";
  }
  return "unknown";
}

ParamKind param_kind_from_string(std::string_view name) {
  for (ParamKind k : {ParamKind::Direct, ParamKind::Tanh, ParamKind::DoubleExp,
                      ParamKind::Optimal1D, ParamKind::PolarDirect, ParamKind::PolarExpAngle})
    if (to_string(k) == name) return k;
  throw DomainError("unknown parametrization: " + std::string(name));
}

bool Parametrization::is_angle() const {
  return kind_ == ParamKind::Optimal1D || kind_ == ParamKind::PolarDirect ||
         kind_ == ParamKind::PolarExpAngle;
}

double optimal_angle_scale(double nu) {
  if (nu == 0.0) throw DomainError("optimal angle map is singular at nu = 0");
  return (1.0 - nu * nu) / (nu * std::sqrt(1.0 + nu * nu));
}

double optimal_angle_scale_derivative(double nu) {
  const double k = optimal_angle_scale(nu);
  return k * (-2.0 * nu / (1.0 - nu * nu) - 1.0 / nu - nu / (1.0 + nu * nu));
}

double Parametrization::value(double omega, double nu) const {
  switch (kind_) {
    case ParamKind::Direct:
    case ParamKind::PolarDirect: return omega;
    case ParamKind::Tanh: return std::tanh(omega);
    case ParamKind::DoubleExp: return std::exp(-std::exp(omega));
    case ParamKind::Optimal1D: return omega * optimal_angle_scale(nu);
    case ParamKind::PolarExpAngle: return std::exp(omega);
  }
  return omega;
}

double Parametrization::derivative(double omega, double nu) const {
  switch (kind_) {
    case ParamKind::Direct:
    case ParamKind::PolarDirect: return 1.0;
    case ParamKind::Tanh: {
      const double t = std::tanh(omega);
      return 1.0 - t * t;
    }
    case ParamKind::DoubleExp: {
      const double e = std::exp(omega);
      return -e * std::exp(-e);
    }
    case ParamKind::Optimal1D: return optimal_angle_scale(nu);
    case ParamKind::PolarExpAngle: return std::exp(omega);
  }
  return 1.0;
}

double Parametrization::inverse(double v, double nu) const {
  switch (kind_) {
    case ParamKind::Direct:
    case ParamKind::PolarDirect: return v;
    case ParamKind::Tanh:
      if (!(std::abs(v) < 1.0)) throw DomainError("tanh parametrization: |nu| must be < 1");
      return std::atanh(v);
    case ParamKind::DoubleExp:
      if (!(v > 0.0 && v < 1.0)) throw DomainError("double-exp parametrization: nu must be in (0,1)");
      return std::log(-std::log(v));
    case ParamKind::Optimal1D: return v / optimal_angle_scale(nu);
    case ParamKind::PolarExpAngle:
      if (!(v > 0.0)) throw DomainError("exp angle parametrization: theta must be positive");
      return std::log(v);
  }
  return v;
}

double Parametrization::nu_coupling(double omega, double nu) const {
  return kind_ == ParamKind::Optimal1D ? omega * optimal_angle_scale_derivative(nu) : 0.0;
}

OptimalPoint optimal_1d_parametrization(double omega_nu, double omega_theta) {
  const double nu = std::tanh(omega_nu);
  if (nu == 0.0) throw DomainError("optimal_1d_parametrization: theta map singular at nu = 0");
  const double k = optimal_angle_scale(std::abs(nu));
  const double theta = omega_theta * k;
  return {Eigenvalue::from_complex(std::polar(nu, theta)), 1.0 - nu * nu, k};
}

}  // namespace memcurse::analytic
