#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "memcurse/analytic/eigenvalue.hpp"

namespace memcurse::analytic {

/// γ(ν) input normalization.
struct NormalizationSpec {
  enum class Kind { None, SqrtOneMinusNuSq, Custom };

  Kind kind = Kind::None;
  /// When set, γ is treated as a constant when differentiating.
  bool stop_gradient = true;
  std::function<double(double)> custom_gamma;
  std::function<double(double)> custom_dgamma;

  static NormalizationSpec none() { return {}; }
  static NormalizationSpec sqrt_one_minus_nu_sq(bool stop_gradient = true);
  static NormalizationSpec custom(std::function<double(double)> gamma,
                                  std::function<double(double)> dgamma, bool stop_gradient);

  /// γ as a function of ν = |λ|.
  double gamma(double nu) const;
  /// dγ/dν.
  double dgamma(double nu) const;
};

enum class ParamKind { Direct, Tanh, DoubleExp, Optimal1D, PolarDirect, PolarExpAngle };

std::string_view to_string(ParamKind kind);
ParamKind param_kind_from_string(std::string_view name);

/// Scalar map ω -> ν (magnitude kinds) or ω -> θ (angle kinds).
///
/// Magnitude kinds: Direct ν=ω, Tanh ν=tanh ω, DoubleExp ν=exp(-exp ω).
/// Angle kinds: PolarDirect θ=ω, PolarExpAngle θ=exp ω,
/// Optimal1D θ=ω·k(ν) with k(ν)=(1-ν²)/(ν√(1+ν²)).
class Parametrization {
 public:
  Parametrization() = default;
  explicit Parametrization(ParamKind kind) : kind_(kind) {}

  ParamKind kind() const { return kind_; }
  bool is_angle() const;

  /// `nu` is read only by Optimal1D.
  double value(double omega, double nu = 0.0) const;
  double derivative(double omega, double nu = 0.0) const;
  double inverse(double value, double nu = 0.0) const;
  /// ∂θ/∂ν at fixed ω (nonzero only for Optimal1D).
  double nu_coupling(double omega, double nu) const;

 private:
  ParamKind kind_ = ParamKind::Direct;
};

/// k(ν) = (1-ν²)/(ν√(1+ν²)); throws DomainError at ν = 0.
double optimal_angle_scale(double nu);
double optimal_angle_scale_derivative(double nu);

struct OptimalPoint {
  Eigenvalue lambda;
  double nu_prime;
  double theta_prime;
};

/// ν = tanh(ω_ν), θ = ω_θ·k(ν).
OptimalPoint optimal_1d_parametrization(double omega_nu, double omega_theta);

}  // namespace memcurse::analytic
