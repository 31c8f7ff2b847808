#include <tuple>
#include "memcurse/experiments/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memcurse/analytic/loss.hpp"
#include "memcurse/errors.hpp"
#include "memcurse/stochastic/rng.hpp"

namespace memcurse::experiments {

using analytic::complex;
using analytic::ParamKind;
using analytic::Parametrization;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_pole(complex l) { return std::abs(l) >= 1.0 - analytic::kPoleTolerance; }

LandscapePoint evaluate(std::string series, double x, complex l, complex ls, double rho,
                        bool normalized) {
  if (at_pole(l)) return {std::move(series), x, l, kInf, true};
  const double loss = normalized ? analytic::normalized_loss_1d(l, ls) : analytic::loss_1d(l, ls, rho);
  return {std::move(series), x, l, loss, false};
}

double wrap_angle(double t) {
  t = std::remainder(t, 2.0 * kPi);
  return t <= -kPi ? t + 2.0 * kPi : t;
}

}  // namespace

std::string_view to_string(LandscapeScenario s) {
  switch (s) {
    case LandscapeScenario::RealAxis: return "real_axis";
    case LandscapeScenario::Circle: return "circle";
    case LandscapeScenario::ReparamGrid: return "reparam_grid";
  }
  return "";
}

LandscapeScenario landscape_scenario_from_string(std::string_view name) {
  for (auto s : {LandscapeScenario::RealAxis, LandscapeScenario::Circle, LandscapeScenario::ReparamGrid})
    if (to_string(s) == name) return s;
  throw DomainError("unknown landscape scenario: " + std::string(name));
}

std::string_view to_string(AngleParam p) {
  switch (p) {
    case AngleParam::Polar: return "polar";
    case AngleParam::Exp: return "exp";
    case AngleParam::Optimal: return "optimal";
  }
  return "";
}

AngleParam angle_param_from_string(std::string_view name) {
  for (auto p : {AngleParam::Polar, AngleParam::Exp, AngleParam::Optimal})
    if (to_string(p) == name) return p;
  throw DomainError("unknown angle parametrization: " + std::string(name));
}

std::pair<Parametrization, Parametrization> angle_param_maps(AngleParam p, bool for_training) {
  switch (p) {
    case AngleParam::Polar:
      return {Parametrization(for_training ? ParamKind::Tanh : ParamKind::Direct),
              Parametrization(ParamKind::PolarDirect)};
    case AngleParam::Exp:
      return {Parametrization(for_training ? ParamKind::Tanh : ParamKind::DoubleExp),
              Parametrization(ParamKind::PolarExpAngle)};
    case AngleParam::Optimal:
      return {Parametrization(ParamKind::Tanh), Parametrization(ParamKind::Optimal1D)};
  }
  throw DomainError("angle_param_maps: invalid parametrization");
}

std::vector<LandscapePoint> landscape_grid_1d(complex lambda_star, LandscapeScenario scenario,
                                              std::size_t resolution, double rho) {
  if (!(std::abs(lambda_star) < 1.0)) throw DomainError("landscape_grid_1d: |lambda*| must be < 1");
  if (resolution < 2) throw DomainError("landscape_grid_1d: resolution must be >= 2");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("landscape_grid_1d: rho must lie in [0, 1]");
  const double res = static_cast<double>(resolution);
  std::vector<LandscapePoint> out;

  if (scenario == LandscapeScenario::RealAxis) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < resolution; ++i) xs.push_back(static_cast<double>(i) / (res - 1.0));
    if (lambda_star.imag() == 0.0 && lambda_star.real() >= 0.0) xs.push_back(lambda_star.real());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) out.push_back(evaluate("real", x, complex(x, 0.0), lambda_star, rho, false));
    return out;
  }

  if (scenario == LandscapeScenario::Circle) {
    const double r = std::abs(lambda_star), t0 = std::arg(lambda_star);
    std::vector<double> ts;
    for (std::size_t i = 0; i < resolution; ++i) ts.push_back(wrap_angle(t0 + 2.0 * kPi * static_cast<double>(i) / res));
    std::sort(ts.begin(), ts.end());
    for (double t : ts) out.push_back(evaluate("circle", t, std::polar(r, t), lambda_star, rho, false));
    return out;
  }

  const double nu_star = std::abs(lambda_star), theta_star = std::arg(lambda_star);
  for (AngleParam p : {AngleParam::Polar, AngleParam::Exp, AngleParam::Optimal}) {
    const auto [mag, ang] = angle_param_maps(p, false);
    const std::string name(to_string(p));
    // Magnitude slice at the teacher angle.
    const double w_lo = mag.inverse(1e-3), w_hi = mag.inverse(1.0 - 1e-4);
    for (std::size_t i = 0; i < resolution; ++i) {
      const double w = w_lo + (w_hi - w_lo) * static_cast<double>(i) / (res - 1.0);
      const double nu = mag.value(w);
      out.push_back(evaluate(name + "/nu", w, std::polar(nu, theta_star), lambda_star, rho, true));
    }
    // Angle slice at the teacher magnitude.
    const double t_lo = p == AngleParam::Exp ? 1e-3 : -kPi;
    const double a_lo = ang.inverse(t_lo, nu_star), a_hi = ang.inverse(kPi, nu_star);
    for (std::size_t i = 0; i < resolution; ++i) {
      const double w = a_lo + (a_hi - a_lo) * static_cast<double>(i) / (res - 1.0);
      out.push_back(evaluate(name + "/theta", w, std::polar(nu_star, ang.value(w, nu_star)),
                             lambda_star, rho, true));
    }
  }
  return out;
}

double AngleTrajectory::terminal_distance(complex lambda_star) const {
  if (diverged || lambda.empty()) return kInf;
  return std::abs(lambda.back() - lambda_star);
}

AngleTrajectory train_1d_angle(complex lambda0, complex lambda_star, AngleParam param,
                               const AngleTrainConfig& cfg) {
  if (!(std::abs(lambda0) < 1.0) || !(std::abs(lambda_star) < 1.0))
    throw DomainError("train_1d_angle: eigenvalues must lie inside the unit disk");
  if (cfg.steps < 1 || !(cfg.lr > 0.0)) throw DomainError("train_1d_angle: invalid config");
  const auto [mag, ang] = angle_param_maps(param, true);

  double theta0 = std::arg(lambda0);
  if (cfg.init_jitter != 0.0) {
    stochastic::RngStream rng(cfg.seed);
    theta0 *= 1.0 + cfg.init_jitter * rng.uniform(-1.0, 1.0);
  }
  const double nu0 = std::abs(lambda0);
  Eigen::VectorXd w(2);
  w << mag.inverse(nu0), ang.inverse(theta0, nu0);

  Adam adam(2, cfg.adam);
  AngleTrajectory traj;
  traj.lambda.reserve(static_cast<std::size_t>(cfg.steps));
  traj.loss.reserve(static_cast<std::size_t>(cfg.steps));
  Eigen::VectorXd g(2);
  for (long step = 0; step < cfg.steps; ++step) {
    const double nu = mag.value(w(0));
    const double theta = ang.value(w(1), nu);
    if (!(nu < 1.0) || !std::isfinite(theta)) {
      traj.diverged = true;
      break;
    }
    const complex l = std::polar(nu, theta);
    double loss = 0.0, g_nu = 0.0, g_theta = 0.0;
    try {
      loss = analytic::normalized_loss_1d(l, lambda_star);
      std::tie(g_nu, g_theta) = analytic::normalized_loss_1d_polar_gradient(nu, theta, lambda_star);
    } catch (const DivergenceError&) {
      // Rounding can put |λ| on the unit circle even though ν < 1.
      traj.diverged = true;
      break;
    }
    traj.loss.push_back(loss);
    const double dnu = mag.derivative(w(0));
    g << g_nu * dnu + g_theta * ang.nu_coupling(w(1), nu) * dnu, g_theta * ang.derivative(w(1), nu);
    if (!g.allFinite()) {
      traj.diverged = true;
      break;
    }
    adam.step(w, g, scheduled_lr(cfg.schedule, cfg.lr, step, cfg.steps));
    traj.lambda.push_back(std::polar(mag.value(w(0)), ang.value(w(1), mag.value(w(0)))));
  }
  return traj;
}

}  // namespace memcurse::experiments
