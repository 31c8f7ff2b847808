#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memcurse/analytic/eigenvalue.hpp"
#include "memcurse/analytic/parametrization.hpp"
#include "memcurse/experiments/optim.hpp"

namespace memcurse::experiments {

enum class LandscapeScenario { RealAxis, Circle, ReparamGrid };

std::string_view to_string(LandscapeScenario s);
LandscapeScenario landscape_scenario_from_string(std::string_view name);

struct LandscapePoint {
  std::string series;  ///< "real", "circle" or "<parametrization>/<nu|theta>"
  double x = 0.0;      ///< λ, θ or ω depending on the series
  analytic::complex lambda;
  double loss = 0.0;   ///< +inf at poles
  bool pole = false;
};

/// Closed-form 1D losses on a grid.
///   RealAxis: λ ∈ [0, 1] (plus Re λ* when λ* is real), loss_1d at `rho`.
///   Circle: |λ| = |λ*|, θ on a uniform grid through θ*, loss_1d at `rho`.
///   ReparamGrid: normalized_loss_1d along ω_ν at θ = θ* and along ω_θ at
///   ν = |λ*| for the polar, exp and optimal parametrizations.
std::vector<LandscapePoint> landscape_grid_1d(analytic::complex lambda_star,
                                              LandscapeScenario scenario, std::size_t resolution,
                                              double rho = 0.0);

enum class AngleParam { Polar, Exp, Optimal };

std::string_view to_string(AngleParam p);
AngleParam angle_param_from_string(std::string_view name);

/// Magnitude and angle maps of the three 1D parametrizations.
/// `for_training` selects tanh magnitudes for all three arms; otherwise the
/// landscape convention (direct, double exponential, tanh) is used.
std::pair<analytic::Parametrization, analytic::Parametrization> angle_param_maps(
    AngleParam p, bool for_training);

struct AngleTrainConfig {
  double lr = 1e-3;
  long steps = 50000;
  Schedule schedule = Schedule::Constant;
  AdamConfig adam;
  double init_jitter = 0.01;  ///< relative initial-angle perturbation, drawn from `seed`
  std::uint64_t seed = 0;
};

struct AngleTrajectory {
  std::vector<analytic::complex> lambda;  ///< after each step
  std::vector<double> loss;               ///< before each step
  bool diverged = false;
  double terminal_distance(analytic::complex lambda_star) const;
};

/// Adam on (ω_ν, ω_θ) with the exact gradient of normalized_loss_1d
/// (i.i.d. inputs, infinite horizon); ν = tanh ω_ν for every arm.
AngleTrajectory train_1d_angle(analytic::complex lambda0, analytic::complex lambda_star,
                               AngleParam param, const AngleTrainConfig& cfg);

}  // namespace memcurse::experiments
