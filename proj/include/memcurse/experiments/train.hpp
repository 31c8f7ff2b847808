#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "memcurse/experiments/optim.hpp"
#include "memcurse/hessian/hessian.hpp"
#include "memcurse/models/cells.hpp"
#include "memcurse/models/gradient_bundle.hpp"
#include "memcurse/stochastic/rng.hpp"

namespace memcurse::experiments {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t seq_len = 300;
  long steps = 2000;
  double lr = 1e-3;
  Schedule schedule = Schedule::Cosine;
  std::uint64_t seed = 0;
  std::vector<double> lr_grid;
  AdamConfig adam;
  double input_rho = 0.0;  ///< AR(1) input correlation; 0 gives i.i.d. inputs

  void validate() const;
};

struct TrainTrace {
  std::vector<double> loss;  ///< one entry per completed step
  models::RecurrentCell final_cell;
  hessian::AdamProbe adam_probe;
  double wall_steps_per_sec = 0.0;  ///< informational, never written to data files
  bool diverged = false;

  /// Mean of the last max(1, steps/20) recorded losses; +inf if diverged.
  double final_loss() const;
};

/// Online teacher-student regression: every step draws a fresh batch from
/// `data_stream.child(step)`, targets come from the teacher, and the student
/// minimizes ½|y - y*|² averaged over time and batch with Adam. A non-finite
/// loss or gradient sets `diverged` and stops the run.
TrainTrace train(const models::RecurrentCell& student, const models::RecurrentCell& teacher,
                 const TrainConfig& cfg, const stochastic::RngStream& data_stream);

/// ½|y - y*|² averaged over time and batch on one batch, without updating.
double evaluate_loss(const models::RecurrentCell& student, const models::RecurrentCell& teacher,
                     const models::TimeSeries& inputs);

struct TeacherSpec {
  Eigen::Index n = 4;
  double nu = 0.99;
  double theta0 = std::numbers::pi;
  Eigen::Index input_dim = 1;
  Eigen::Index output_dim = 1;
  bool eigenbasis = false;  ///< sample eigenpairs directly instead of a Gaussian A
};

models::DenseLinearSSM make_teacher(const TeacherSpec& spec, const stochastic::RngStream& stream);

/// family: "dense", "block_diagonal", "complex_diagonal" or "lru".
/// init: "nu_teacher" (eigenvalue magnitudes as the teacher's ν) or "nu_zero".
struct StudentSpec {
  std::string family = "lru";
  Eigen::Index hidden = 32;
  std::string init = "nu_teacher";
};

models::RecurrentCell make_student(const StudentSpec& spec, const TeacherSpec& teacher,
                                   const stochastic::RngStream& stream);

struct SweepArm {
  std::string name;
  std::vector<StudentSpec> variants;  ///< init variants scanned alongside lr
  std::vector<double> lrs;
};

struct SweepSpec {
  TeacherSpec teacher;
  std::vector<SweepArm> arms;
  std::vector<std::uint64_t> seeds;
  TrainConfig cfg;
  unsigned jobs = 1;
};

struct SweepCell {
  std::size_t arm = 0, variant = 0, lr_index = 0;
  std::uint64_t seed = 0;
  double lr = 0.0;
  TrainTrace trace;
};

struct ArmResult {
  std::string name;
  std::size_t best_variant = 0, best_lr_index = 0;
  double best_lr = 0.0;
  double median_final_loss = 0.0;
  std::vector<double> seed_losses;  ///< at the selected (variant, lr), in seed order
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< ordered by (arm, variant, lr, seed)
  std::vector<ArmResult> arms;
};

/// Runs every (arm, variant, lr, seed) cell on a pool of `jobs` threads and
/// selects per arm the (variant, lr) with the lowest median final loss.
/// Seed s owns RngStream(s): teacher child(0), data child(2), student
/// child(1).child(hash of arm name and variant), so cells are paired across
/// arms and independent of scheduling. Throws SweepFailureError when every
/// cell of an arm diverged.
SweepResult lr_grid_sweep(const SweepSpec& spec);

/// Median with +inf for diverged entries.
double median(std::vector<double> values);

/// 10^x for each x.
std::vector<double> log10_grid(const std::vector<double>& exponents);

/// Reduced-scale comparison: teacher n=4, hidden 32, 2000 steps, batch 32,
/// sequence 300, three seeds. Arms "dense" (ν-teacher and ν=0 inits),
/// "complex_diagonal" and "lru", plus "block_diagonal" when requested.
SweepSpec desk_comparison_preset(double nu, bool with_block_diagonal = false);

/// The larger configuration: teacher n=10, hidden 64, batch 128, 10k steps,
/// ten seeds and the full learning-rate grids.
SweepSpec full_comparison_preset(double nu, bool with_block_diagonal = false);

}  // namespace memcurse::experiments
