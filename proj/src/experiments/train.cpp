#include "memcurse/experiments/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "memcurse/errors.hpp"
#include "memcurse/models/teacher.hpp"
#include "memcurse/stochastic/process.hpp"
#include "memcurse/util/hash.hpp"

namespace memcurse::experiments {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

models::TimeSeries draw_inputs(const TrainConfig& cfg, Eigen::Index dim,
                               const stochastic::RngStream& stream) {
  const auto model = cfg.input_rho == 0.0 ? stochastic::AutocorrelationModel::iid()
                                          : stochastic::AutocorrelationModel::exp_decay(cfg.input_rho);
  return models::to_time_major(stochastic::sample_wss_sequence(
      model, cfg.seq_len, cfg.batch_size, static_cast<std::size_t>(dim), stream));
}

/// Loss and output errors dL/dy for ½|r|² averaged over time and batch.
double residual_errors(const models::TimeSeries& y, const models::TimeSeries& target,
                       models::TimeSeries& errors) {
  const double scale = 1.0 / static_cast<double>(y.size() * static_cast<std::size_t>(y[0].cols()));
  errors.resize(y.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    errors[t] = y[t] - target[t];
    loss += errors[t].squaredNorm();
    errors[t] *= scale;
  }
  return 0.5 * loss * scale;
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1) throw DomainError("TrainConfig: steps must be >= 1");
  if (!(lr > 0.0)) throw DomainError("TrainConfig: lr must be > 0");
  if (batch_size < 1 || seq_len < 1) throw DomainError("TrainConfig: empty batches");
  if (!(input_rho >= 0.0 && input_rho < 1.0))
    throw DomainError("TrainConfig: input_rho must lie in [0, 1)");
  for (double v : lr_grid)
    if (!(v > 0.0)) throw DomainError("TrainConfig: lr_grid entries must be > 0");
}

double TrainTrace::final_loss() const {
  if (diverged || loss.empty()) return kInf;
  const std::size_t k = std::max<std::size_t>(1, loss.size() / 20);
  double s = 0.0;
  for (std::size_t i = loss.size() - k; i < loss.size(); ++i) s += loss[i];
  return s / static_cast<double>(k);
}

double evaluate_loss(const models::RecurrentCell& student, const models::RecurrentCell& teacher,
                     const models::TimeSeries& inputs) {
  models::TimeSeries errors;
  return residual_errors(models::forward(student, inputs).outputs,
                         models::forward(teacher, inputs).outputs, errors);
}

TrainTrace train(const models::RecurrentCell& student, const models::RecurrentCell& teacher,
                 const TrainConfig& cfg, const stochastic::RngStream& data_stream) {
  cfg.validate();
  const Eigen::Index d_in = models::input_dim(student);
  if (d_in != models::input_dim(teacher) || models::output_dim(student) != models::output_dim(teacher))
    throw DimensionError("train: student and teacher dimensions differ");

  TrainTrace trace;
  trace.final_cell = student;
  Eigen::VectorXd p = models::parameters(student).flatten();
  Adam adam(p.size(), cfg.adam);
  trace.loss.reserve(static_cast<std::size_t>(cfg.steps));
  models::TimeSeries errors;
  const auto start = std::chrono::steady_clock::now();

  for (long step = 0; step < cfg.steps; ++step) {
    const models::TimeSeries x = draw_inputs(cfg, d_in, data_stream.child(static_cast<std::uint64_t>(step)));
    const models::Trajectory tr = models::forward(trace.final_cell, x);
    const double loss = residual_errors(tr.outputs, models::forward(teacher, x).outputs, errors);
    if (!std::isfinite(loss)) {
      trace.diverged = true;
      break;
    }
    const Eigen::VectorXd g = models::backward(trace.final_cell, x, tr, errors).gradients.flatten();
    if (!g.allFinite()) {
      trace.diverged = true;
      break;
    }
    trace.loss.push_back(loss);
    adam.step(p, g, scheduled_lr(cfg.schedule, cfg.lr, step, cfg.steps));
    models::set_parameters(trace.final_cell, p);
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  trace.wall_steps_per_sec = secs > 0 ? static_cast<double>(trace.loss.size()) / secs : 0.0;
  trace.adam_probe = adam.probe(cfg.lr);
  return trace;
}

models::DenseLinearSSM make_teacher(const TeacherSpec& spec, const stochastic::RngStream& stream) {
  const models::TeacherOptions opts{spec.input_dim, spec.output_dim, 8};
  return spec.eigenbasis ? models::build_teacher_eigenbasis(spec.n, spec.nu, spec.theta0, stream, opts)
                         : models::build_teacher(spec.n, spec.nu, spec.theta0, stream, opts);
}

models::RecurrentCell make_student(const StudentSpec& spec, const TeacherSpec& teacher,
                                   const stochastic::RngStream& stream) {
  if (spec.hidden < 1) throw DomainError("make_student: hidden must be >= 1");
  double nu = teacher.nu;
  if (spec.init == "nu_zero") {
    nu = 0.0;
  } else if (spec.init != "nu_teacher") {
    throw DomainError("make_student: unknown init " + spec.init);
  }
  const double nu_hi = 0.5 * (1.0 + nu);
  stochastic::RngStream rng = stream;
  if (spec.family == "dense")
    return models::build_teacher(spec.hidden, nu, teacher.theta0, stream,
                                 {teacher.input_dim, teacher.output_dim, 8});
  if (spec.family == "block_diagonal")
    return models::init_block_diagonal(std::max<Eigen::Index>(1, spec.hidden / 2), teacher.input_dim,
                                       teacher.output_dim, nu, nu_hi, teacher.theta0, rng);
  if (spec.family == "complex_diagonal")
    return models::init_complex_diagonal(spec.hidden, teacher.input_dim, teacher.output_dim, nu,
                                         nu_hi, teacher.theta0, rng);
  if (spec.family == "lru")
    return models::init_lru(spec.hidden, teacher.input_dim, teacher.output_dim, nu, nu_hi,
                            teacher.theta0, rng);
  throw DomainError("make_student: unknown family " + spec.family);
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median: empty input");
  for (double& v : values)
    if (!std::isfinite(v)) v = kInf;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2) return values[n / 2];
  const double a = values[n / 2 - 1], b = values[n / 2];
  return std::isinf(a) || std::isinf(b) ? std::max(a, b) : 0.5 * (a + b);
}

std::vector<double> log10_grid(const std::vector<double>& exponents) {
  std::vector<double> out;
  for (double e : exponents) out.push_back(std::pow(10.0, e));
  return out;
}

SweepResult lr_grid_sweep(const SweepSpec& spec) {
  spec.cfg.validate();
  if (spec.arms.empty() || spec.seeds.empty()) throw DomainError("lr_grid_sweep: empty sweep");
  SweepResult result;
  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    const SweepArm& arm = spec.arms[a];
    if (arm.lrs.empty() || arm.variants.empty())
      throw DomainError("lr_grid_sweep: arm " + arm.name + " has an empty grid");
    for (std::size_t v = 0; v < arm.variants.size(); ++v)
      for (std::size_t l = 0; l < arm.lrs.size(); ++l)
        for (std::uint64_t seed : spec.seeds) result.cells.push_back({a, v, l, seed, arm.lrs[l], {}});
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      SweepCell& cell = result.cells[i];
      try {
        const SweepArm& arm = spec.arms[cell.arm];
        const StudentSpec& variant = arm.variants[cell.variant];
        const stochastic::RngStream root(cell.seed);
        const models::RecurrentCell teacher = make_teacher(spec.teacher, root.child(0));
        const std::uint64_t tag =
            util::fnv1a64(arm.name + "/" + variant.family + "/" + variant.init);
        const models::RecurrentCell student = make_student(variant, spec.teacher, root.child(1).child(tag));
        TrainConfig cfg = spec.cfg;
        cfg.lr = cell.lr;
        cfg.seed = cell.seed;
        cell.trace = train(student, teacher, cfg, root.child(2));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(result.cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    const SweepArm& arm = spec.arms[a];
    ArmResult best{arm.name, 0, 0, 0.0, kInf, {}};
    bool any = false;
    for (std::size_t v = 0; v < arm.variants.size(); ++v) {
      for (std::size_t l = 0; l < arm.lrs.size(); ++l) {
        std::vector<double> losses;
        for (const SweepCell& c : result.cells)
          if (c.arm == a && c.variant == v && c.lr_index == l) losses.push_back(c.trace.final_loss());
        const double med = median(losses);
        if (!any || med < best.median_final_loss) {
          best = {arm.name, v, l, arm.lrs[l], med, losses};
          any = true;
        }
      }
    }
    if (!std::isfinite(best.median_final_loss)) {
      bool all_diverged = true;
      for (const SweepCell& c : result.cells)
        if (c.arm == a && !c.trace.diverged) all_diverged = false;
      if (all_diverged) throw SweepFailureError("lr_grid_sweep: every cell of arm " + arm.name + " diverged");
    }
    result.arms.push_back(std::move(best));
  }
  return result;
}

namespace {

SweepSpec comparison_preset(double nu, bool with_block, Eigen::Index teacher_n, Eigen::Index hidden,
                            std::size_t batch, long steps, std::size_t n_seeds,
                            const std::vector<double>& dense_exps,
                            const std::vector<double>& diag_exps) {
  SweepSpec s;
  s.teacher.n = teacher_n;
  s.teacher.nu = nu;
  s.cfg.batch_size = batch;
  s.cfg.seq_len = 300;
  s.cfg.steps = steps;
  s.cfg.schedule = Schedule::Cosine;
  for (std::size_t i = 0; i < n_seeds; ++i) s.seeds.push_back(i);
  s.arms.push_back({"dense", {{"dense", hidden, "nu_teacher"}, {"dense", hidden, "nu_zero"}},
                    log10_grid(dense_exps)});
  if (with_block)
    s.arms.push_back({"block_diagonal",
                      {{"block_diagonal", hidden, "nu_teacher"}, {"block_diagonal", hidden, "nu_zero"}},
                      log10_grid(dense_exps)});
  s.arms.push_back({"complex_diagonal", {{"complex_diagonal", hidden, "nu_teacher"}}, log10_grid(diag_exps)});
  s.arms.push_back({"lru", {{"lru", hidden, "nu_teacher"}}, log10_grid(diag_exps)});
  return s;
}

}  // namespace

SweepSpec desk_comparison_preset(double nu, bool with_block_diagonal) {
  return comparison_preset(nu, with_block_diagonal, 4, 32, 32, 2000, 3, {-4.0, -3.5, -3.0, -2.5},
                           {-2.5, -2.0, -1.5, -1.0});
}

SweepSpec full_comparison_preset(double nu, bool with_block_diagonal) {
  return comparison_preset(nu, with_block_diagonal, 10, 64, 128, 10000, 10,
                           {-5.0, -4.5, -4.0, -3.5, -3.0, -2.5}, {-2.5, -2.0, -1.5, -1.0, -0.5});
}

}  // namespace memcurse::experiments
