#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "internal.hpp"
#include "memcurse/analytic/variance.hpp"
#include "memcurse/experiments/deepnet.hpp"
#include "memcurse/experiments/landscape.hpp"
#include "memcurse/experiments/structure.hpp"
#include "memcurse/experiments/train.hpp"
#include "memcurse/models/teacher.hpp"
#include "memcurse/stochastic/simulate.hpp"
#include "memcurse/util/hash.hpp"

namespace memcurse::cli {

namespace {

using nlohmann::json;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Runs fn(0..n-1) on up to `jobs` threads; results must be written by index.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

std::size_t positive(const Context& ctx, const std::string& key) {
  const long long v = ctx.integer(key);
  require(v >= 1, key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

stochastic::AutocorrelationModel input_model(double rho) {
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  if (rho == 0.0) return stochastic::AutocorrelationModel::iid();
  if (rho == 1.0) return stochastic::AutocorrelationModel::constant();
  return stochastic::AutocorrelationModel::exp_decay(rho);
}

experiments::Schedule schedule_from(const std::string& s) {
  if (s == "cosine") return experiments::Schedule::Cosine;
  if (s == "constant") return experiments::Schedule::Constant;
  throw UsageError("schedule must be cosine or constant");
}

std::uint64_t root_seed(const Context& ctx) { return ctx.config.at("seed").get<std::uint64_t>(); }

// ---------------------------------------------------------------- analytic

void run_analytic(Context& ctx) {
  const std::vector<double> nus = ctx.grid("lambda"), rhos = ctx.grid("rho");
  const double theta = ctx.num("theta");
  for (double nu : nus) require(nu >= 0.0 && nu < 1.0, "lambda entries must lie in [0, 1)");
  for (double r : rhos) require(r >= 0.0 && r <= 1.0, "rho entries must lie in [0, 1]");
  const std::string norm_name = ctx.str("normalization");
  require(norm_name == "none" || norm_name == "sqrt", "normalization must be none or sqrt");
  const analytic::NormalizationSpec norm = norm_name == "none"
                                               ? analytic::NormalizationSpec::none()
                                               : analytic::NormalizationSpec::sqrt_one_minus_nu_sq();
  analytic::Parametrization p_nu, p_theta;
  try {
    p_nu = analytic::Parametrization(analytic::param_kind_from_string(ctx.str("param_nu")));
    p_theta = analytic::Parametrization(analytic::param_kind_from_string(ctx.str("param_theta")));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  require(!p_nu.is_angle(), "param_nu must be a magnitude parametrization");
  require(p_theta.is_angle(), "param_theta must be an angle parametrization");

  CsvTable t({"nu", "theta", "rho", "hidden_variance", "sensitivity_variance",
              "hidden_variance_normalized", "sensitivity_nu_normalized",
              "sensitivity_theta_normalized"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto guarded = [&](auto&& f) {
    try {
      return static_cast<double>(f());
    } catch (const Error&) {
      return nan;
    }
  };
  for (double rho : rhos) {
    const auto model = input_model(rho);
    for (double nu : nus) {
      const auto lam = analytic::Eigenvalue::polar(nu, theta);
      const double hv = guarded([&] { return analytic::hidden_variance(lam, model); });
      const double g = norm.gamma(nu);
      t.row().add(nu).add(theta).add(rho).add(hv);
      t.add(guarded([&] { return analytic::sensitivity_variance(lam, model); }));
      t.add(g * g * hv);
      t.add(guarded([&] { return analytic::normalized_sensitivity(lam, norm, p_nu, model); }));
      t.add(guarded([&] { return analytic::normalized_sensitivity(lam, norm, p_theta, model); }));
    }
  }
  ctx.out->write("analytic.csv", t);
}

// ---------------------------------------------------------------- validate

struct ValidationCell {
  double nu = 0.0, rho = 0.0;
};

std::vector<ValidationCell> validation_cells(const Context& ctx) {
  std::vector<ValidationCell> cells;
  const std::string spec = ctx.str("cells");
  if (!spec.empty()) {
    for (const auto& w : ctx.words("cells")) {
      const auto colon = w.find(':');
      require(colon != std::string::npos && w.find(':', colon + 1) == std::string::npos,
              "cells entries are lambda:rho, got '" + w + "'");
      cells.push_back({parse_grid(w.substr(0, colon)).at(0), parse_grid(w.substr(colon + 1)).at(0)});
    }
  } else {
    for (double rho : ctx.grid("rho"))
      for (double nu : ctx.grid("lambda")) cells.push_back({nu, rho});
  }
  for (const auto& c : cells) {
    require(c.nu >= 0.0 && c.nu < 1.0, "lambda entries must lie in [0, 1)");
    require(c.rho >= 0.0 && c.rho < 1.0, "rho entries must lie in [0, 1) for simulation");
  }
  return cells;
}

void run_validate(Context& ctx) {
  const std::size_t n = positive(ctx, "samples");
  const double tol = ctx.num("tol"), burn_tol = ctx.num("burn_tol");
  require(tol > 0.0, "tol must be > 0");
  require(burn_tol > 0.0 && burn_tol < 1.0, "burn_tol must lie in (0, 1)");
  // Relative standard error of a Gaussian second moment is sqrt(2/N);
  // require three standard errors to fit inside the tolerance.
  const double needed = std::ceil(18.0 / (tol * tol));
  if (3.0 * std::sqrt(2.0 / static_cast<double>(n)) > tol)
    throw UsageError("sample budget too small: tol " + format_number(tol) + " needs at least " +
                     format_number(needed) + " samples, got " + std::to_string(n));
  const std::vector<ValidationCell> cells = validation_cells(ctx);
  const stochastic::RngStream root(root_seed(ctx));

  struct Result {
    std::size_t burn = 0;
    double ha = 0, hm = 0, sa = 0, sm = 0;
  };
  std::vector<Result> res(cells.size());
  parallel_for(cells.size(), ctx.jobs, [&](std::size_t i) {
    const auto model = input_model(cells[i].rho);
    const auto lam = analytic::Eigenvalue::cartesian(cells[i].nu, 0.0);
    Result& r = res[i];
    r.burn = stochastic::burn_in_steps(cells[i].nu, burn_tol);
    const auto est = stochastic::simulate_variances(cells[i].nu, model, n, r.burn, root.child(i));
    r.ha = analytic::hidden_variance(lam, model);
    r.sa = analytic::sensitivity_variance(lam, model);
    r.hm = est.hidden;
    r.sm = est.sensitivity;
  });

  CsvTable t({"nu", "rho", "samples", "burn_in", "hidden_analytic", "hidden_mc", "hidden_rel_error",
              "sensitivity_analytic", "sensitivity_mc", "sensitivity_rel_error", "pass"});
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Result& r = res[i];
    const double eh = std::abs(r.hm / r.ha - 1.0), es = std::abs(r.sm / r.sa - 1.0);
    const bool pass = eh <= tol && es <= tol;
    if (!pass) ctx.validation_failed = true;
    t.row().add(cells[i].nu).add(cells[i].rho).add(n).add(r.burn).add(r.ha).add(r.hm).add(eh);
    t.add(r.sa).add(r.sm).add(es).add(pass);
  }
  ctx.seeds = {root_seed(ctx)};
  ctx.out->write("validate.csv", t);
}

// ---------------------------------------------------------------- landscape

void run_landscape(Context& ctx) {
  const double nu = ctx.num("nu_star"), theta = ctx.num("theta_star"), rho = ctx.num("rho");
  require(nu >= 0.0 && nu < 1.0, "nu_star must lie in [0, 1)");
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  const std::size_t res = positive(ctx, "resolution");
  require(res >= 2, "resolution must be >= 2");
  std::vector<std::string> names = ctx.words("scenario");
  if (names.size() == 1 && names[0] == "all") names = {"real_axis", "circle", "reparam_grid"};
  CsvTable t({"scenario", "series", "x", "lambda_re", "lambda_im", "loss", "pole"});
  for (const auto& name : names) {
    experiments::LandscapeScenario s{};
    try {
      s = experiments::landscape_scenario_from_string(name);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    for (const auto& p : experiments::landscape_grid_1d(std::polar(nu, theta), s, res, rho))
      t.row().add(name).add(p.series).add(p.x).add(p.lambda.real()).add(p.lambda.imag()).add(p.loss).add(p.pole);
  }
  ctx.out->write("landscape.csv", t);
}

// ---------------------------------------------------------------- train

json sweep_defaults(bool full) {
  const auto preset = full ? experiments::full_comparison_preset(0.99) : experiments::desk_comparison_preset(0.99);
  return {{"task", full ? "sweep_full" : "sweep"},
          {"nu", 0.99},
          {"theta0", kPi},
          {"teacher_n", preset.teacher.n},
          {"hidden", preset.arms[0].variants[0].hidden},
          {"batch_size", preset.cfg.batch_size},
          {"seq_len", preset.cfg.seq_len},
          {"steps", preset.cfg.steps},
          {"n_seeds", preset.seeds.size()},
          {"arms", "dense,complex_diagonal,lru"},
          {"block_hidden", full ? 64 : 32},
          {"dense_lr_exponents", full ? "-5,-4.5,-4,-3.5,-3,-2.5" : "-4,-3.5,-3,-2.5"},
          {"diagonal_lr_exponents", full ? "-2.5,-2,-1.5,-1,-0.5" : "-2.5,-2,-1.5,-1"},
          {"dense_inits", "nu_teacher,nu_zero"},
          {"schedule", "cosine"},
          {"input_rho", 0.0},
          {"loss_every", 10}};
}

json angle_defaults() {
  return {{"task", "angle1d"},  {"nu0", 0.99},        {"theta0", kPi / 4},
          {"nu_star", 0.99},    {"theta_star", kPi / 100}, {"params", "polar,exp,optimal"},
          {"steps", 50000},     {"lr", 1e-3},         {"n_seeds", 3},
          {"init_jitter", 0.01}, {"schedule", "constant"}, {"record_every", 100}};
}

void run_sweep(Context& ctx) {
  experiments::SweepSpec s;
  s.teacher.n = ctx.integer("teacher_n");
  s.teacher.nu = ctx.num("nu");
  s.teacher.theta0 = ctx.num("theta0");
  require(s.teacher.n >= 1, "teacher_n must be >= 1");
  require(s.teacher.nu >= 0.0 && s.teacher.nu < 1.0, "nu must lie in [0, 1)");
  s.cfg.batch_size = positive(ctx, "batch_size");
  s.cfg.seq_len = positive(ctx, "seq_len");
  s.cfg.steps = static_cast<long>(positive(ctx, "steps"));
  s.cfg.schedule = schedule_from(ctx.str("schedule"));
  s.cfg.input_rho = ctx.num("input_rho");
  require(s.cfg.input_rho >= 0.0 && s.cfg.input_rho < 1.0, "input_rho must lie in [0, 1)");
  const auto hidden = static_cast<Eigen::Index>(positive(ctx, "hidden"));
  const auto block_hidden = static_cast<Eigen::Index>(positive(ctx, "block_hidden"));
  const std::size_t loss_every = positive(ctx, "loss_every");
  const std::uint64_t seed = root_seed(ctx);
  for (std::size_t i = 0; i < positive(ctx, "n_seeds"); ++i) s.seeds.push_back(seed + i);
  const std::vector<double> dense_lrs = experiments::log10_grid(ctx.grid("dense_lr_exponents"));
  const std::vector<double> diag_lrs = experiments::log10_grid(ctx.grid("diagonal_lr_exponents"));
  const std::vector<std::string> inits = ctx.words("dense_inits");
  for (const auto& i : inits) require(i == "nu_teacher" || i == "nu_zero", "dense_inits: unknown init " + i);
  for (const auto& arm : ctx.words("arms")) {
    if (arm == "dense" || arm == "block_diagonal") {
      experiments::SweepArm a{arm, {}, dense_lrs};
      for (const auto& i : inits) a.variants.push_back({arm, arm == "dense" ? hidden : block_hidden, i});
      s.arms.push_back(a);
    } else if (arm == "complex_diagonal" || arm == "lru") {
      s.arms.push_back({arm, {{arm, hidden, "nu_teacher"}}, diag_lrs});
    } else {
      throw UsageError("arms: unknown arm " + arm);
    }
  }
  s.jobs = ctx.jobs;
  ctx.seeds = s.seeds;
  const experiments::SweepResult r = experiments::lr_grid_sweep(s);

  CsvTable cells({"arm", "family", "init", "lr", "seed", "steps_completed", "final_loss", "diverged"});
  CsvTable loss({"arm", "init", "lr", "seed", "step", "loss"});
  for (const auto& c : r.cells) {
    const auto& v = s.arms[c.arm].variants[c.variant];
    cells.row().add(s.arms[c.arm].name).add(v.family).add(v.init).add(c.lr).add(static_cast<long long>(c.seed));
    cells.add(c.trace.loss.size()).add(c.trace.final_loss()).add(c.trace.diverged);
    for (std::size_t k = 0; k < c.trace.loss.size(); ++k)
      if (k % loss_every == 0 || k + 1 == c.trace.loss.size())
        loss.row().add(s.arms[c.arm].name).add(v.init).add(c.lr).add(static_cast<long long>(c.seed))
            .add(k).add(c.trace.loss[k]);
  }
  CsvTable best({"arm", "family", "init", "lr", "median_final_loss"});
  CsvTable eff({"arm", "seed", "parameter", "effective_lr"});
  for (std::size_t a = 0; a < r.arms.size(); ++a) {
    const auto& ar = r.arms[a];
    const auto& v = s.arms[a].variants[ar.best_variant];
    best.row().add(ar.name).add(v.family).add(v.init).add(ar.best_lr).add(ar.median_final_loss);
    for (const auto& c : r.cells) {
      if (c.arm != a || c.variant != ar.best_variant || c.lr_index != ar.best_lr_index || c.trace.diverged) continue;
      if (c.trace.adam_probe.step_count < 1) continue;
      const Eigen::VectorXd lr = hessian::adam_effective_lr(c.trace.adam_probe);
      const models::GradientBundle params = models::parameters(c.trace.final_cell);
      const auto labels = params.element_labels();
      for (Eigen::Index k = 0; k < lr.size(); ++k)
        eff.row().add(ar.name).add(static_cast<long long>(c.seed)).add(labels[static_cast<std::size_t>(k)]).add(lr(k));
      break;
    }
  }
  ctx.out->write("train_cells.csv", cells);
  ctx.out->write("train_best.csv", best);
  ctx.out->write("train_loss.csv", loss);
  ctx.out->write("train_effective_lr.csv", eff);
}

void run_angle(Context& ctx) {
  const double nu0 = ctx.num("nu0"), nus = ctx.num("nu_star");
  require(nu0 >= 0.0 && nu0 < 1.0 && nus >= 0.0 && nus < 1.0, "magnitudes must lie in [0, 1)");
  const cd l0 = std::polar(nu0, ctx.num("theta0")), ls = std::polar(nus, ctx.num("theta_star"));
  experiments::AngleTrainConfig base;
  base.steps = static_cast<long>(positive(ctx, "steps"));
  base.lr = ctx.num("lr");
  require(base.lr > 0.0, "lr must be > 0");
  base.schedule = schedule_from(ctx.str("schedule"));
  base.init_jitter = ctx.num("init_jitter");
  const std::size_t every = positive(ctx, "record_every"), n_seeds = positive(ctx, "n_seeds");
  std::vector<experiments::AngleParam> params;
  for (const auto& w : ctx.words("params")) {
    try {
      params.push_back(experiments::angle_param_from_string(w));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const std::uint64_t seed = root_seed(ctx);
  for (std::size_t i = 0; i < n_seeds; ++i) ctx.seeds.push_back(seed + i);

  std::vector<experiments::AngleTrajectory> traj(params.size() * n_seeds);
  parallel_for(traj.size(), ctx.jobs, [&](std::size_t k) {
    experiments::AngleTrainConfig cfg = base;
    cfg.seed = seed + k % n_seeds;
    traj[k] = experiments::train_1d_angle(l0, ls, params[k / n_seeds], cfg);
  });
  CsvTable t({"param", "seed", "step", "lambda_re", "lambda_im", "loss"});
  CsvTable sum({"param", "seed", "terminal_distance", "final_lambda_re", "final_lambda_im", "diverged"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const std::string name(experiments::to_string(params[k / n_seeds]));
    const auto s = static_cast<long long>(seed + k % n_seeds);
    const auto& tr = traj[k];
    for (std::size_t i = 0; i < tr.lambda.size(); ++i)
      if (i % every == 0 || i + 1 == tr.lambda.size())
        t.row().add(name).add(s).add(i + 1).add(tr.lambda[i].real()).add(tr.lambda[i].imag()).add(tr.loss[i]);
    const cd last = tr.lambda.empty() ? l0 : tr.lambda.back();
    sum.row().add(name).add(s).add(tr.terminal_distance(ls)).add(last.real()).add(last.imag()).add(tr.diverged);
    if (tr.diverged) ctx.diverged = true;
  }
  ctx.out->write("angle1d.csv", t);
  ctx.out->write("angle1d_summary.csv", sum);
}

void run_train(Context& ctx) {
  if (ctx.str("task") == "angle1d") return run_angle(ctx);
  run_sweep(ctx);
}

// ---------------------------------------------------------------- hessian

const std::vector<std::string> kSummaryHeader = {
    "student", "parameters", "axis_alignment", "mean_top10_ipr", "max_eigenvalue",
    "min_eigenvalue", "residual_rms", "samples", "burn_in"};

void summary_row(CsvTable& t, const std::string& name, const hessian::HessianReport& r, std::size_t burn) {
  t.row().add(name).add(r.param_labels.size()).add(r.metrics.axis_alignment).add(r.metrics.mean_top_k_ipr());
  t.add(r.eigenvalues.size() ? r.eigenvalues(0) : 0.0)
      .add(r.eigenvalues.size() ? r.eigenvalues(r.eigenvalues.size() - 1) : 0.0)
      .add(r.residual_rms).add(r.samples).add(burn);
}

void write_report(Context& ctx, const std::string& stem, const hessian::HessianReport& r) {
  CsvTable m({"row", "col", "row_label", "col_label", "value"});
  for (Eigen::Index i = 0; i < r.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < r.matrix.cols(); ++j)
      m.row().add(static_cast<long long>(i)).add(static_cast<long long>(j))
          .add(r.param_labels[static_cast<std::size_t>(i)]).add(r.param_labels[static_cast<std::size_t>(j)])
          .add(r.matrix(i, j));
  CsvTable sp({"index", "eigenvalue", "ipr"});
  for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k)
    sp.row().add(static_cast<long long>(k)).add(r.eigenvalues(k))
        .add(hessian::inverse_participation_ratio(r.eigenvectors.col(k)));
  ctx.out->write(stem + "_matrix.csv", m);
  ctx.out->write(stem + "_spectrum.csv", sp);
  ctx.out->write(stem + "_report.json", hessian::report_to_json(r).dump(2) + "\n");
}

models::RecurrentCell hessian_student(const std::string& kind, const models::DenseLinearSSM& teacher) {
  if (kind == "dense") return teacher;
  if (kind == "diagonal") return models::to_diagonal(teacher);
  if (kind == "diagonal_reduced") return models::to_diagonal_reduced(teacher);
  throw UsageError("student must be dense, diagonal or diagonal_reduced");
}

void run_gauss_newton(Context& ctx) {
  const std::uint64_t seed = root_seed(ctx);
  const stochastic::RngStream root(seed);
  models::DenseLinearSSM teacher;
  const std::string kind = ctx.str("teacher");
  if (kind == "scalar") {
    const double l = ctx.num("lambda");
    require(std::abs(l) < 1.0, "lambda must satisfy |lambda| < 1");
    teacher = {Eigen::MatrixXd::Constant(1, 1, l), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
               Eigen::MatrixXd::Zero(1, 1)};
  } else if (kind == "random") {
    require(ctx.integer("n") >= 1, "n must be >= 1");
    require(ctx.num("nu") >= 0.0 && ctx.num("nu") < 1.0, "nu must lie in [0, 1)");
    teacher = models::build_teacher_eigenbasis(ctx.integer("n"), ctx.num("nu"), ctx.num("theta0"), root.child(0));
  } else {
    throw UsageError("teacher must be scalar or random");
  }
  const models::RecurrentCell student = hessian_student(ctx.str("student"), teacher);
  const std::size_t n = positive(ctx, "samples");
  const double r = models::to_diagonal(teacher).lambda().array().abs().maxCoeff();
  const std::size_t burn = hessian::burn_in_length(r, ctx.num("burn_tol"));
  const auto batch = stochastic::sample_wss_sequence(stochastic::AutocorrelationModel::iid(), burn + 1, n,
                                                     static_cast<std::size_t>(teacher.input_dim()), root.child(1));
  const hessian::HessianReport rep = hessian::gauss_newton_hessian(student, teacher, batch, burn, ctx.jobs);
  CsvTable sum(kSummaryHeader);
  summary_row(sum, ctx.str("student"), rep, burn);
  ctx.seeds = {seed};
  ctx.out->write("hessian_summary.csv", sum);
  write_report(ctx, "hessian", rep);
}

void run_structure(Context& ctx) {
  experiments::StructureConfig cfg;
  cfg.n = ctx.integer("n");
  cfg.nu = ctx.num("nu");
  cfg.theta0 = ctx.num("theta0");
  cfg.samples = positive(ctx, "samples");
  cfg.burn_in_tol = ctx.num("burn_tol");
  cfg.seed = root_seed(ctx);
  cfg.jobs = ctx.jobs;
  require(cfg.n >= 1 && cfg.nu >= 0.0 && cfg.nu < 1.0, "n must be >= 1 and nu in [0, 1)");
  const experiments::StructureComparison s = experiments::hessian_structure_comparison(cfg);
  CsvTable sum(kSummaryHeader);
  CsvTable top({"student", "k", "eigenvalue", "param_label", "component"});
  const std::pair<const char*, const hessian::HessianReport*> reports[] = {
      {"dense", &s.dense}, {"diagonal", &s.diagonal}, {"diagonal_reduced", &s.diagonal_reduced}};
  for (const auto& [name, rep] : reports) {
    summary_row(sum, name, *rep, s.burn_in);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(10, rep->eigenvalues.size()); ++k)
      for (Eigen::Index i = 0; i < rep->eigenvectors.rows(); ++i)
        top.row().add(name).add(static_cast<long long>(k)).add(rep->eigenvalues(k))
            .add(rep->param_labels[static_cast<std::size_t>(i)]).add(rep->eigenvectors(i, k));
    write_report(ctx, std::string("structure_") + name, *rep);
  }
  ctx.seeds = {cfg.seed};
  ctx.out->write("structure_summary.csv", sum);
  ctx.out->write("structure_top_eigenvectors.csv", top);
}

void run_concentration(Context& ctx) {
  experiments::ConcentrationConfig cfg;
  cfg.n = ctx.integer("n");
  cfg.nu = ctx.num("nu");
  cfg.theta0 = ctx.grid("theta0");
  cfg.draws = positive(ctx, "draws");
  cfg.rho = ctx.num("rho");
  cfg.seed = root_seed(ctx);
  require(cfg.n >= 1 && cfg.nu >= 0.0 && cfg.nu < 1.0, "n must be >= 1 and nu in [0, 1)");
  require(cfg.rho >= 0.0 && cfg.rho < 1.0, "rho must lie in [0, 1)");
  const auto rows = experiments::eigenvalue_concentration(cfg);
  CsvTable t({"theta0", "draw", "axis_alignment", "mean_top10_ipr"});
  for (const auto& r : rows) t.row().add(r.theta0).add(r.draw).add(r.axis_alignment).add(r.mean_top_k_ipr);
  CsvTable m({"theta0", "mean_axis_alignment"});
  const auto means = experiments::mean_alignment_by_theta(rows, cfg.theta0);
  for (std::size_t i = 0; i < means.size(); ++i) m.row().add(cfg.theta0[i]).add(means[i]);
  ctx.seeds = {cfg.seed};
  ctx.out->write("concentration.csv", t);
  ctx.out->write("concentration_mean.csv", m);
}

void run_hessian(Context& ctx) {
  const std::string mode = ctx.str("mode");
  if (mode == "structure") return run_structure(ctx);
  if (mode == "concentration") return run_concentration(ctx);
  run_gauss_newton(ctx);
}

// ---------------------------------------------------------------- sigprop

void run_sigprop(Context& ctx) {
  const std::vector<double> nus = ctx.grid("nu");
  for (double nu : nus) require(nu >= 0.0 && nu < 1.0, "nu entries must lie in [0, 1)");
  experiments::DeepNetSpec spec;
  spec.blocks = static_cast<int>(positive(ctx, "blocks"));
  spec.hidden = static_cast<Eigen::Index>(positive(ctx, "hidden"));
  spec.input_dim = static_cast<Eigen::Index>(positive(ctx, "input_dim"));
  spec.layer_norm = ctx.flag("layer_norm");
  spec.theta_max = ctx.num("theta_max");
  const std::size_t count = positive(ctx, "sequences"), length = positive(ctx, "length");
  require(length >= 2, "length must be >= 2");
  const double rho = ctx.num("data_rho");
  require(rho >= 0.0 && rho < 1.0, "data_rho must lie in [0, 1)");
  const std::uint64_t seed = root_seed(ctx);
  const std::string file = ctx.str("data_file");
  const stochastic::SequenceBatch data =
      file.empty() ? experiments::synthetic_embeddings(count, length, static_cast<std::size_t>(spec.input_dim), rho,
                                                       stochastic::RngStream(seed).child(0))
                   : experiments::load_float32_tensor(file, count, length, static_cast<std::size_t>(spec.input_dim));
  experiments::SigpropConfig cfg;
  cfg.batch_size = positive(ctx, "batch_size");
  cfg.jobs = ctx.jobs;
  CsvTable t({"recurrent", "nu", "layer", "quantity", "value", "overflow"});
  ctx.seeds = {seed};
  for (const auto& rec : ctx.words("recurrent")) {
    require(rec == "crnn" || rec == "lru" || rec == "lstm", "recurrent entries are crnn, lru or lstm");
    spec.recurrent = rec;
    cfg.seed = util::fnv1a64("sigprop/" + rec, seed ^ util::kFnvOffset);
    for (const auto& row : experiments::sigprop_at_init(spec, data, nus, cfg))
      t.row().add(rec).add(row.nu).add(row.layer).add(row.quantity).add(row.value).add(row.overflow);
  }
  ctx.out->write("sigprop.csv", t);
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"analytic", "closed-form hidden and sensitivity variances on a lambda x rho grid", "", {},
       [](const std::string&) {
         return json{{"lambda", "0:0.99:100"}, {"theta", 0.0},        {"rho", "0"},
                     {"normalization", "sqrt"}, {"param_nu", "direct"}, {"param_theta", "polar_direct"}};
       },
       run_analytic},
      {"validate", "Monte-Carlo check of the closed-form variances", "", {},
       [](const std::string&) {
         return json{{"lambda", "0.5,0.9,0.99"}, {"rho", "0,0.5,0.9"}, {"cells", ""},
                     {"samples", 10000},         {"tol", 0.05},        {"burn_tol", 1e-8}};
       },
       run_validate},
      {"landscape", "one-dimensional loss landscapes", "", {},
       [](const std::string&) {
         return json{{"scenario", "all"}, {"nu_star", 0.9}, {"theta_star", 0.0}, {"resolution", 201}, {"rho", 0.0}};
       },
       run_landscape},
      {"train", "teacher-student learning-rate sweeps and the 1D angle task", "task",
       {"sweep", "sweep_full", "angle1d"},
       [](const std::string& task) {
         if (task == "angle1d") return angle_defaults();
         return sweep_defaults(task == "sweep_full");
       },
       run_train},
      {"hessian", "Hessians at optimality and their structure", "mode",
       {"gauss_newton", "structure", "concentration"},
       [](const std::string& mode) {
         if (mode == "structure")
           return json{{"mode", "structure"}, {"n", 4},          {"nu", 0.99},
                       {"theta0", kPi},       {"samples", 2000}, {"burn_tol", 1e-6}};
         if (mode == "concentration")
           return json{{"mode", "concentration"}, {"n", 10}, {"nu", 0.99}, {"theta0", "pi,pi/4,pi/16"},
                       {"draws", 16}, {"rho", 0.0}};
         return json{{"mode", "gauss_newton"}, {"teacher", "scalar"}, {"lambda", 0.9},   {"n", 4},
                     {"nu", 0.99},             {"theta0", kPi},       {"student", "diagonal"},
                     {"samples", 10000},       {"burn_tol", 1e-8}};
       },
       run_hessian},
      {"sigprop", "signal propagation in deep recurrent stacks at initialization", "", {},
       [](const std::string&) {
         return json{{"recurrent", "crnn,lru,lstm"}, {"nu", "0.32,0.9,0.99"}, {"blocks", 4},
                     {"hidden", 64},                 {"input_dim", 64},        {"layer_norm", false},
                     {"theta_max", kPi},             {"sequences", 32},        {"length", 256},
                     {"batch_size", 8},              {"data_rho", 0.0},        {"data_file", ""}};
       },
       run_sigprop},
  };
  return list;
}

}  // namespace memcurse::cli
