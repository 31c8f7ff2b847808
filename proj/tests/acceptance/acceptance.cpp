// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "memcurse/analytic/hessian_blocks.hpp"
#include "memcurse/analytic/loss.hpp"
#include "memcurse/analytic/variance.hpp"
#include "memcurse/experiments/deepnet.hpp"
#include "memcurse/experiments/landscape.hpp"
#include "memcurse/experiments/structure.hpp"
#include "memcurse/experiments/train.hpp"
#include "memcurse/hessian/hessian.hpp"
#include "memcurse/models/gradient_check.hpp"
#include "memcurse/models/teacher.hpp"
#include "memcurse/stochastic/double_sum.hpp"
#include "memcurse/stochastic/simulate.hpp"
#include "memcurse/util/hash.hpp"

namespace fs = std::filesystem;
using namespace memcurse;
using cd = std::complex<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned g_jobs = 1;
std::string g_cli;
fs::path g_work;

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

Outcome closed_forms() {
  double worst = 0.0;
  for (int k = 0; k <= 19; ++k) {
    const double r = 0.05 * k;
    for (double phase : {0.0, 0.7, 2.0, std::numbers::pi}) {
      const auto lam = analytic::Eigenvalue::polar(r, phase);
      const cd l = lam.value();
      const double a = std::norm(l), m = std::norm(1.0 - l);
      const auto iid = stochastic::AutocorrelationModel::iid();
      const auto cst = stochastic::AutocorrelationModel::constant();
      worst = std::max({worst, rel(analytic::hidden_variance(lam, iid), 1.0 / (1.0 - a)),
                        rel(analytic::sensitivity_variance(lam, iid), (1.0 + a) / std::pow(1.0 - a, 3)),
                        rel(analytic::hidden_variance(lam, cst), 1.0 / m),
                        rel(analytic::sensitivity_variance(lam, cst), 1.0 / (m * m))});
    }
  }
  return {worst <= 1e-12, "worst relative error " + fmt(worst)};
}

Outcome monte_carlo() {
  double worst = 0.0;
  std::string where;
  std::uint64_t cell = 0;
  for (double l : {0.5, 0.9, 0.99}) {
    for (double rho : {0.0, 0.5, 0.9}) {
      const auto model = rho == 0.0 ? stochastic::AutocorrelationModel::iid()
                                    : stochastic::AutocorrelationModel::exp_decay(rho);
      const auto est = stochastic::simulate_variances(l, model, 10000, stochastic::burn_in_steps(l),
                                                      stochastic::RngStream(0).child(cell++));
      const auto lam = analytic::Eigenvalue::cartesian(l, 0.0);
      for (double e : {rel(est.hidden, analytic::hidden_variance(lam, model)),
                       rel(est.sensitivity, analytic::sensitivity_variance(lam, model))}) {
        if (e > worst) {
          worst = e;
          where = "(" + fmt(l) + ", " + fmt(rho) + ")";
        }
      }
    }
  }
  return {worst <= 0.05, "worst relative error " + fmt(worst) + " at (lambda, rho) = " + where};
}

Outcome gradients() {
  double worst = 0.0;
  std::string where;
  std::uint64_t k = 0;
  for (const std::string kind : {"dense", "block_diagonal", "complex_diagonal", "lru", "lstm"}) {
    stochastic::RngStream root = stochastic::RngStream(99).child(k++);
    for (std::uint64_t i = 0; i < 20; ++i) {
      stochastic::RngStream rng = root.child(i);
      const Eigen::Index n = 1 + static_cast<Eigen::Index>(i % 4);
      const std::size_t T = 4 + (i * 7) % 17;
      const auto cell = models::random_cell(kind, n, 1 + i % 2, 1 + (i / 2) % 2, 0.9, rng);
      const auto x = models::random_series(T, models::input_dim(cell), 2, rng);
      const auto e = models::random_series(T, models::output_dim(cell), 2, rng);
      for (const auto& g : models::check_gradients(cell, x, e)) {
        if (g.relative_error > worst) {
          worst = g.relative_error;
          where = kind + " " + g.label;
        }
      }
    }
  }
  return {worst <= 1e-6, "worst relative error " + fmt(worst) + " (" + where + ")"};
}

Outcome double_sums() {
  stochastic::RngStream rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const cd a = std::polar(0.9 * rng.uniform(), rng.uniform(-std::numbers::pi, std::numbers::pi));
    const cd b = std::polar(0.9 * rng.uniform(), rng.uniform(-std::numbers::pi, std::numbers::pi));
    // Damped cosine lags: a valid autocorrelation with oscillating sign.
    const double rho = rng.uniform(), omega = rng.uniform(0.0, std::numbers::pi);
    auto u = [rho, omega](long d) { return std::pow(rho, std::abs(d)) * std::cos(omega * static_cast<double>(d)); };
    const stochastic::LagFunction lf{[u](std::size_t d) { return u(static_cast<long>(d)); }, 1.0};
    const int n_max = 420;  // 0.9^420 is far below double precision
    cd g = 0.0, w = 0.0;
    cd an = 1.0;
    for (int n = 0; n < n_max; ++n, an *= a) {
      cd bm = 1.0;
      for (int m = 0; m < n_max; ++m, bm *= b) {
        const double r = u(n - m);
        g += an * bm * r;
        if (n > 0 && m > 0) w += static_cast<double>(n * m) * (an / a) * (bm / b) * r;
      }
    }
    worst = std::max({worst, std::abs(stochastic::geometric_double_sum(a, b, lf) - g) / std::abs(g),
                      std::abs(stochastic::weighted_double_sum(a, b, lf) - w) / std::abs(w)});
  }
  return {worst <= 1e-8, "worst relative error " + fmt(worst) + " over 100 cases"};
}

Outcome hessian_oracle() {
  stochastic::RngStream rng(5);
  const Eigen::Index n = 4;
  const Eigen::VectorXcd lam = models::sample_ring_eigenvalues(n, 0.5, 0.9, -std::numbers::pi, std::numbers::pi, rng);
  const Eigen::MatrixXcd b = models::complex_gaussian(n, 1, 1, rng);
  const Eigen::MatrixXcd c = models::complex_gaussian(1, n, n, rng);
  const auto cell = models::DiagonalComplexCell::cartesian(lam, b, c, Eigen::MatrixXd::Zero(1, 1));
  const std::size_t burn = hessian::burn_in_length(lam.cwiseAbs().maxCoeff());
  const std::size_t samples = 100000;
  const auto batch = stochastic::sample_wss_sequence(stochastic::AutocorrelationModel::iid(), burn + 1, samples, 1,
                                                     stochastic::RngStream(6));
  const auto r = hessian::gauss_newton_hessian(cell, cell, batch, burn, g_jobs);
  std::vector<Eigen::Index> idx = r.indices_of("lambda.re");
  for (Eigen::Index i : r.indices_of("lambda.im")) idx.push_back(i);
  Eigen::MatrixXd gn(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    for (Eigen::Index j = 0; j < 2 * n; ++j) gn(i, j) = r.matrix(idx[i], idx[j]);
  const Eigen::VectorXcd bv = b.col(0), cv = c.row(0).transpose();
  const std::span<const cd> bs{bv.data(), 4}, cs{cv.data(), 4}, ls{lam.data(), 4};
  const Eigen::MatrixXd h = analytic::full_hessian_ri(bs, cs, ls, 0.0);
  const double frob = (gn - h).norm() / h.norm();
  const double trace = rel(gn.trace(), analytic::lambda_hessian_trace(bs, cs, ls, 0.0));
  return {frob <= 0.02 && trace <= 0.03,
          "Frobenius " + fmt(frob) + ", trace " + fmt(trace) + ", N = " + std::to_string(samples)};
}

Outcome curvature() {
  double worst = 0.0;
  for (double nu : {0.3, 0.5, 0.9}) {
    const double h = 1e-4, l0 = analytic::normalized_loss_1d(nu, nu);
    const double dnn =
        (analytic::normalized_loss_1d(nu + h, nu) - 2 * l0 + analytic::normalized_loss_1d(nu - h, nu)) / (h * h);
    const double dtt = (analytic::normalized_loss_1d(std::polar(nu, h), nu) - 2 * l0 +
                        analytic::normalized_loss_1d(std::polar(nu, -h), nu)) / (h * h);
    const double q = (1 - nu * nu) * (1 - nu * nu);
    worst = std::max({worst, rel(dnn, 1.0 / q), rel(dtt, nu * nu * (1 + nu * nu) / q)});
  }
  return {worst <= 1e-4, "worst relative error " + fmt(worst)};
}

Outcome teacher_student() {
  std::map<double, std::map<std::string, double>> med;
  for (double nu : {0.99, 0.32}) {
    auto spec = experiments::desk_comparison_preset(nu);
    spec.jobs = g_jobs;
    for (const auto& a : experiments::lr_grid_sweep(spec).arms) med[nu][a.name] = a.median_final_loss;
  }
  auto& hi = med[0.99];
  auto& lo = med[0.32];
  const double gap_hi = hi["dense"] / hi["lru"], gap_lo = lo["dense"] / lo["lru"];
  const bool order = hi["lru"] < hi["complex_diagonal"] && hi["complex_diagonal"] < hi["dense"];
  std::string d = "nu=0.99 medians lru " + fmt(hi["lru"]) + ", complex_diagonal " + fmt(hi["complex_diagonal"]) +
                  ", dense " + fmt(hi["dense"]) + "; dense/lru " + fmt(gap_hi) + " at 0.99 vs " + fmt(gap_lo) +
                  " at 0.32";
  return {order && gap_hi > gap_lo, d};
}

Outcome structure() {
  experiments::StructureConfig cfg;
  cfg.jobs = g_jobs;
  const auto r = experiments::hessian_structure_comparison(cfg);
  const auto& dn = r.dense.metrics;
  const auto& dg = r.diagonal.metrics;
  return {dg.axis_alignment > dn.axis_alignment && dg.mean_top_k_ipr() < dn.mean_top_k_ipr(),
          "alignment diagonal " + fmt(dg.axis_alignment) + " vs dense " + fmt(dn.axis_alignment) +
              "; mean top-10 IPR diagonal " + fmt(dg.mean_top_k_ipr()) + " vs dense " + fmt(dn.mean_top_k_ipr()) +
              " (reduced diagonal alignment " + fmt(r.diagonal_reduced.metrics.axis_alignment) + ")"};
}

Outcome concentration() {
  const experiments::ConcentrationConfig cfg;
  const auto means = experiments::mean_alignment_by_theta(experiments::eigenvalue_concentration(cfg), cfg.theta0);
  bool mono = true;
  std::string d = "mean alignment at theta0 = pi, pi/4, pi/16:";
  for (std::size_t i = 0; i < means.size(); ++i) {
    d += " " + fmt(means[i]);
    if (i && !(means[i] < means[i - 1])) mono = false;
  }
  return {mono, d};
}

Outcome sigprop() {
  const std::vector<double> nus{0.32, 0.9, 0.99};
  const std::uint64_t seed = 0;
  const auto data = experiments::synthetic_embeddings(32, 256, 64, 0.0, stochastic::RngStream(seed).child(0));
  // value[recurrent][quantity][layer][nu index]
  std::map<std::string, std::map<std::string, std::map<int, std::vector<double>>>> v;
  bool overflow = false;
  for (const std::string rec : {"crnn", "lru", "lstm"}) {
    experiments::DeepNetSpec spec;
    spec.recurrent = rec;
    experiments::SigpropConfig cfg;
    cfg.jobs = g_jobs;
    cfg.seed = util::fnv1a64("sigprop/" + rec, seed ^ util::kFnvOffset);
    for (const auto& row : experiments::sigprop_at_init(spec, data, nus, cfg)) {
      v[rec][row.quantity][row.layer].push_back(row.value);
      overflow = overflow || row.overflow;
    }
  }
  auto increasing = [](const std::vector<double>& x) { return x[0] < x[1] && x[1] < x[2]; };
  const auto& crnn4 = v["crnn"]["hidden"][4];
  const bool a = increasing(crnn4) && crnn4[2] >= 10.0 * v["lru"]["hidden"][4][2];
  bool b = true, c_theta = true, c_nu = true, c_in = true;
  double worst_b = 0.0, worst_nu = 0.0, worst_in = 0.0;
  for (int layer = 1; layer <= 4; ++layer) {
    worst_b = std::max(worst_b, spread(v["lru"]["hidden"][layer]));
    c_theta = c_theta && increasing(v["lru"]["grad:omega_theta"][layer]);
    worst_nu = std::max(worst_nu, spread(v["lru"]["grad:omega_nu"][layer]));
    for (const char* g : {"grad:b.re", "grad:b.im"})
      worst_in = std::max(worst_in, spread(v["lru"][g][layer]));
  }
  b = worst_b <= 4.0;
  c_nu = worst_nu <= 4.0;
  c_in = worst_in <= 4.0;
  const double d_spread = spread(v["lstm"]["grad:network"][0]);
  const bool d = d_spread <= 3.0;
  std::string detail = std::string("(a) ") + (a ? "ok" : "FAIL") + " crnn layer-4 hidden " + fmt(crnn4[0]) + ", " +
                       fmt(crnn4[1]) + ", " + fmt(crnn4[2]) + " vs lru " + fmt(v["lru"]["hidden"][4][2]) +
                       "; (b) " + (b ? "ok" : "FAIL") + " lru hidden spread " + fmt(worst_b) + "; (c) " +
                       (c_theta && c_nu && c_in ? "ok" : "FAIL") + " omega_theta increasing " +
                       (c_theta ? "yes" : "no") + ", omega_nu spread " + fmt(worst_nu) + ", input-weight spread " +
                       fmt(worst_in) + "; (d) " + (d ? "ok" : "FAIL") + " lstm gradient spread " + fmt(d_spread) +
                       (overflow ? "; overflow flagged" : "");
  return {a && b && c_theta && c_nu && c_in && d, detail};
}

Outcome angle() {
  using experiments::AngleParam;
  const cd l0 = std::polar(0.99, std::numbers::pi / 4), ls = std::polar(0.99, std::numbers::pi / 100);
  bool ok = true;
  std::string d;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    experiments::AngleTrainConfig cfg;
    cfg.seed = seed;
    std::vector<double> dist, tail;
    for (auto p : {AngleParam::Polar, AngleParam::Exp, AngleParam::Optimal}) {
      const auto tr = experiments::train_1d_angle(l0, ls, p, cfg);
      dist.push_back(tr.terminal_distance(ls));
      // Diagnostic only: worst distance over the last tenth of the run.
      double worst = tr.diverged ? INFINITY : 0.0;
      for (std::size_t i = tr.lambda.size() - tr.lambda.size() / 10; i < tr.lambda.size(); ++i)
        worst = std::max(worst, std::abs(tr.lambda[i] - ls));
      tail.push_back(worst);
    }
    ok = ok && dist[0] <= dist[1] && dist[1] <= dist[2];
    d += (seed ? "; " : "") + std::string("seed ") + std::to_string(seed) + ": " + fmt(dist[0]) + ", " +
         fmt(dist[1]) + ", " + fmt(dist[2]) + " (last-tenth max " + fmt(tail[0], 2) + ", " + fmt(tail[1], 2) + ", " +
         fmt(tail[2], 2) + ")";
  }
  return {ok, "terminal distance polar, exp, optimal: " + d};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = quote(g_cli) + " " + args + " >>" + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"analytic", "analytic --rho 0,0.5,1"},
      {"validate", "validate --samples 2000 --tol 0.1 --lambda 0.5,0.9"},
      {"landscape", "landscape --resolution 41"},
      {"train_sweep", "train --steps 60 --seq-len 40 --batch-size 8 --n-seeds 2"},
      {"train_angle", "train --task angle1d --steps 500"},
      {"hessian_gn", "hessian --teacher random --student dense --samples 600"},
      {"hessian_structure", "hessian --mode structure --samples 300 --nu 0.9"},
      {"hessian_concentration", "hessian --mode concentration --draws 4"},
      {"sigprop", "sigprop --sequences 4 --length 32 --hidden 16 --input-dim 16 --batch-size 2"},
  };
  fs::remove_all(g_work / "determinism");
  const fs::path log = g_work / "determinism" / "cli.log";
  fs::create_directories(log.parent_path());
  std::size_t files = 0;
  std::vector<std::string> bad;
  for (const auto& [name, args] : runs) {
    const fs::path a = g_work / "determinism" / (name + "_jobs1"), b = g_work / "determinism" / (name + "_jobs8");
    int rc = run_cli("--jobs 1 --out " + quote(a.string()) + " " + args, log);
    if (rc != 0) {
      bad.push_back(name + " exit " + std::to_string(rc));
      continue;
    }
    rc = run_cli("--manifest " + quote((a / "manifest.json").string()) + " --jobs 8 --out " + quote(b.string()), log);
    if (rc != 0) {
      bad.push_back(name + " replay exit " + std::to_string(rc));
      continue;
    }
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++csvs;
      if (slurp(e.path()) != slurp(b / e.path().filename())) bad.push_back(name + "/" + e.path().filename().string());
    }
    if (csvs == 0) bad.push_back(name + " wrote no CSV");
    files += csvs;
  }
  std::string d = std::to_string(runs.size()) + " commands, " + std::to_string(files) + " CSV files compared";
  for (const auto& s : bad) d += "; mismatch " + s;
  return {bad.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only;
  g_jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--cli", g_cli, "path to the memcurse executable")->required();
  app.add_option("--workdir", g_work, "scratch directory")->required();
  app.add_option("--jobs", g_jobs, "worker threads for the heavy criteria");
  app.add_option("--only", only, "comma list of criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form variances", closed_forms},
      {"analytic vs Monte Carlo", monte_carlo},
      {"BPTT gradients vs finite differences", gradients},
      {"double sums vs brute force", double_sums},
      {"analytic vs Gauss-Newton Hessian", hessian_oracle},
      {"1D curvature at the optimum", curvature},
      {"teacher-student ordering", teacher_student},
      {"Hessian structure ordering", structure},
      {"eigenvalue concentration", concentration},
      {"signal propagation trends", sigprop},
      {"angle learning ordering", angle},
      {"manifest replay determinism", determinism},
  };
  std::set<std::size_t> selected;
  if (!only.empty()) {
    std::stringstream ss(only);
    for (std::string tok; std::getline(ss, tok, ',');) selected.insert(std::stoul(tok));
  }

  fs::create_directories(g_work);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s  [%s; %.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
