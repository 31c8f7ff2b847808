#include "memcurse/experiments/structure.hpp"

#include <cmath>

#include "memcurse/analytic/hessian_blocks.hpp"
#include "memcurse/errors.hpp"
#include "memcurse/models/teacher.hpp"

namespace memcurse::experiments {

using cd = std::complex<double>;

StructureComparison hessian_structure_comparison(const StructureConfig& cfg) {
  if (cfg.n < 1 || cfg.samples < 1 || !(cfg.nu >= 0.0 && cfg.nu < 1.0))
    throw DomainError("hessian_structure_comparison: invalid config");
  const stochastic::RngStream root(cfg.seed);
  StructureComparison out;
  out.teacher = models::build_teacher_eigenbasis(cfg.n, cfg.nu, cfg.theta0, root.child(0));
  const models::DiagonalComplexCell diag = models::to_diagonal(out.teacher);
  out.burn_in = hessian::burn_in_length(diag.lambda().array().abs().maxCoeff(), cfg.burn_in_tol);
  const stochastic::SequenceBatch batch = stochastic::sample_wss_sequence(
      stochastic::AutocorrelationModel::iid(), out.burn_in + 1, cfg.samples,
      static_cast<std::size_t>(out.teacher.input_dim()), root.child(1));
  out.dense = hessian::gauss_newton_hessian(out.teacher, out.teacher, batch, out.burn_in, cfg.jobs);
  out.diagonal = hessian::gauss_newton_hessian(diag, out.teacher, batch, out.burn_in, cfg.jobs);
  out.diagonal_reduced = hessian::gauss_newton_hessian(models::to_diagonal_reduced(out.teacher),
                                                       out.teacher, batch, out.burn_in, cfg.jobs);
  return out;
}

std::vector<ConcentrationRow> eigenvalue_concentration(const ConcentrationConfig& cfg) {
  if (cfg.n < 1 || cfg.draws < 1 || !(cfg.nu >= 0.0 && cfg.nu < 1.0) || cfg.theta0.empty())
    throw DomainError("eigenvalue_concentration: invalid config");
  const stochastic::RngStream root(cfg.seed);
  const double hi = 0.5 * (1.0 + cfg.nu);
  std::vector<std::string> labels;
  for (const char* part : {"Re", "Im"})
    for (Eigen::Index i = 0; i < cfg.n; ++i) labels.push_back(std::string(part) + " lambda[" + std::to_string(i) + "]");

  std::vector<ConcentrationRow> rows;
  for (std::size_t k = 0; k < cfg.draws; ++k) {
    stochastic::RngStream rng = root.child(k);
    std::vector<double> mag(static_cast<std::size_t>(cfg.n)), u(mag.size());
    for (std::size_t i = 0; i < mag.size(); ++i) {
      mag[i] = rng.uniform(cfg.nu, hi);
      u[i] = rng.uniform(-1.0, 1.0);
    }
    const Eigen::MatrixXcd b = models::complex_gaussian(cfg.n, 1, 1, rng) * std::sqrt(2.0);
    const Eigen::MatrixXcd c = models::complex_gaussian(1, cfg.n, 1, rng) * std::sqrt(2.0);
    const std::vector<cd> bv(b.data(), b.data() + b.size()), cv(c.data(), c.data() + c.size());
    for (double t0 : cfg.theta0) {
      std::vector<cd> lam(mag.size());
      for (std::size_t i = 0; i < mag.size(); ++i) lam[i] = std::polar(mag[i], t0 * u[i]);
      const hessian::HessianReport r =
          hessian::make_report(analytic::full_hessian_ri(bv, cv, lam, cfg.rho), labels);
      rows.push_back({t0, k, r.metrics.axis_alignment, r.metrics.mean_top_k_ipr()});
    }
  }
  return rows;
}

std::vector<double> mean_alignment_by_theta(const std::vector<ConcentrationRow>& rows,
                                            const std::vector<double>& theta0) {
  std::vector<double> out;
  for (double t : theta0) {
    double s = 0.0, n = 0.0;
    for (const auto& r : rows)
      if (r.theta0 == t) {
        s += r.axis_alignment;
        n += 1.0;
      }
    out.push_back(n > 0.0 ? s / n : 0.0);
  }
  return out;
}

}  // namespace memcurse::experiments
