#include "memcurse/models/gradient_check.hpp"

#include <cmath>

#include "memcurse/errors.hpp"
#include "memcurse/models/linalg.hpp"
#include "memcurse/models/teacher.hpp"

namespace memcurse::models {

namespace {

double objective(const RecurrentCell& cell, const TimeSeries& x, const TimeSeries& e,
                 const Eigen::VectorXd* frozen_gamma) {
  Trajectory tr;
  if (frozen_gamma) {
    tr = std::get<DiagonalComplexCell>(cell).forward_with_gammas(x, *frozen_gamma);
  } else {
    tr = forward(cell, x);
  }
  double j = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) j += e[t].cwiseProduct(tr.outputs[t]).sum();
  return j;
}

}  // namespace

std::vector<GroupCheck> check_gradients(const RecurrentCell& cell, const TimeSeries& inputs,
                                        const TimeSeries& output_errors, double step) {
  const Trajectory tr = forward(cell, inputs);
  const GradientBundle grad = backward(cell, inputs, tr, output_errors).gradients;
  const Eigen::VectorXd analytic = grad.flatten();
  const Eigen::VectorXd p0 = parameters(cell).flatten();

  Eigen::VectorXd gamma;
  const Eigen::VectorXd* frozen = nullptr;
  if (const auto* dc = std::get_if<DiagonalComplexCell>(&cell)) {
    if (dc->norm.stop_gradient && dc->norm.kind != analytic::NormalizationSpec::Kind::None) {
      gamma = dc->gamma();
      frozen = &gamma;
    }
  }

  Eigen::VectorXd fd(p0.size());
  RecurrentCell work = cell;
  for (Eigen::Index k = 0; k < p0.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(p0(k)));
    Eigen::VectorXd p = p0;
    p(k) = p0(k) + h;
    set_parameters(work, p);
    const double jp = objective(work, inputs, output_errors, frozen);
    p(k) = p0(k) - h;
    set_parameters(work, p);
    const double jm = objective(work, inputs, output_errors, frozen);
    fd(k) = (jp - jm) / (2.0 * h);
  }

  std::vector<GroupCheck> out;
  Eigen::Index offset = 0;
  for (const auto& g : grad.groups()) {
    const Eigen::Index len = g.values.size();
    const Eigen::VectorXd a = analytic.segment(offset, len);
    const Eigen::VectorXd f = fd.segment(offset, len);
    const double denom = std::max({a.norm(), f.norm(), 1e-300});
    out.push_back({g.label, (a - f).norm() / denom, a.norm()});
    offset += len;
  }
  return out;
}

RecurrentCell random_cell(const std::string& kind, Eigen::Index n, Eigen::Index input_dim,
                          Eigen::Index output_dim, double max_radius, stochastic::RngStream& rng) {
  if (kind == "dense") {
    DenseLinearSSM c;
    c.A = gaussian_matrix(n, n, 1.0 / std::sqrt(static_cast<double>(n)), rng);
    const double sr = spectral_radius(c.A);
    if (sr > max_radius) c.A *= max_radius / sr * rng.uniform(0.5, 1.0);
    c.B = gaussian_matrix(n, input_dim, 1.0, rng);
    c.C = gaussian_matrix(output_dim, n, 1.0, rng);
    c.D = gaussian_matrix(output_dim, input_dim, 1.0, rng);
    return c;
  }
  if (kind == "block_diagonal") {
    BlockDiagonalCell c = init_block_diagonal(std::max<Eigen::Index>(n / 2, 1), input_dim,
                                              output_dim, 0.0, max_radius, 3.14159, rng);
    // Break the rotation-scale symmetry so every entry is exercised.
    c.blocks += gaussian_matrix(c.blocks.rows(), 4, 0.02, rng);
    return c;
  }
  if (kind == "complex_diagonal") {
    const Eigen::VectorXcd lam = sample_ring_eigenvalues(n, 0.1, max_radius, -3.1, 3.1, rng);
    return DiagonalComplexCell::cartesian(lam, complex_gaussian(n, input_dim, 1, rng),
                                          complex_gaussian(output_dim, n, 1, rng),
                                          gaussian_matrix(output_dim, input_dim, 1.0, rng));
  }
  if (kind == "lru") {
    return init_lru(n, input_dim, output_dim, 0.1, max_radius, 3.1, rng);
  }
  if (kind == "lstm") {
    LSTMCell c;
    c.W = gaussian_matrix(4 * n, input_dim, 0.7, rng);
    c.U = gaussian_matrix(4 * n, n, 0.7, rng);
    c.bias = gaussian_matrix(4 * n, 1, 0.5, rng).col(0);
    return c;
  }
  throw DomainError("random_cell: unknown kind " + kind);
}

TimeSeries random_series(std::size_t length, Eigen::Index dim, Eigen::Index batch,
                         stochastic::RngStream& rng) {
  TimeSeries out(length);
  for (auto& m : out) m = gaussian_matrix(dim, batch, 1.0, rng);
  return out;
}

}  // namespace memcurse::models
