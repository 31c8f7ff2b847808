#include "memcurse/models/teacher.hpp"

#include <cmath>
#include <numbers>

#include "memcurse/errors.hpp"

namespace memcurse::models {

namespace {
using cd = std::complex<double>;
}

Eigen::MatrixXd lecun_truncated_normal(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                                       RngStream& rng) {
  const double std = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1))) /
                     kTruncatedNormalStd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * rng.truncated_normal(2.0);
  return m;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double std, RngStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std * rng.normal();
  return m;
}

Eigen::VectorXcd transform_eigenvalues(const Eigen::VectorXcd& lambda, double nu, double theta0) {
  Eigen::VectorXcd out(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double r = nu + (1.0 - nu) * std::tanh(std::abs(lambda(k)));
    if (lambda(k).imag() == 0.0) {
      // Real eigenvalues keep their sign so the reassembled matrix stays real.
      out(k) = lambda(k).real() < 0.0 ? -r : r;
    } else {
      out(k) = std::polar(r, std::arg(lambda(k)) * theta0 / std::numbers::pi);
    }
  }
  return out;
}

namespace {

void check_teacher_args(Eigen::Index n, double nu, double theta0) {
  if (n < 1) throw DomainError("teacher: n must be >= 1");
  if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("teacher: nu must lie in [0, 1)");
  if (!(theta0 > 0.0 && theta0 <= std::numbers::pi))
    throw DomainError("teacher: theta0 must lie in (0, pi]");
}

void fill_io(DenseLinearSSM& ssm, Eigen::Index n, const TeacherOptions& opt, RngStream rng) {
  ssm.B = lecun_truncated_normal(n, opt.input_dim, opt.input_dim, rng);
  ssm.C = lecun_truncated_normal(opt.output_dim, n, n, rng);
  ssm.D = lecun_truncated_normal(opt.output_dim, opt.input_dim, opt.input_dim, rng);
}

}  // namespace

DenseLinearSSM build_teacher(Eigen::Index n, double nu, double theta0, const RngStream& stream,
                             const TeacherOptions& options) {
  check_teacher_args(n, nu, theta0);
  std::string last_error;
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    const RngStream base = stream.child(static_cast<std::uint64_t>(attempt));
    RngStream rng_a = base.child(0);
    const Eigen::MatrixXd a0 = gaussian_matrix(n, n, 1.0 / std::sqrt(static_cast<double>(n)), rng_a);
    try {
      const Diagonalization d = diagonalize(a0);
      const Eigen::VectorXcd lam = transform_eigenvalues(d.lambda, nu, theta0);
      const Eigen::MatrixXcd ac = d.P * lam.asDiagonal() * d.P_inv;
      if (ac.imag().cwiseAbs().maxCoeff() > 1e-10) {
        last_error = "reassembled matrix is not real";
        continue;
      }
      DenseLinearSSM ssm;
      ssm.A = ac.real();
      Diagonalization check{d.P, lam, d.P_inv, 0};
      if (reconstruction_residual(check, ssm.A) > 1e-8) {
        last_error = "reconstruction residual too large";
        continue;
      }
      fill_io(ssm, n, options, base.child(1));
      return ssm;
    } catch (const ConvergenceError& e) {
      last_error = e.what();
    }
  }
  throw ConvergenceError("build_teacher: diagonalization failed on every retry: " + last_error,
                         options.max_retries);
}

DenseLinearSSM build_teacher_eigenbasis(Eigen::Index n, double nu, double theta0,
                                        const RngStream& stream, const TeacherOptions& options) {
  check_teacher_args(n, nu, theta0);
  RngStream rng = stream.child(0);
  const double r_hi = nu + (1.0 - nu) * std::tanh(1.0);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    const double r = rng.uniform(nu, r_hi);
    const double phi = theta0 * (1.0 - rng.uniform());  // (0, θ0]
    block(k, k) = r * std::cos(phi);
    block(k, k + 1) = -r * std::sin(phi);
    block(k + 1, k) = r * std::sin(phi);
    block(k + 1, k + 1) = r * std::cos(phi);
  }
  if (n % 2 == 1) block(n - 1, n - 1) = rng.uniform(nu, r_hi);
  const Eigen::MatrixXd g = gaussian_matrix(n, n, 1.0, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) s(k) = rng.uniform(0.5, 2.0);
  const Eigen::MatrixXd m = q * s.asDiagonal();
  const Eigen::MatrixXd m_inv = s.cwiseInverse().asDiagonal() * q.transpose();
  DenseLinearSSM ssm;
  ssm.A = m * block * m_inv;
  fill_io(ssm, n, options, stream.child(1));
  return ssm;
}

DiagonalComplexCell to_diagonal(const DenseLinearSSM& ssm) {
  ssm.validate();
  const Diagonalization d = diagonalize(ssm.A);
  return DiagonalComplexCell::cartesian(d.lambda, d.P_inv * ssm.B.cast<cd>(),
                                        ssm.C.cast<cd>() * d.P, ssm.D);
}

DiagonalComplexCell to_diagonal_reduced(const DenseLinearSSM& ssm) {
  ssm.validate();
  const Diagonalization d = diagonalize(ssm.A);
  const Eigen::MatrixXcd b = d.P_inv * ssm.B.cast<cd>();
  const Eigen::MatrixXcd c = ssm.C.cast<cd>() * d.P;
  std::vector<Eigen::Index> keep;
  std::vector<double> scale;
  for (Eigen::Index k = 0; k < d.lambda.size(); ++k) {
    if (d.lambda(k).imag() > 0.0) {
      keep.push_back(k);
      scale.push_back(2.0);
    } else if (d.lambda(k).imag() == 0.0) {
      keep.push_back(k);
      scale.push_back(1.0);
    }
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::VectorXcd lam(m);
  Eigen::MatrixXcd br(m, b.cols()), cr(c.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index k = keep[static_cast<std::size_t>(j)];
    lam(j) = d.lambda(k);
    br.row(j) = b.row(k);
    cr.col(j) = scale[static_cast<std::size_t>(j)] * c.col(k);
    if (lam(j).imag() == 0.0) {
      br.row(j) = br.row(j).real().cast<cd>();
      cr.col(j) = cr.col(j).real().cast<cd>();
    }
  }
  return DiagonalComplexCell::cartesian(lam, br, cr, ssm.D);
}

Eigen::VectorXcd sample_ring_eigenvalues(Eigen::Index m, double nu_lo, double nu_hi,
                                         double theta_lo, double theta_hi, RngStream& rng) {
  if (!(nu_lo >= 0.0 && nu_lo <= nu_hi && nu_hi < 1.0))
    throw DomainError("ring: require 0 <= nu_lo <= nu_hi < 1");
  Eigen::VectorXcd out(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double r = std::sqrt(rng.uniform(nu_lo * nu_lo, nu_hi * nu_hi));
    out(k) = std::polar(r, rng.uniform(theta_lo, theta_hi));
  }
  return out;
}

Eigen::MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                                  RngStream& rng) {
  const double std = 1.0 / std::sqrt(2.0 * static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double re = rng.normal();
      m(r, c) = cd(std * re, std * rng.normal());
    }
  return m;
}

DiagonalComplexCell init_complex_diagonal(Eigen::Index m, Eigen::Index input_dim,
                                          Eigen::Index output_dim, double nu_lo, double nu_hi,
                                          double theta_max, RngStream& rng) {
  const Eigen::VectorXcd lam = sample_ring_eigenvalues(m, nu_lo, nu_hi, 0.0, theta_max, rng);
  Eigen::MatrixXcd b = complex_gaussian(m, input_dim, input_dim, rng);
  Eigen::MatrixXcd c = complex_gaussian(output_dim, m, m, rng);
  Eigen::MatrixXd d = lecun_truncated_normal(output_dim, input_dim, input_dim, rng);
  return DiagonalComplexCell::cartesian(lam, std::move(b), std::move(c), std::move(d));
}

DiagonalComplexCell init_lru(Eigen::Index m, Eigen::Index input_dim, Eigen::Index output_dim,
                             double nu_lo, double nu_hi, double theta_max, RngStream& rng) {
  // The exponential angle map needs θ > 0 and ν > 0.
  const double lo = std::max(nu_lo, 1e-6);
  Eigen::VectorXcd lam = sample_ring_eigenvalues(m, lo, std::max(lo, nu_hi), 0.0, theta_max, rng);
  for (Eigen::Index k = 0; k < m; ++k)
    if (std::arg(lam(k)) <= 1e-8) lam(k) = std::polar(std::abs(lam(k)), 1e-8);
  Eigen::MatrixXcd b = complex_gaussian(m, input_dim, input_dim, rng);
  Eigen::MatrixXcd c = complex_gaussian(output_dim, m, m, rng);
  Eigen::MatrixXd d = lecun_truncated_normal(output_dim, input_dim, input_dim, rng);
  return make_lru(lam, std::move(b), std::move(c), std::move(d));
}

BlockDiagonalCell init_block_diagonal(Eigen::Index blocks, Eigen::Index input_dim,
                                      Eigen::Index output_dim, double nu_lo, double nu_hi,
                                      double theta_max, RngStream& rng) {
  const Eigen::VectorXcd lam = sample_ring_eigenvalues(blocks, nu_lo, nu_hi, 0.0, theta_max, rng);
  BlockDiagonalCell cell;
  cell.blocks.resize(blocks, 4);
  for (Eigen::Index k = 0; k < blocks; ++k) {
    const double re = lam(k).real(), im = lam(k).imag();
    cell.blocks.row(k) << re, -im, im, re;
  }
  const Eigen::Index n = 2 * blocks;
  cell.B = lecun_truncated_normal(n, input_dim, input_dim, rng);
  cell.C = lecun_truncated_normal(output_dim, n, n, rng);
  cell.D = lecun_truncated_normal(output_dim, input_dim, input_dim, rng);
  return cell;
}

LSTMCell chrono_init(Eigen::Index hidden, Eigen::Index input_dim, double nu,
                     const RngStream& stream) {
  if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("chrono_init: nu must lie in [0, 1)");
  if (hidden < 1 || input_dim < 1) throw DomainError("chrono_init: dimensions must be positive");
  RngStream rng = stream.child(0);
  LSTMCell cell;
  cell.W = lecun_truncated_normal(4 * hidden, input_dim, input_dim, rng);
  cell.U = lecun_truncated_normal(4 * hidden, hidden, hidden, rng);
  cell.bias = Eigen::VectorXd::Zero(4 * hidden);
  RngStream tau_rng = stream.child(1);
  for (Eigen::Index k = 0; k < hidden; ++k) {
    double tau = tau_rng.uniform(1.0 / (1.0 - nu), 2.0 / (1.0 - nu));
    tau = std::max(tau, 1.0 + 1e-6);
    const double bf = std::log(tau - 1.0);
    cell.bias(hidden + k) = bf;
    cell.bias(k) = -bf;
  }
  return cell;
}

}  // namespace memcurse::models
