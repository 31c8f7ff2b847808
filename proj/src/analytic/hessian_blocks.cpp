#include "memcurse/analytic/hessian_blocks.hpp"

#include <cmath>

#include "memcurse/analytic/variance.hpp"
#include "memcurse/errors.hpp"

namespace memcurse::analytic {

namespace {

struct CrossTerms {
  complex a;  // b_i b_j c_i c_j S(λi, λj)
  complex b;  // b_i b̄_j c_i c̄_j S(λi, λ̄j)
};

CrossTerms cross_terms(std::size_t i, std::size_t j, std::span<const complex> b,
                       std::span<const complex> c, std::span<const complex> lambda, double rho) {
  const std::size_t n = lambda.size();
  if (b.size() != n || c.size() != n) throw DimensionError("hessian block: b, c, lambda sizes differ");
  if (i >= n || j >= n) throw DimensionError("hessian block: index out of range");
  const complex a = b[i] * b[j] * c[i] * c[j] * s_kernel(lambda[i], lambda[j], rho);
  const complex bb =
      b[i] * std::conj(b[j]) * c[i] * std::conj(c[j]) * s_kernel(lambda[i], std::conj(lambda[j]), rho);
  return {a, bb};
}

struct PolarCoords {
  double nu, theta, nu_prime, theta_prime;
};

PolarCoords polar_coords(complex l, const Parametrization& pn, const Parametrization& pt) {
  const double nu = std::abs(l);
  const double theta = std::arg(l);
  return {nu, theta, pn.derivative(pn.inverse(nu)), pt.derivative(pt.inverse(theta, nu), nu)};
}

}  // namespace

Eigen::Matrix2d hessian_block_ri(std::size_t i, std::size_t j, std::span<const complex> b,
                                 std::span<const complex> c, std::span<const complex> lambda,
                                 double rho) {
  const auto [a, bb] = cross_terms(i, j, b, c, lambda, rho);
  Eigen::Matrix2d h;
  h << (a + bb).real(), (-a + bb).imag(), (-a - bb).imag(), (-a + bb).real();
  return 0.5 * h;
}

Eigen::Matrix2d hessian_block_polar(std::size_t i, std::size_t j, std::span<const complex> b,
                                    std::span<const complex> c, std::span<const complex> lambda,
                                    const Parametrization& param_nu,
                                    const Parametrization& param_theta, double rho) {
  const auto [a, bb] = cross_terms(i, j, b, c, lambda, rho);
  const PolarCoords pi = polar_coords(lambda[i], param_nu, param_theta);
  const PolarCoords pj = polar_coords(lambda[j], param_nu, param_theta);
  const complex ap = std::polar(1.0, pi.theta + pj.theta) * a;
  const complex bp = std::polar(1.0, pi.theta - pj.theta) * bb;
  const double si = pi.nu * pi.theta_prime;
  const double sj = pj.nu * pj.theta_prime;
  Eigen::Matrix2d h;
  h(0, 0) = pi.nu_prime * pj.nu_prime * (ap + bp).real();
  h(0, 1) = pi.nu_prime * sj * (-ap + bp).imag();
  h(1, 0) = si * pj.nu_prime * (-ap - bp).imag();
  h(1, 1) = si * sj * (-ap + bp).real();
  return 0.5 * h;
}

double lambda_hessian_trace(std::span<const complex> b, std::span<const complex> c,
                            std::span<const complex> lambda, double rho) {
  if (b.size() != lambda.size() || c.size() != lambda.size())
    throw DimensionError("lambda_hessian_trace: sizes differ");
  double tr = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i)
    tr += std::norm(b[i]) * std::norm(c[i]) * s_kernel(lambda[i], std::conj(lambda[i]), rho).real();
  return tr;
}

namespace {

template <class Block>
Eigen::MatrixXd assemble(std::size_t n, Block block) {
  Eigen::MatrixXd h(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::Matrix2d blk = block(i, j);
      h(i, j) = blk(0, 0);
      h(i, n + j) = blk(0, 1);
      h(n + i, j) = blk(1, 0);
      h(n + i, n + j) = blk(1, 1);
    }
  return h;
}

}  // namespace

Eigen::MatrixXd full_hessian_ri(std::span<const complex> b, std::span<const complex> c,
                                std::span<const complex> lambda, double rho) {
  return assemble(lambda.size(), [&](std::size_t i, std::size_t j) {
    return hessian_block_ri(i, j, b, c, lambda, rho);
  });
}

Eigen::MatrixXd full_hessian_polar(std::span<const complex> b, std::span<const complex> c,
                                   std::span<const complex> lambda,
                                   const Parametrization& param_nu,
                                   const Parametrization& param_theta, double rho) {
  return assemble(lambda.size(), [&](std::size_t i, std::size_t j) {
    return hessian_block_polar(i, j, b, c, lambda, param_nu, param_theta, rho);
  });
}

}  // namespace memcurse::analytic
