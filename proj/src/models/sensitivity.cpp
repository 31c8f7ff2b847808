#include "memcurse/models/sensitivity.hpp"

#include <cmath>

#include "memcurse/errors.hpp"
#include "memcurse/models/linalg.hpp"

namespace memcurse::models {

SensitivityNorms sensitivity_decomposition(const DenseLinearSSM& ssm,
                                           const stochastic::SequenceBatch& inputs,
                                           std::size_t horizon) {
  ssm.validate();
  if (static_cast<Eigen::Index>(inputs.dim) != ssm.input_dim())
    throw DimensionError("sensitivity_decomposition: input dimension mismatch");
  if (horizon < 1 || horizon > inputs.length)
    throw DomainError("sensitivity_decomposition: horizon must lie in [1, length]");
  using cd = std::complex<double>;
  const Diagonalization d = diagonalize(ssm.A);
  const Eigen::Index n = ssm.state_dim();
  const Eigen::MatrixXcd pinv_b = d.P_inv * ssm.B.cast<cd>();

  double p_acc = 0.0, l_acc = 0.0, r_acc = 0.0;
  Eigen::VectorXd x(inputs.dim);
  for (std::size_t s = 0; s < inputs.count; ++s) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n), sl = Eigen::VectorXcd::Zero(n);
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t t = 0; t < horizon; ++t) {
      for (std::size_t k = 0; k < inputs.dim; ++k) x(static_cast<Eigen::Index>(k)) = inputs(s, t, k);
      sl = d.lambda.cwiseProduct(sl) + h;
      const Eigen::VectorXd bx = ssm.B * x;
      r = d.lambda.asDiagonal() * r;
      r.rowwise() += bx.cast<cd>().transpose();
      h = d.lambda.cwiseProduct(h) + pinv_b * x.cast<cd>();
    }
    p_acc += static_cast<double>(n) * h.squaredNorm();
    l_acc += sl.squaredNorm();
    r_acc += r.squaredNorm();
  }
  const double c = inputs.count ? static_cast<double>(inputs.count) : 1.0;
  return {std::sqrt(p_acc / c), std::sqrt(l_acc / c), std::sqrt(r_acc / c)};
}

}  // namespace memcurse::models
