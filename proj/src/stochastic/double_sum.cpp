#include "memcurse/stochastic/double_sum.hpp"

#include <cmath>

#include "memcurse/errors.hpp"

namespace memcurse::stochastic {

namespace {

using cd = std::complex<double>;

constexpr std::size_t kMaxTerms = 100'000'000;

void check_radius(cd alpha, cd beta) {
  if (!(std::abs(alpha) < 1.0) || !(std::abs(beta) < 1.0))
    throw DivergenceError("double sum requires |alpha| < 1 and |beta| < 1");
  if (std::abs(1.0 - alpha * beta) < 1e-12) throw DivergenceError("double sum: 1 - alpha*beta ~ 0");
}

// F = u0 + Σ(α^Δ+β^Δ)u_Δ, W = ΣΔ(α^Δ+β^Δ)u_Δ, Fa = ΣΔα^{Δ-1}u_Δ.
struct Series {
  cd f{0.0, 0.0};
  cd w{0.0, 0.0};
  cd fa{0.0, 0.0};
};

Series accumulate(cd alpha, cd beta, const LagFunction& u, std::size_t n_terms) {
  Series s;
  s.f = u.value(0);
  cd pa = 1.0, pb = 1.0;  // α^{Δ-1}, β^{Δ-1}
  for (std::size_t d = 1; d < n_terms; ++d) {
    const double ud = u.value(d);
    const double dd = static_cast<double>(d);
    s.fa += dd * pa * ud;
    pa *= alpha;
    pb *= beta;
    s.f += (pa + pb) * ud;
    s.w += dd * (pa + pb) * ud;
  }
  return s;
}

}  // namespace

LagFunction lag_function(const AutocorrelationModel& model) {
  return {[model](std::size_t d) { return model.at(static_cast<long long>(d)); }, 1.0};
}

std::size_t truncation_length(double r, double sup, double tol, bool weighted) {
  if (sup == 0.0 || r == 0.0) return 2;
  std::size_t n = 1;
  double rn = r;
  for (;;) {
    const double nn = static_cast<double>(n);
    double bound = 2.0 * sup * rn / (1.0 - r);
    if (weighted) bound = 2.0 * sup * rn * (nn / (1.0 - r) + r / ((1.0 - r) * (1.0 - r))) / r;
    if (bound < tol) return std::max<std::size_t>(n, 2);
    if (++n > kMaxTerms) throw ConvergenceError("double-sum truncation", static_cast<int>(n));
    rn *= r;
  }
}

cd geometric_double_sum(cd alpha, cd beta, const LagFunction& u, double tol) {
  check_radius(alpha, beta);
  const double r = std::max(std::abs(alpha), std::abs(beta));
  const Series s = accumulate(alpha, beta, u, truncation_length(r, u.sup, tol, false));
  return s.f / (1.0 - alpha * beta);
}

cd weighted_double_sum(cd alpha, cd beta, const LagFunction& u, double tol) {
  check_radius(alpha, beta);
  const double r = std::max(std::abs(alpha), std::abs(beta));
  const Series s = accumulate(alpha, beta, u, truncation_length(r, u.sup, tol, true));
  const cd p = alpha * beta;
  const cd q = 1.0 - p;
  return s.f * (1.0 + p) / (q * q * q) + s.w / (q * q);
}

cd geometric_double_sum_dalpha(cd alpha, cd beta, const LagFunction& u, double tol) {
  check_radius(alpha, beta);
  const double r = std::max(std::abs(alpha), std::abs(beta));
  const Series s = accumulate(alpha, beta, u, truncation_length(r, u.sup, tol, true));
  const cd q = 1.0 - alpha * beta;
  return s.fa / q + beta * s.f / (q * q);
}

}  // namespace memcurse::stochastic
