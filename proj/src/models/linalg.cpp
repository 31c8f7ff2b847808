#include "memcurse/models/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "memcurse/errors.hpp"

namespace memcurse::models {

namespace {

using cd = std::complex<double>;

Eigen::MatrixXd hessenberg(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    Eigen::VectorXd v = a.col(k).tail(n - k - 1);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    const double alpha = v(0) > 0 ? -norm : norm;
    v(0) -= alpha;
    const double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;
    auto rows = a.bottomRows(n - k - 1);
    rows -= 2.0 * v * (v.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= 2.0 * (cols * v) * v.transpose();
    a.col(k).tail(n - k - 2).setZero();
  }
  return a;
}

// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
Eigen::VectorXcd hessenberg_qr(Eigen::MatrixXcd h, int& total_iterations) {
  const Eigen::Index n = h.rows();
  Eigen::VectorXcd ev(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const int max_iterations = 100 * static_cast<int>(std::max<Eigen::Index>(n, 1));
  total_iterations = 0;
  Eigen::Index hi = n - 1;
  int iter = 0;
  while (hi >= 0) {
    if (hi == 0) {
      ev(0) = h(0, 0);
      break;
    }
    Eigen::Index l = hi;
    while (l > 0) {
      const double scale = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (std::abs(h(l, l - 1)) <= eps * (scale == 0.0 ? 1.0 : scale)) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      ev(hi) = h(hi, hi);
      --hi;
      iter = 0;
      continue;
    }
    if (++total_iterations > max_iterations)
      throw ConvergenceError("diagonalize: shifted QR did not converge", total_iterations);
    ++iter;

    cd mu;
    if (iter % 11 == 0) {
      mu = h(hi, hi) + std::abs(h(hi, hi - 1)) * cd(0.75, 0.4375);  // exceptional shift
    } else {
      const cd a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
      const cd half = 0.5 * (a - d);
      const cd disc = std::sqrt(half * half + b * c);
      const cd m1 = 0.5 * (a + d) + disc, m2 = 0.5 * (a + d) - disc;
      mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    }

    for (Eigen::Index k = l; k <= hi; ++k) h(k, k) -= mu;
    std::vector<std::pair<cd, cd>> rot;
    rot.reserve(static_cast<std::size_t>(hi - l));
    for (Eigen::Index k = l; k < hi; ++k) {
      const cd x = h(k, k), y = h(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      cd c = 1.0, s = 0.0;
      if (r != 0.0) {
        c = x / r;
        s = y / r;
      }
      rot.emplace_back(c, s);
      for (Eigen::Index j = k; j <= hi; ++j) {
        const cd p = h(k, j), q = h(k + 1, j);
        h(k, j) = std::conj(c) * p + std::conj(s) * q;
        h(k + 1, j) = -s * p + c * q;
      }
    }
    for (Eigen::Index k = l; k < hi; ++k) {
      const auto [c, s] = rot[static_cast<std::size_t>(k - l)];
      const Eigen::Index top = std::min(k + 2, hi);
      for (Eigen::Index i = l; i <= top; ++i) {
        const cd p = h(i, k), q = h(i, k + 1);
        h(i, k) = p * c + q * s;
        h(i, k + 1) = -p * std::conj(s) + q * std::conj(c);
      }
    }
    for (Eigen::Index k = l; k <= hi; ++k) h(k, k) += mu;
  }
  return ev;
}

Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXcd& a, cd mu, double scale) {
  const Eigen::Index n = a.rows();
  const cd shift = mu + cd(1e-10 * scale, 1e-11 * scale);
  const Eigen::MatrixXcd m = a - shift * Eigen::MatrixXcd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  Eigen::VectorXcd x(n);
  for (Eigen::Index k = 0; k < n; ++k) x(k) = cd(1.0 + 0.1 * k, 0.05 * k);
  x.normalize();
  for (int it = 0; it < 4; ++it) {
    x = lu.solve(x);
    const double nx = x.norm();
    if (!(nx > 0.0) || !std::isfinite(nx)) throw ConvergenceError("diagonalize: inverse iteration", it);
    x /= nx;
  }
  // Fix the phase: largest component real positive.
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  x *= std::conj(x(imax)) / std::abs(x(imax));
  return x;
}

struct Pairing {
  std::vector<cd> values;
  std::vector<int> partner;  // index of conjugate partner, -1 for real
};

Pairing pair_conjugates(const Eigen::VectorXcd& raw, double scale) {
  const auto n = static_cast<std::size_t>(raw.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(raw(static_cast<Eigen::Index>(i))) > std::abs(raw(static_cast<Eigen::Index>(j)));
  });
  const double tol = 1e-8 * std::max(scale, 1e-300);
  std::vector<bool> used(n, false);
  Pairing out;
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    if (used[i]) continue;
    used[i] = true;
    const cd v = raw(static_cast<Eigen::Index>(i));
    if (std::abs(v.imag()) <= tol) {
      out.values.emplace_back(v.real(), 0.0);
      out.partner.push_back(-1);
      continue;
    }
    std::size_t best = n;
    double best_d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(raw(static_cast<Eigen::Index>(j)) - std::conj(v));
      if (best == n || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    if (best == n || best_d > 1e-6 * std::max(scale, 1.0))
      throw ConvergenceError("diagonalize: unpaired complex eigenvalue of a real matrix", 0);
    used[best] = true;
    cd avg = 0.5 * (v + std::conj(raw(static_cast<Eigen::Index>(best))));
    if (avg.imag() < 0) avg = std::conj(avg);
    const int base = static_cast<int>(out.values.size());
    out.values.push_back(avg);
    out.values.push_back(std::conj(avg));
    out.partner.push_back(base + 1);
    out.partner.push_back(base);
  }
  return out;
}

}  // namespace

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionError("eigenvalues: matrix must be square");
  if (A.size() == 0) return {};
  int iters = 0;
  return hessenberg_qr(hessenberg(A).cast<cd>(), iters);
}

double spectral_radius(const Eigen::MatrixXd& A) {
  const Eigen::VectorXcd ev = eigenvalues(A);
  return ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
}

double reconstruction_residual(const Diagonalization& d, const Eigen::MatrixXd& A) {
  const Eigen::MatrixXcd rec = d.P * d.lambda.asDiagonal() * d.P_inv;
  const double na = A.norm();
  return (rec - A.cast<cd>()).norm() / (na > 0 ? na : 1.0);
}

Diagonalization diagonalize(const Eigen::MatrixXd& A, double residual_tol) {
  if (A.rows() != A.cols()) throw DimensionError("diagonalize: matrix must be square");
  const Eigen::Index n = A.rows();
  Diagonalization out;
  if (n == 0) return out;
  int iters = 0;
  const Eigen::VectorXcd raw = hessenberg_qr(hessenberg(A).cast<cd>(), iters);
  out.qr_iterations = iters;
  const double scale = std::max(A.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const Pairing pairs = pair_conjugates(raw, scale);

  const Eigen::MatrixXcd ac = A.cast<cd>();
  out.lambda.resize(n);
  out.P.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const cd mu = pairs.values[static_cast<std::size_t>(k)];
    out.lambda(k) = mu;
    const int partner = pairs.partner[static_cast<std::size_t>(k)];
    if (partner >= 0 && partner < k) {
      out.P.col(k) = out.P.col(partner).conjugate();
      continue;
    }
    Eigen::VectorXcd v = inverse_iteration(ac, mu, scale);
    if (partner < 0) {
      Eigen::VectorXd re = v.real();
      v = (re / re.norm()).cast<cd>();
    }
    out.P.col(k) = v;
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.P);
  if (!lu.isInvertible()) throw ConvergenceError("diagonalize: eigenvector matrix is singular", iters);
  out.P_inv = lu.inverse();
  const double res = reconstruction_residual(out, A);
  if (!(res <= residual_tol))
    throw ConvergenceError("diagonalize: reconstruction residual " + std::to_string(res) +
                               " exceeds tolerance",
                           iters);
  return out;
}

}  // namespace memcurse::models
