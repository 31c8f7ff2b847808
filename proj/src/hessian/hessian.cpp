#include "memcurse/hessian/hessian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <mutex>
#include <thread>

#include "memcurse/errors.hpp"
#include "memcurse/models/serialization.hpp"

namespace memcurse::hessian {

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& H, double tol) {
  if (H.rows() != H.cols()) throw DimensionError("symmetric_eigen: matrix must be square");
  const Eigen::Index p = H.rows();
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw ContractError("symmetric_eigen: matrix is not symmetric");

  Eigen::MatrixXd a = 0.5 * (H + H.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(p, p);
  const double target = tol * a.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > 100) throw ConvergenceError("symmetric_eigen: Jacobi did not converge", 100);
    for (Eigen::Index i = 0; i < p - 1; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        // Rotation zeroing a(i,j): t = tan φ with the smaller root for stability.
        const double tau = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (Eigen::Index k = 0; k < p; ++k) {
          const double aki = a(k, i), akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double aik = a(i, k), ajk = a(j, k);
          a(i, k) = c * aik - s * ajk;
          a(j, k) = s * aik + c * ajk;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double vki = v(k, i), vkj = v(k, j);
          v(k, i) = c * vki - s * vkj;
          v(k, j) = s * vki + c * vkj;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.values.resize(p);
  out.vectors.resize(p, p);
  out.sweeps = sweep;
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

double inverse_participation_ratio(const Eigen::VectorXd& v) {
  const double s2 = v.squaredNorm();
  const double s4 = v.array().pow(4).sum();
  if (s4 == 0.0) throw DomainError("inverse_participation_ratio: zero vector");
  return s2 * s2 / s4;
}

double DiagonalityMetrics::mean_top_k_ipr() const {
  if (top_k_ipr.empty()) return 0.0;
  return std::accumulate(top_k_ipr.begin(), top_k_ipr.end(), 0.0) /
         static_cast<double>(top_k_ipr.size());
}

DiagonalityMetrics diagonality_metrics(const HessianReport& report, std::size_t top_k) {
  DiagonalityMetrics m;
  const Eigen::Index k =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(top_k), report.eigenvectors.cols());
  for (Eigen::Index i = 0; i < k; ++i)
    m.top_k_ipr.push_back(inverse_participation_ratio(report.eigenvectors.col(i)));
  const double total = report.matrix.cwiseAbs().sum();
  m.axis_alignment = total > 0.0 ? report.matrix.diagonal().cwiseAbs().sum() / total : 1.0;
  return m;
}

std::vector<Eigen::Index> HessianReport::indices_of(const std::string& group) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < param_labels.size(); ++i) {
    const std::string& l = param_labels[i];
    if (l.compare(0, group.size(), group) == 0 && l.size() > group.size() && l[group.size()] == '[')
      idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

HessianReport make_report(Eigen::MatrixXd matrix, std::vector<std::string> labels,
                          std::size_t top_k) {
  if (static_cast<Eigen::Index>(labels.size()) != matrix.rows())
    throw DimensionError("make_report: label count does not match matrix size");
  HessianReport r;
  r.matrix = std::move(matrix);
  r.param_labels = std::move(labels);
  const SymmetricEigen e = symmetric_eigen(r.matrix);
  r.eigenvalues = e.values;
  r.eigenvectors = e.vectors;
  r.metrics = diagonality_metrics(r, top_k);
  return r;
}

std::size_t burn_in_length(double max_radius, double tol) {
  if (max_radius >= 1.0) throw DomainError("burn_in_length: spectral radius must be < 1");
  if (max_radius <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(max_radius)));
}

namespace {

constexpr std::size_t kChunk = 64;

struct ChunkResult {
  Eigen::MatrixXd gn;
  double sq_residual = 0.0;
};

ChunkResult accumulate_chunk(const models::RecurrentCell& student,
                             const models::RecurrentCell& teacher,
                             const stochastic::SequenceBatch& batch, std::size_t burn_in,
                             std::size_t begin, std::size_t end, Eigen::Index p) {
  const std::size_t len = burn_in + 1;
  const Eigen::Index d_in = static_cast<Eigen::Index>(batch.dim);
  const Eigen::Index d_out = models::output_dim(student);
  ChunkResult out{Eigen::MatrixXd::Zero(p, p), 0.0};
  models::TimeSeries x(len, Eigen::MatrixXd(d_in, 1));
  models::TimeSeries e(len, Eigen::MatrixXd::Zero(d_out, 1));
  Eigen::MatrixXd J(p, d_out);
  for (std::size_t s = begin; s < end; ++s) {
    for (std::size_t t = 0; t < len; ++t)
      for (Eigen::Index k = 0; k < d_in; ++k)
        x[t](k, 0) = batch(s, t, static_cast<std::size_t>(k));
    const models::Trajectory tr = models::forward(student, x);
    const Eigen::MatrixXd r = tr.outputs.back() - models::forward(teacher, x).outputs.back();
    out.sq_residual += r.squaredNorm();
    for (Eigen::Index k = 0; k < d_out; ++k) {
      e.back().setZero();
      e.back()(k, 0) = 1.0;
      J.col(k) = models::backward(student, x, tr, e).gradients.flatten();
    }
    out.gn.noalias() += J * J.transpose();
  }
  return out;
}

}  // namespace

HessianReport gauss_newton_hessian(const models::RecurrentCell& student,
                                   const models::RecurrentCell& teacher,
                                   const stochastic::SequenceBatch& batch, std::size_t burn_in,
                                   unsigned jobs) {
  if (models::input_dim(student) != static_cast<Eigen::Index>(batch.dim) ||
      models::input_dim(teacher) != static_cast<Eigen::Index>(batch.dim))
    throw DimensionError("gauss_newton_hessian: input dimension mismatch");
  if (models::output_dim(student) != models::output_dim(teacher))
    throw DimensionError("gauss_newton_hessian: output dimension mismatch");
  if (batch.length < burn_in + 1)
    throw DimensionError("gauss_newton_hessian: sequences shorter than burn_in + 1");
  if (batch.count == 0) throw DomainError("gauss_newton_hessian: empty batch");

  const models::GradientBundle params = models::parameters(student);
  const Eigen::Index p = params.size();
  const std::size_t n_chunks = (batch.count + kChunk - 1) / kChunk;
  std::vector<ChunkResult> partial(n_chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      try {
        partial[c] = accumulate_chunk(student, teacher, batch, burn_in, c * kChunk,
                                      std::min(batch.count, (c + 1) * kChunk), p);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_chunks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p, p);
  double sq = 0.0;
  for (const auto& c : partial) {
    H += c.gn;
    sq += c.sq_residual;
  }
  const double n = static_cast<double>(batch.count);
  H /= n;
  H = 0.5 * (H + H.transpose()).eval();

  const std::vector<std::string> labels = params.element_labels();
  std::vector<std::string> bad;
  for (Eigen::Index i = 0; i < p; ++i)
    if (!H.row(i).allFinite()) bad.push_back(labels[static_cast<std::size_t>(i)]);
  if (!bad.empty()) throw OverflowError("gauss_newton_hessian: non-finite curvature", bad);

  HessianReport r = make_report(std::move(H), labels);
  r.residual_rms = std::sqrt(sq / n);
  r.samples = batch.count;
  return r;
}

Eigen::VectorXd adam_effective_lr(const AdamProbe& probe) {
  if (probe.step_count <= 0) throw ContractError("adam_effective_lr: probe has no recorded steps");
  if ((probe.second_moment.array() < 0.0).any())
    throw DomainError("adam_effective_lr: negative second moment");
  const double correction = 1.0 - std::pow(probe.beta2, static_cast<double>(probe.step_count));
  return (probe.alpha / ((probe.second_moment.array() / correction).sqrt() + probe.eps)).matrix();
}

nlohmann::json report_to_json(const HessianReport& report) {
  nlohmann::json j;
  j["param_labels"] = report.param_labels;
  j["matrix"] = models::matrix_to_json(report.matrix);
  j["eigenvalues"] = std::vector<double>(report.eigenvalues.data(),
                                         report.eigenvalues.data() + report.eigenvalues.size());
  j["eigenvectors"] = models::matrix_to_json(report.eigenvectors);
  j["top_k_ipr"] = report.metrics.top_k_ipr;
  j["axis_alignment"] = report.metrics.axis_alignment;
  j["residual_rms"] = report.residual_rms;
  j["samples"] = report.samples;
  return j;
}

}  // namespace memcurse::hessian
