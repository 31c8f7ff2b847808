#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "memcurse/models/cells.hpp"
#include "memcurse/models/linalg.hpp"
#include "memcurse/stochastic/rng.hpp"

namespace memcurse::models {

using stochastic::RngStream;

/// Variance correction of a standard normal truncated to ±2σ.
inline constexpr double kTruncatedNormalStd = 0.87962566103423978;

/// rows x cols matrix with entries from a ±2σ truncated normal, rescaled to
/// variance 1/fan_in.
Eigen::MatrixXd lecun_truncated_normal(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                                       RngStream& rng);

/// Dense matrix with i.i.d. N(0, std²) entries.
Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double std, RngStream& rng);

/// Maps eigenvalue magnitudes r -> ν + (1-ν) tanh(r) and angles φ -> φ θ0/π.
Eigen::VectorXcd transform_eigenvalues(const Eigen::VectorXcd& lambda, double nu, double theta0);

struct TeacherOptions {
  Eigen::Index input_dim = 1;
  Eigen::Index output_dim = 1;
  int max_retries = 8;
};

/// Random stable dense teacher. A ~ N(0, 1/n), diagonalized, eigenvalues
/// transformed, reassembled; B, C, D truncated-normal fan-in. Failed
/// diagonalizations retry on the next child stream.
DenseLinearSSM build_teacher(Eigen::Index n, double nu, double theta0, const RngStream& stream,
                             const TeacherOptions& options = {});

/// Dense teacher assembled from sampled conjugate eigenpairs and a random
/// well-conditioned real eigenbasis (no eigensolver involved). Magnitudes lie
/// in [ν, ν + (1-ν) tanh 1], angles in (0, θ0]; odd n adds one real
/// eigenvalue.
DenseLinearSSM build_teacher_eigenbasis(Eigen::Index n, double nu, double theta0,
                                        const RngStream& stream, const TeacherOptions& options = {});

/// Equivalent complex-diagonal cell, one unit per eigenvalue
/// (b = P⁻¹B, c = CP, same output).
DiagonalComplexCell to_diagonal(const DenseLinearSSM& ssm);

/// Equivalent complex-diagonal cell keeping one unit per conjugate pair
/// (readout doubled) and one per real eigenvalue.
DiagonalComplexCell to_diagonal_reduced(const DenseLinearSSM& ssm);

/// m eigenvalues with |λ| uniform-in-area on [nu_lo, nu_hi] and angle uniform on
/// [theta_lo, theta_hi].
Eigen::VectorXcd sample_ring_eigenvalues(Eigen::Index m, double nu_lo, double nu_hi,
                                         double theta_lo, double theta_hi, RngStream& rng);

/// Complex readout/input weights with real and imaginary parts N(0, 1/(2 fan_in)).
Eigen::MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                                  RngStream& rng);

/// Random complex-diagonal student (Cartesian, no normalization).
DiagonalComplexCell init_complex_diagonal(Eigen::Index m, Eigen::Index input_dim,
                                          Eigen::Index output_dim, double nu_lo, double nu_hi,
                                          double theta_max, RngStream& rng);
/// Random LRU student.
DiagonalComplexCell init_lru(Eigen::Index m, Eigen::Index input_dim, Eigen::Index output_dim,
                             double nu_lo, double nu_hi, double theta_max, RngStream& rng);
/// Random block-diagonal student; block k is r_k R(φ_k) with r_k, φ_k from the ring.
BlockDiagonalCell init_block_diagonal(Eigen::Index blocks, Eigen::Index input_dim,
                                      Eigen::Index output_dim, double nu_lo, double nu_hi,
                                      double theta_max, RngStream& rng);

/// Chrono-initialized LSTM: τ ~ U[1/(1-ν), 2/(1-ν)] clamped to ≥ 1 + 1e-6,
/// forget bias log(τ-1), input bias its negative, other weights fan-in.
LSTMCell chrono_init(Eigen::Index hidden, Eigen::Index input_dim, double nu, const RngStream& stream);

}  // namespace memcurse::models
