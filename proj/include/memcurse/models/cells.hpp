#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "memcurse/analytic/parametrization.hpp"
#include "memcurse/models/gradient_bundle.hpp"
#include "memcurse/stochastic/process.hpp"

namespace memcurse::models {

/// Time-major sequence data: entry t is a (dim x batch) matrix.
using TimeSeries = std::vector<Eigen::MatrixXd>;

TimeSeries to_time_major(const stochastic::SequenceBatch& batch);
stochastic::SequenceBatch from_time_major(const TimeSeries& series);

/// Cached forward pass. `states[0]` is h_0 = 0 and `states[t+1]` follows
/// input t; outputs[t] reads states[t+1].
struct Trajectory {
  TimeSeries outputs;
  TimeSeries states;
  std::vector<Eigen::MatrixXcd> complex_states;
  TimeSeries cell_states;  ///< LSTM c_t, same indexing as states
  TimeSeries gates;        ///< LSTM activated gates [i; f; g; o] per input step
};

struct BackwardResult {
  GradientBundle gradients;
  TimeSeries input_errors;
};

/// h_t = A h_{t-1} + B x_t, y_t = C h_t + D x_t.
struct DenseLinearSSM {
  Eigen::MatrixXd A, B, C, D;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }

  Trajectory forward(const TimeSeries& x) const;
  BackwardResult backward(const TimeSeries& x, const Trajectory& traj, const TimeSeries& e) const;
  GradientBundle parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  void validate() const;
};

/// Dense-readout linear RNN whose recurrence is block-diagonal with 2x2 blocks.
/// `blocks` row k holds block k as [a00, a01, a10, a11].
struct BlockDiagonalCell {
  Eigen::MatrixXd blocks;
  Eigen::MatrixXd B, C, D;

  Eigen::Index state_dim() const { return 2 * blocks.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index output_dim() const { return C.rows(); }
  Eigen::MatrixXd recurrence() const;

  Trajectory forward(const TimeSeries& x) const;
  BackwardResult backward(const TimeSeries& x, const Trajectory& traj, const TimeSeries& e) const;
  GradientBundle parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  void validate() const;
};

/// h_t = λ ⊙ h_{t-1} + γ(|λ|) ⊙ (b x_t), y_t = Re[c h_t] + d x_t.
///
/// Cartesian cells store (Re λ, Im λ) in (p1, p2). Polar cells store
/// (ω_ν, ω_θ) with ν = magnitude(ω_ν), θ = angle(ω_θ, ν).
struct DiagonalComplexCell {
  enum class Coordinates { Cartesian, Polar };

  Coordinates coords = Coordinates::Cartesian;
  Eigen::VectorXd p1, p2;
  analytic::Parametrization magnitude{analytic::ParamKind::Direct};
  analytic::Parametrization angle{analytic::ParamKind::PolarDirect};
  analytic::NormalizationSpec norm;
  Eigen::MatrixXcd b;  ///< m x input_dim
  Eigen::MatrixXcd c;  ///< output_dim x m
  Eigen::MatrixXd d;   ///< output_dim x input_dim

  static DiagonalComplexCell cartesian(const Eigen::VectorXcd& lambda, Eigen::MatrixXcd b,
                                       Eigen::MatrixXcd c, Eigen::MatrixXd d,
                                       analytic::NormalizationSpec norm = {});
  /// Inverts the parametrizations at the given eigenvalues.
  static DiagonalComplexCell polar(const Eigen::VectorXcd& lambda,
                                   analytic::Parametrization magnitude,
                                   analytic::Parametrization angle, Eigen::MatrixXcd b,
                                   Eigen::MatrixXcd c, Eigen::MatrixXd d,
                                   analytic::NormalizationSpec norm = {});

  Eigen::Index state_dim() const { return p1.size(); }
  Eigen::Index input_dim() const { return b.cols(); }
  Eigen::Index output_dim() const { return c.rows(); }
  Eigen::VectorXcd lambda() const;
  Eigen::VectorXd gamma() const;
  bool is_lru() const;

  Trajectory forward(const TimeSeries& x) const;
  /// Forward with γ fixed to the given values (for stop-gradient checks).
  Trajectory forward_with_gammas(const TimeSeries& x, const Eigen::VectorXd& gamma) const;
  BackwardResult backward(const TimeSeries& x, const Trajectory& traj, const TimeSeries& e) const;
  GradientBundle parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  void validate() const;
};

/// LRU: double-exponential magnitude, exponential angle, γ = √(1-ν²).
DiagonalComplexCell make_lru(const Eigen::VectorXcd& lambda, Eigen::MatrixXcd b,
                             Eigen::MatrixXcd c, Eigen::MatrixXd d, bool stop_gradient = true);

/// Standard LSTM with gate order [input, forget, candidate, output];
/// the output is the hidden state h_t.
struct LSTMCell {
  Eigen::MatrixXd W;     ///< 4n x input_dim
  Eigen::MatrixXd U;     ///< 4n x n
  Eigen::VectorXd bias;  ///< 4n

  Eigen::Index state_dim() const { return U.cols(); }
  Eigen::Index input_dim() const { return W.cols(); }
  Eigen::Index output_dim() const { return U.cols(); }

  Trajectory forward(const TimeSeries& x) const;
  BackwardResult backward(const TimeSeries& x, const Trajectory& traj, const TimeSeries& e) const;
  GradientBundle parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  void validate() const;
};

using RecurrentCell = std::variant<DenseLinearSSM, BlockDiagonalCell, DiagonalComplexCell, LSTMCell>;

/// "dense", "block_diagonal", "complex_diagonal", "lru" or "lstm".
std::string cell_kind(const RecurrentCell& cell);

Trajectory forward(const RecurrentCell& cell, const TimeSeries& inputs);
Trajectory forward(const RecurrentCell& cell, const stochastic::SequenceBatch& inputs);
/// Gradients of Σ_t Σ_batch e_tᵀ y_t.
BackwardResult backward(const RecurrentCell& cell, const TimeSeries& inputs,
                        const Trajectory& traj, const TimeSeries& output_errors);
GradientBundle parameters(const RecurrentCell& cell);
void set_parameters(RecurrentCell& cell, const Eigen::VectorXd& flat);
Eigen::Index input_dim(const RecurrentCell& cell);
Eigen::Index output_dim(const RecurrentCell& cell);

}  // namespace memcurse::models
