#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "memcurse/models/cells.hpp"
#include "memcurse/models/gradient_bundle.hpp"
#include "memcurse/stochastic/process.hpp"

namespace memcurse::experiments {

/// encoder -> blocks × { x + GLU([LN] GELU(Rec([LN] x))) } -> decoder.
/// With layer_norm, one normalization precedes the recurrent layer and one
/// precedes the GLU.
struct DeepNetSpec {
  std::string recurrent = "crnn";  ///< "crnn", "lru" or "lstm"
  Eigen::Index input_dim = 64;
  Eigen::Index hidden = 64;
  int blocks = 4;
  bool layer_norm = false;
  double nu = 0.9;
  double theta_max = std::numbers::pi;
  std::string nonlinearity = "gelu";

  void validate() const;
};

struct DeepBlock {
  Eigen::VectorXd ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  models::RecurrentCell rec;
  Eigen::MatrixXd glu_w1, glu_w2;  ///< hidden x hidden; output = (W1 u + b1) ⊙ σ(W2 u + b2)
  Eigen::VectorXd glu_b1, glu_b2;
};

struct DeepNet {
  DeepNetSpec spec;
  Eigen::MatrixXd enc_w, dec_w;
  Eigen::VectorXd enc_b, dec_b;
  std::vector<DeepBlock> blocks;

  /// Labels "enc.W", "block<k>.rec.<group>", "block<k>.glu.W1", "dec.b", ...
  models::GradientBundle parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
};

/// Linear maps fan-in truncated normal with zero biases, unit LayerNorm
/// gains. Recurrent layers: "crnn" is an unnormalized Cartesian complex
/// diagonal cell and "lru" the LRU, both with |λ| on [ν, (1+ν)/2]; "lstm"
/// uses the chrono initialization at ν. Block k draws from stream.child(k+1).
DeepNet init_deep_net(const DeepNetSpec& spec, const stochastic::RngStream& stream);

struct DeepPass {
  double loss = 0.0;                        ///< next-token ½|x̂_t - x_{t+1}|², mean over t and batch
  std::vector<double> hidden_mean_square;   ///< per block, over time, batch and units
  models::GradientBundle gradients;         ///< same layout as DeepNet::parameters()
};

/// Forward and full BPTT backward on one time-major batch (length >= 2).
DeepPass deep_forward_backward(const DeepNet& net, const models::TimeSeries& inputs);

/// Loss only.
double deep_loss(const DeepNet& net, const models::TimeSeries& inputs);

struct SigpropRow {
  double nu = 0.0;
  int layer = 0;          ///< 1-based block index; 0 for network-wide rows
  /// "hidden" (recurrent state), "grad:<recurrent group>", "grad:rec_total"
  /// (all recurrent parameters of the block), "grad:glu", or at layer 0
  /// "grad:network" (every parameter).
  std::string quantity;
  double value = 0.0;     ///< mean square; +inf on overflow
  bool overflow = false;
};

struct SigpropConfig {
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// For each ν, initializes the net (stream RngStream(seed).child(ν index)) and
/// averages over minibatches the recurrent hidden-state mean square and the
/// mean squared loss gradients per group. Non-finite
/// values are reported with overflow = true rather than thrown.
std::vector<SigpropRow> sigprop_at_init(const DeepNetSpec& spec,
                                        const stochastic::SequenceBatch& data,
                                        const std::vector<double>& nu_grid,
                                        const SigpropConfig& cfg = {});

/// Gaussian embeddings [count × length × dim], optionally AR(1) in time.
stochastic::SequenceBatch synthetic_embeddings(std::size_t count, std::size_t length,
                                               std::size_t dim, double rho,
                                               const stochastic::RngStream& stream);

/// Raw little-endian float32 tensor [count × length × dim]. Throws
/// DimensionError when the file size does not match.
stochastic::SequenceBatch load_float32_tensor(const std::string& path, std::size_t count,
                                              std::size_t length, std::size_t dim);

}  // namespace memcurse::experiments
