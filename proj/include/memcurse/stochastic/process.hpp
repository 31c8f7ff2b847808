#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memcurse/stochastic/rng.hpp"

namespace memcurse::stochastic {

enum class AutocorrelationKind { IID, ExpDecay, Constant, Empirical };

std::string to_string(AutocorrelationKind kind);

/// Autocorrelation R_x(Δ) of a unit-variance wide-sense-stationary input.
class AutocorrelationModel {
 public:
  static AutocorrelationModel iid();
  /// R_x(Δ) = rho^|Δ|, rho in [0, 1].
  static AutocorrelationModel exp_decay(double rho);
  static AutocorrelationModel constant();
  /// lags[Δ] for Δ >= 0; rescaled so that lags[0] = 1. Lags beyond the
  /// stored range are zero. Rejects sequences violating |R(Δ)| <= R(0).
  static AutocorrelationModel empirical(std::vector<double> lags);

  AutocorrelationKind kind() const { return kind_; }
  double rho() const { return rho_; }
  const std::vector<double>& lags() const { return lags_; }

  /// R_x(Δ); symmetric in Δ.
  double at(long long lag) const;
  /// rho for the closed-form kinds (IID = 0, Constant = 1); empty for Empirical.
  std::optional<double> closed_form_rho() const;

 private:
  AutocorrelationKind kind_ = AutocorrelationKind::IID;
  double rho_ = 0.0;
  std::vector<double> lags_;
};

/// [count x length x dim] real samples, row-major in that order.
struct SequenceBatch {
  std::size_t count = 0;
  std::size_t length = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> stream_path;
  AutocorrelationModel model;

  SequenceBatch() = default;
  SequenceBatch(std::size_t count, std::size_t length, std::size_t dim);

  double& operator()(std::size_t s, std::size_t t, std::size_t d) {
    return data[(s * length + t) * dim + d];
  }
  double operator()(std::size_t s, std::size_t t, std::size_t d) const {
    return data[(s * length + t) * dim + d];
  }
};

/// Draws `count` independent sequences; sequence s uses stream.child(s), so
/// the result is independent of any sharding of the work.
SequenceBatch sample_wss_sequence(const AutocorrelationModel& model, std::size_t length,
                                  std::size_t count, std::size_t dim, const RngStream& stream);

/// Unnormalized estimate of E[x_{t+Δ} x_t] for Δ = 0..max_lag, averaged
/// over sequences, coordinates and all admissible t.
std::vector<double> empirical_autocorrelation(const SequenceBatch& batch, std::size_t max_lag);

}  // namespace memcurse::stochastic
