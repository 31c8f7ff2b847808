#include "memcurse/stochastic/process.hpp"

#include <cmath>

#include "memcurse/errors.hpp"

namespace memcurse::stochastic {

std::string to_string(AutocorrelationKind kind) {
  switch (kind) {
    case AutocorrelationKind::IID: return "iid";
    case AutocorrelationKind::ExpDecay: return "exp_decay";
    case AutocorrelationKind::Constant: return "constant";
    case AutocorrelationKind::Empirical: return "empirical";
  }
  return "unknown";
}

AutocorrelationModel AutocorrelationModel::iid() { return {}; }

AutocorrelationModel AutocorrelationModel::exp_decay(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("exp_decay: rho must lie in [0, 1]");
  AutocorrelationModel m;
  m.kind_ = AutocorrelationKind::ExpDecay;
  m.rho_ = rho;
  return m;
}

AutocorrelationModel AutocorrelationModel::constant() {
  AutocorrelationModel m;
  m.kind_ = AutocorrelationKind::Constant;
  m.rho_ = 1.0;
  return m;
}

AutocorrelationModel AutocorrelationModel::empirical(std::vector<double> lags) {
  if (lags.empty() || !(lags[0] > 0.0) || !std::isfinite(lags[0]))
    throw DomainError("empirical: lags[0] must be positive");
  const double r0 = lags[0];
  for (double& v : lags) {
    v /= r0;
    if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-12)
      throw DomainError("empirical: |R(lag)| must not exceed R(0)");
  }
  lags[0] = 1.0;
  AutocorrelationModel m;
  m.kind_ = AutocorrelationKind::Empirical;
  m.lags_ = std::move(lags);
  return m;
}

double AutocorrelationModel::at(long long lag) const {
  const auto d = static_cast<std::size_t>(lag < 0 ? -lag : lag);
  switch (kind_) {
    case AutocorrelationKind::IID: return d == 0 ? 1.0 : 0.0;
    case AutocorrelationKind::Constant: return 1.0;
    case AutocorrelationKind::ExpDecay: return d == 0 ? 1.0 : std::pow(rho_, static_cast<double>(d));
    case AutocorrelationKind::Empirical: return d < lags_.size() ? lags_[d] : 0.0;
  }
  return 0.0;
}

std::optional<double> AutocorrelationModel::closed_form_rho() const {
  switch (kind_) {
    case AutocorrelationKind::IID: return 0.0;
    case AutocorrelationKind::Constant: return 1.0;
    case AutocorrelationKind::ExpDecay: return rho_;
    case AutocorrelationKind::Empirical: return std::nullopt;
  }
  return std::nullopt;
}

SequenceBatch::SequenceBatch(std::size_t count_, std::size_t length_, std::size_t dim_)
    : count(count_), length(length_), dim(dim_), data(count_ * length_ * dim_, 0.0) {}

namespace {

// Durbin-Levinson prediction coefficients phi[t][k-1] and innovation
// variances v[t] for the one-step predictor of x_t from x_{t-1..0}.
void durbin_levinson(const AutocorrelationModel& model, std::size_t length,
                     std::vector<std::vector<double>>& phi, std::vector<double>& v) {
  phi.assign(length, {});
  v.assign(length, 0.0);
  v[0] = 1.0;
  for (std::size_t t = 1; t < length; ++t) {
    const auto& prev = phi[t - 1];
    double acc = model.at(static_cast<long long>(t));
    for (std::size_t k = 1; k < t; ++k) acc -= prev[k - 1] * model.at(static_cast<long long>(t - k));
    const double kappa = acc / v[t - 1];
    auto& cur = phi[t];
    cur.resize(t);
    for (std::size_t k = 1; k < t; ++k) cur[k - 1] = prev[k - 1] - kappa * prev[t - k - 1];
    cur[t - 1] = kappa;
    v[t] = v[t - 1] * (1.0 - kappa * kappa);
    if (!(v[t] > 0.0))
      throw DomainError("empirical autocorrelation is not positive definite at lag " +
                        std::to_string(t));
  }
}

}  // namespace

SequenceBatch sample_wss_sequence(const AutocorrelationModel& model, std::size_t length,
                                  std::size_t count, std::size_t dim, const RngStream& stream) {
  if (length < 1) throw DomainError("sample_wss_sequence: length must be >= 1");
  if (model.kind() == AutocorrelationKind::ExpDecay && !(model.rho() < 1.0))
    throw DomainError("sample_wss_sequence: ExpDecay requires 0 <= rho < 1");
  SequenceBatch batch(count, length, dim);
  batch.seed = stream.root_seed();
  batch.stream_path = stream.path();
  batch.model = model;

  std::vector<std::vector<double>> phi;
  std::vector<double> innov;
  if (model.kind() == AutocorrelationKind::Empirical) durbin_levinson(model, length, phi, innov);

  std::vector<double> x(length);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rs = stream.child(s);
    for (std::size_t d = 0; d < dim; ++d) {
      switch (model.kind()) {
        case AutocorrelationKind::Constant:
          std::fill(x.begin(), x.end(), 1.0);
          break;
        case AutocorrelationKind::IID:
          for (auto& xi : x) xi = rs.normal();
          break;
        case AutocorrelationKind::ExpDecay: {
          const double rho = model.rho();
          const double scale = std::sqrt(1.0 - rho * rho);
          x[0] = rs.normal();
          for (std::size_t t = 1; t < length; ++t) x[t] = rho * x[t - 1] + scale * rs.normal();
          break;
        }
        case AutocorrelationKind::Empirical:
          x[0] = rs.normal();
          for (std::size_t t = 1; t < length; ++t) {
            double pred = 0.0;
            for (std::size_t k = 1; k <= t; ++k) pred += phi[t][k - 1] * x[t - k];
            x[t] = pred + std::sqrt(innov[t]) * rs.normal();
          }
          break;
      }
      for (std::size_t t = 0; t < length; ++t) batch(s, t, d) = x[t];
    }
  }
  return batch;
}

std::vector<double> empirical_autocorrelation(const SequenceBatch& batch, std::size_t max_lag) {
  if (max_lag >= batch.length)
    throw DomainError("empirical_autocorrelation: max_lag must be < length");
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t s = 0; s < batch.count; ++s)
      for (std::size_t t = 0; t + lag < batch.length; ++t)
        for (std::size_t d = 0; d < batch.dim; ++d) acc += batch(s, t + lag, d) * batch(s, t, d);
    const double n = static_cast<double>(batch.count * (batch.length - lag) * batch.dim);
    r[lag] = n > 0 ? acc / n : 0.0;
  }
  return r;
}

}  // namespace memcurse::stochastic
