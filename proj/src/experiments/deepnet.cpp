#include "memcurse/experiments/deepnet.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "memcurse/errors.hpp"
#include "memcurse/models/teacher.hpp"

namespace memcurse::experiments {

using models::GradientBundle;
using models::TimeSeries;

namespace {

constexpr double kLayerNormEps = 1e-5;

std::string block_prefix(std::size_t k) { return "block" + std::to_string(k + 1) + "."; }

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_prime(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct NormCache {
  TimeSeries xhat;
  std::vector<Eigen::RowVectorXd> inv_std;
};

TimeSeries layer_norm(const TimeSeries& x, const Eigen::VectorXd& gain, const Eigen::VectorXd& bias,
                      NormCache& cache) {
  const double n = static_cast<double>(x[0].rows());
  TimeSeries y(x.size());
  cache.xhat.resize(x.size());
  cache.inv_std.resize(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    const Eigen::RowVectorXd mu = x[t].colwise().sum() / n;
    Eigen::MatrixXd c = x[t].rowwise() - mu;
    const Eigen::RowVectorXd var = c.cwiseAbs2().colwise().sum() / n;
    cache.inv_std[t] = (var.array() + kLayerNormEps).rsqrt().matrix();
    cache.xhat[t] = c.array().rowwise() * cache.inv_std[t].array();
    y[t] = (cache.xhat[t].array().colwise() * gain.array()).matrix();
    y[t].colwise() += bias;
  }
  return y;
}

TimeSeries layer_norm_backward(const TimeSeries& dy, const Eigen::VectorXd& gain,
                               const NormCache& cache, Eigen::MatrixXd& dgain, Eigen::MatrixXd& dbias) {
  const double n = static_cast<double>(gain.size());
  TimeSeries dx(dy.size());
  for (std::size_t t = 0; t < dy.size(); ++t) {
    dgain.col(0) += dy[t].cwiseProduct(cache.xhat[t]).rowwise().sum();
    dbias.col(0) += dy[t].rowwise().sum();
    const Eigen::MatrixXd dxhat = dy[t].array().colwise() * gain.array();
    const Eigen::RowVectorXd s1 = dxhat.colwise().sum();
    const Eigen::RowVectorXd s2 = dxhat.cwiseProduct(cache.xhat[t]).colwise().sum();
    Eigen::MatrixXd r = n * dxhat;
    r.rowwise() -= s1;
    r -= (cache.xhat[t].array().rowwise() * s2.array()).matrix();
    dx[t] = (r.array().rowwise() * (cache.inv_std[t].array() / n)).matrix();
  }
  return dx;
}

struct BlockCache {
  TimeSeries x_in, rec_in, rec_out, glu_in, a1, s2;
  NormCache ln1, ln2;
  models::Trajectory traj;
};

double hidden_mean_square(const models::Trajectory& tr) {
  double s = 0.0, count = 0.0;
  if (!tr.complex_states.empty()) {
    for (std::size_t t = 1; t < tr.complex_states.size(); ++t) {
      s += tr.complex_states[t].squaredNorm();
      count += static_cast<double>(tr.complex_states[t].size());
    }
  } else {
    for (std::size_t t = 1; t < tr.states.size(); ++t) {
      s += tr.states[t].squaredNorm();
      count += static_cast<double>(tr.states[t].size());
    }
  }
  return count > 0 ? s / count : 0.0;
}

struct Forward {
  std::vector<BlockCache> blocks;
  TimeSeries x_top;
  TimeSeries pred_errors;  ///< dL/dx̂_t
  double loss = 0.0;
};

Forward run_forward(const DeepNet& net, const TimeSeries& in) {
  if (in.size() < 2) throw DimensionError("deep net: sequences need length >= 2");
  if (in[0].rows() != net.spec.input_dim) throw DimensionError("deep net: input dimension mismatch");
  const std::size_t T = in.size();
  const Eigen::Index batch = in[0].cols();
  Forward f;
  TimeSeries x(T);
  for (std::size_t t = 0; t < T; ++t) {
    x[t].noalias() = net.enc_w * in[t];
    x[t].colwise() += net.enc_b;
  }
  f.blocks.resize(net.blocks.size());
  for (std::size_t k = 0; k < net.blocks.size(); ++k) {
    const DeepBlock& b = net.blocks[k];
    BlockCache& c = f.blocks[k];
    c.x_in = x;
    c.rec_in = net.spec.layer_norm ? layer_norm(x, b.ln1_gain, b.ln1_bias, c.ln1) : x;
    c.traj = models::forward(b.rec, c.rec_in);
    c.rec_out = c.traj.outputs;
    TimeSeries q(T);
    for (std::size_t t = 0; t < T; ++t) q[t] = c.rec_out[t].unaryExpr(&gelu);
    c.glu_in = net.spec.layer_norm ? layer_norm(q, b.ln2_gain, b.ln2_bias, c.ln2) : q;
    c.a1.resize(T);
    c.s2.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      c.a1[t].noalias() = b.glu_w1 * c.glu_in[t];
      c.a1[t].colwise() += b.glu_b1;
      Eigen::MatrixXd a2 = b.glu_w2 * c.glu_in[t];
      a2.colwise() += b.glu_b2;
      c.s2[t] = a2.unaryExpr(&sigmoid);
      x[t] += c.a1[t].cwiseProduct(c.s2[t]);
    }
  }
  f.x_top = x;
  const double scale = 1.0 / static_cast<double>((T - 1) * static_cast<std::size_t>(batch));
  f.pred_errors.assign(T, Eigen::MatrixXd::Zero(net.spec.input_dim, batch));
  for (std::size_t t = 0; t + 1 < T; ++t) {
    Eigen::MatrixXd r = net.dec_w * x[t];
    r.colwise() += net.dec_b;
    r -= in[t + 1];
    f.loss += 0.5 * r.squaredNorm() * scale;
    f.pred_errors[t] = r * scale;
  }
  return f;
}

}  // namespace

void DeepNetSpec::validate() const {
  if (recurrent != "crnn" && recurrent != "lru" && recurrent != "lstm")
    throw DomainError("DeepNetSpec: recurrent must be crnn, lru or lstm");
  if (input_dim < 1 || hidden < 1 || blocks < 1) throw DomainError("DeepNetSpec: sizes must be positive");
  if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("DeepNetSpec: nu must lie in [0, 1)");
  if (nonlinearity != "gelu") throw DomainError("DeepNetSpec: only gelu is supported");
}

GradientBundle DeepNet::parameters() const {
  GradientBundle p;
  p.add("enc.W", enc_w);
  p.add("enc.b", enc_b);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const DeepBlock& b = blocks[k];
    const std::string pre = block_prefix(k);
    if (spec.layer_norm) {
      p.add(pre + "ln1.g", b.ln1_gain);
      p.add(pre + "ln1.b", b.ln1_bias);
    }
    const GradientBundle rec = models::parameters(b.rec);
    for (const auto& g : rec.groups()) p.add(pre + "rec." + g.label, g.values);
    if (spec.layer_norm) {
      p.add(pre + "ln2.g", b.ln2_gain);
      p.add(pre + "ln2.b", b.ln2_bias);
    }
    p.add(pre + "glu.W1", b.glu_w1);
    p.add(pre + "glu.b1", b.glu_b1);
    p.add(pre + "glu.W2", b.glu_w2);
    p.add(pre + "glu.b2", b.glu_b2);
  }
  p.add("dec.W", dec_w);
  p.add("dec.b", dec_b);
  return p;
}

void DeepNet::set_parameters(const Eigen::VectorXd& flat) {
  GradientBundle p = parameters();
  p.unflatten(flat);
  enc_w = p["enc.W"];
  enc_b = p["enc.b"].col(0);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    DeepBlock& b = blocks[k];
    const std::string pre = block_prefix(k);
    if (spec.layer_norm) {
      b.ln1_gain = p[pre + "ln1.g"].col(0);
      b.ln1_bias = p[pre + "ln1.b"].col(0);
      b.ln2_gain = p[pre + "ln2.g"].col(0);
      b.ln2_bias = p[pre + "ln2.b"].col(0);
    }
    GradientBundle rec = models::parameters(b.rec);
    for (auto& g : rec.groups()) g.values = p[pre + "rec." + g.label];
    models::set_parameters(b.rec, rec.flatten());
    b.glu_w1 = p[pre + "glu.W1"];
    b.glu_b1 = p[pre + "glu.b1"].col(0);
    b.glu_w2 = p[pre + "glu.W2"];
    b.glu_b2 = p[pre + "glu.b2"].col(0);
  }
  dec_w = p["dec.W"];
  dec_b = p["dec.b"].col(0);
}

DeepNet init_deep_net(const DeepNetSpec& spec, const stochastic::RngStream& stream) {
  spec.validate();
  const Eigen::Index h = spec.hidden;
  DeepNet net;
  net.spec = spec;
  stochastic::RngStream io = stream.child(0);
  net.enc_w = models::lecun_truncated_normal(h, spec.input_dim, spec.input_dim, io);
  net.enc_b = Eigen::VectorXd::Zero(h);
  net.dec_w = models::lecun_truncated_normal(spec.input_dim, h, h, io);
  net.dec_b = Eigen::VectorXd::Zero(spec.input_dim);
  const double nu_hi = 0.5 * (1.0 + spec.nu);
  for (int k = 0; k < spec.blocks; ++k) {
    const stochastic::RngStream bs = stream.child(static_cast<std::uint64_t>(k) + 1);
    stochastic::RngStream rec_rng = bs.child(0), glu_rng = bs.child(1);
    DeepBlock b;
    b.ln1_gain = b.ln2_gain = Eigen::VectorXd::Ones(h);
    b.ln1_bias = b.ln2_bias = Eigen::VectorXd::Zero(h);
    if (spec.recurrent == "crnn") {
      b.rec = models::init_complex_diagonal(h, h, h, spec.nu, nu_hi, spec.theta_max, rec_rng);
    } else if (spec.recurrent == "lru") {
      b.rec = models::init_lru(h, h, h, spec.nu, nu_hi, spec.theta_max, rec_rng);
    } else {
      b.rec = models::chrono_init(h, h, spec.nu, rec_rng);
    }
    b.glu_w1 = models::lecun_truncated_normal(h, h, h, glu_rng);
    b.glu_w2 = models::lecun_truncated_normal(h, h, h, glu_rng);
    b.glu_b1 = b.glu_b2 = Eigen::VectorXd::Zero(h);
    net.blocks.push_back(std::move(b));
  }
  return net;
}

double deep_loss(const DeepNet& net, const TimeSeries& inputs) {
  return run_forward(net, inputs).loss;
}

DeepPass deep_forward_backward(const DeepNet& net, const TimeSeries& in) {
  Forward f = run_forward(net, in);
  const std::size_t T = in.size();
  DeepPass pass;
  pass.loss = f.loss;
  GradientBundle g = net.parameters().zeros_like();

  TimeSeries dx(T);
  for (std::size_t t = 0; t < T; ++t) {
    g["dec.W"].noalias() += f.pred_errors[t] * f.x_top[t].transpose();
    g["dec.b"].col(0) += f.pred_errors[t].rowwise().sum();
    dx[t].noalias() = net.dec_w.transpose() * f.pred_errors[t];
  }

  pass.hidden_mean_square.resize(net.blocks.size());
  for (std::size_t k = net.blocks.size(); k-- > 0;) {
    const DeepBlock& b = net.blocks[k];
    const BlockCache& c = f.blocks[k];
    const std::string pre = block_prefix(k);
    pass.hidden_mean_square[k] = hidden_mean_square(c.traj);

    TimeSeries du(T);
    for (std::size_t t = 0; t < T; ++t) {
      const Eigen::MatrixXd da1 = dx[t].cwiseProduct(c.s2[t]);
      const Eigen::MatrixXd da2 =
          (dx[t].array() * c.a1[t].array() * c.s2[t].array() * (1.0 - c.s2[t].array())).matrix();
      g[pre + "glu.W1"].noalias() += da1 * c.glu_in[t].transpose();
      g[pre + "glu.b1"].col(0) += da1.rowwise().sum();
      g[pre + "glu.W2"].noalias() += da2 * c.glu_in[t].transpose();
      g[pre + "glu.b2"].col(0) += da2.rowwise().sum();
      du[t].noalias() = b.glu_w1.transpose() * da1;
      du[t].noalias() += b.glu_w2.transpose() * da2;
    }
    if (net.spec.layer_norm)
      du = layer_norm_backward(du, b.ln2_gain, c.ln2, g[pre + "ln2.g"], g[pre + "ln2.b"]);
    for (std::size_t t = 0; t < T; ++t)
      du[t] = du[t].cwiseProduct(c.rec_out[t].unaryExpr(&gelu_prime));

    models::BackwardResult rb = models::backward(b.rec, c.rec_in, c.traj, du);
    for (const auto& grp : rb.gradients.groups()) g[pre + "rec." + grp.label] += grp.values;
    TimeSeries dr = std::move(rb.input_errors);
    if (net.spec.layer_norm)
      dr = layer_norm_backward(dr, b.ln1_gain, c.ln1, g[pre + "ln1.g"], g[pre + "ln1.b"]);
    for (std::size_t t = 0; t < T; ++t) dx[t] += dr[t];
  }

  for (std::size_t t = 0; t < T; ++t) {
    g["enc.W"].noalias() += dx[t] * in[t].transpose();
    g["enc.b"].col(0) += dx[t].rowwise().sum();
  }
  pass.gradients = std::move(g);
  return pass;
}

namespace {

TimeSeries slice_time_major(const stochastic::SequenceBatch& data, std::size_t first, std::size_t count) {
  TimeSeries out(data.length, Eigen::MatrixXd(static_cast<Eigen::Index>(data.dim),
                                              static_cast<Eigen::Index>(count)));
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t t = 0; t < data.length; ++t)
      for (std::size_t d = 0; d < data.dim; ++d)
        out[t](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s)) =
            data.data[((first + s) * data.length + t) * data.dim + d];
  return out;
}

struct CellStats {
  std::vector<double> hidden;
  std::vector<std::vector<double>> groups;  ///< per block: recurrent groups, recurrent total, GLU
  double network = 0.0;                     ///< over every parameter of the net
};

double glu_mean_square(const GradientBundle& g, const std::string& pre) {
  double s = 0.0, n = 0.0;
  for (const char* l : {"glu.W1", "glu.b1", "glu.W2", "glu.b2"}) {
    const Eigen::MatrixXd& v = g[pre + l];
    s += v.squaredNorm();
    n += static_cast<double>(v.size());
  }
  return s / n;
}

}  // namespace

std::vector<SigpropRow> sigprop_at_init(const DeepNetSpec& spec, const stochastic::SequenceBatch& data,
                                        const std::vector<double>& nu_grid, const SigpropConfig& cfg) {
  spec.validate();
  if (nu_grid.empty()) throw DomainError("sigprop_at_init: empty nu grid");
  if (cfg.batch_size < 1 || data.count < cfg.batch_size)
    throw DimensionError("sigprop_at_init: fewer sequences than one batch");
  if (data.dim != static_cast<std::size_t>(spec.input_dim))
    throw DimensionError("sigprop_at_init: data dimension does not match the encoder");
  const std::size_t n_batches = data.count / cfg.batch_size;

  std::vector<DeepNet> nets;
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    DeepNetSpec s = spec;
    s.nu = nu_grid[i];
    nets.push_back(init_deep_net(s, stochastic::RngStream(cfg.seed).child(i)));
  }
  std::vector<std::string> labels;
  const GradientBundle rec0 = models::parameters(nets[0].blocks[0].rec);
  for (const auto& grp : rec0.groups()) labels.push_back(grp.label);

  const std::size_t n_cells = nu_grid.size() * n_batches;
  std::vector<CellStats> stats(n_cells);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_cells; i = next++) {
      try {
        const DeepNet& net = nets[i / n_batches];
        const DeepPass pass = deep_forward_backward(
            net, slice_time_major(data, (i % n_batches) * cfg.batch_size, cfg.batch_size));
        CellStats& cs = stats[i];
        cs.hidden = pass.hidden_mean_square;
        for (std::size_t k = 0; k < net.blocks.size(); ++k) {
          std::vector<double> row;
          double total = 0.0, count = 0.0;
          for (const std::string& l : labels) {
            const Eigen::MatrixXd& v = pass.gradients[block_prefix(k) + "rec." + l];
            row.push_back(v.squaredNorm() / static_cast<double>(v.size()));
            total += v.squaredNorm();
            count += static_cast<double>(v.size());
          }
          row.push_back(total / count);
          row.push_back(glu_mean_square(pass.gradients, block_prefix(k)));
          cs.groups.push_back(std::move(row));
        }
        cs.network = pass.gradients.squared_norm() / static_cast<double>(pass.gradients.size());
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(n_cells)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SigpropRow> rows;
  auto emit = [&](double nu, int layer, const std::string& q, double sum) {
    const double v = sum / static_cast<double>(n_batches);
    const bool bad = !std::isfinite(v);
    rows.push_back({nu, layer, q, bad ? std::numeric_limits<double>::infinity() : v, bad});
  };
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    for (int k = 0; k < spec.blocks; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      double h = 0.0;
      std::vector<double> g(labels.size() + 2, 0.0);
      for (std::size_t b = 0; b < n_batches; ++b) {
        const CellStats& cs = stats[i * n_batches + b];
        h += cs.hidden[kk];
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += cs.groups[kk][j];
      }
      emit(nu_grid[i], k + 1, "hidden", h);
      for (std::size_t j = 0; j < labels.size(); ++j) emit(nu_grid[i], k + 1, "grad:" + labels[j], g[j]);
      emit(nu_grid[i], k + 1, "grad:rec_total", g[labels.size()]);
      emit(nu_grid[i], k + 1, "grad:glu", g[labels.size() + 1]);
    }
    double net = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) net += stats[i * n_batches + b].network;
    emit(nu_grid[i], 0, "grad:network", net);
  }
  return rows;
}

stochastic::SequenceBatch synthetic_embeddings(std::size_t count, std::size_t length, std::size_t dim,
                                               double rho, const stochastic::RngStream& stream) {
  const auto model = rho == 0.0 ? stochastic::AutocorrelationModel::iid()
                                : stochastic::AutocorrelationModel::exp_decay(rho);
  return stochastic::sample_wss_sequence(model, length, count, dim, stream);
}

stochastic::SequenceBatch load_float32_tensor(const std::string& path, std::size_t count,
                                              std::size_t length, std::size_t dim) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw DomainError("load_float32_tensor: cannot open " + path);
  const std::size_t n = count * length * dim;
  if (static_cast<std::size_t>(f.tellg()) != n * sizeof(float))
    throw DimensionError("load_float32_tensor: file size does not match count x length x dim");
  f.seekg(0);
  std::vector<std::uint32_t> raw(n);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)));
  stochastic::SequenceBatch batch(count, length, dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t w = raw[i];
    if constexpr (std::endian::native == std::endian::big) w = __builtin_bswap32(w);
    float v;
    std::memcpy(&v, &w, sizeof v);
    batch.data[i] = static_cast<double>(v);
  }
  return batch;
}

}  // namespace memcurse::experiments
