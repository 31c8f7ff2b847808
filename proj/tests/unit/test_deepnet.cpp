#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "memcurse/analytic/variance.hpp"
#include "memcurse/errors.hpp"
#include "memcurse/experiments/deepnet.hpp"
#include "memcurse/models/gradient_check.hpp"

using namespace memcurse;
using namespace memcurse::experiments;

namespace {

void expect_deep_gradients(const DeepNetSpec& spec, std::uint64_t seed) {
  DeepNet net = init_deep_net(spec, stochastic::RngStream(seed));
  // Finite differences see γ move with ν, so check the full derivative.
  for (auto& b : net.blocks)
    if (auto* c = std::get_if<models::DiagonalComplexCell>(&b.rec)) c->norm.stop_gradient = false;
  stochastic::RngStream rng(seed + 100);
  const models::TimeSeries x = models::random_series(6, spec.input_dim, 2, rng);
  const DeepPass pass = deep_forward_backward(net, x);
  EXPECT_NEAR(pass.loss, deep_loss(net, x), 1e-14);
  const Eigen::VectorXd g = pass.gradients.flatten();
  const Eigen::VectorXd p0 = net.parameters().flatten();
  Eigen::VectorXd fd(p0.size());
  for (Eigen::Index k = 0; k < p0.size(); ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(p0(k)));
    Eigen::VectorXd p = p0;
    p(k) += h;
    net.set_parameters(p);
    const double lp = deep_loss(net, x);
    p(k) = p0(k) - h;
    net.set_parameters(p);
    fd(k) = (lp - deep_loss(net, x)) / (2.0 * h);
  }
  net.set_parameters(p0);
  Eigen::Index offset = 0;
  for (const auto& grp : pass.gradients.groups()) {
    const Eigen::Index n = grp.values.size();
    const Eigen::VectorXd a = g.segment(offset, n), f = fd.segment(offset, n);
    const double denom = std::max({a.norm(), f.norm(), 1e-12});
    EXPECT_LE((a - f).norm() / denom, 1e-6) << spec.recurrent << " " << grp.label;
    offset += n;
  }
}

}  // namespace

class DeepNetGradients : public ::testing::TestWithParam<std::tuple<std::string, bool>> {};

TEST_P(DeepNetGradients, MatchFiniteDifferences) {
  DeepNetSpec spec;
  spec.recurrent = std::get<0>(GetParam());
  spec.layer_norm = std::get<1>(GetParam());
  spec.input_dim = 3;
  spec.hidden = 4;
  spec.blocks = 2;
  spec.nu = 0.6;
  expect_deep_gradients(spec, 1);
}

INSTANTIATE_TEST_SUITE_P(Kinds, DeepNetGradients,
                         ::testing::Combine(::testing::Values("crnn", "lru", "lstm"),
                                            ::testing::Bool()));

TEST(DeepNet, ParameterRoundTrip) {
  DeepNetSpec spec;
  spec.recurrent = "lru";
  spec.input_dim = 5;
  spec.hidden = 6;
  spec.layer_norm = true;
  DeepNet net = init_deep_net(spec, stochastic::RngStream(2));
  const Eigen::VectorXd p = net.parameters().flatten();
  net.set_parameters(p);
  EXPECT_EQ(net.parameters().flatten(), p);
}

TEST(Sigprop, TableShape) {
  DeepNetSpec spec;
  spec.recurrent = "lstm";
  spec.input_dim = 4;
  spec.hidden = 5;
  const auto data = synthetic_embeddings(8, 10, 4, 0.0, stochastic::RngStream(3));
  const auto rows = sigprop_at_init(spec, data, {0.32, 0.9, 0.99}, {4, 0, 1});
  // hidden, W, U, bias, rec_total, glu per layer plus one network row.
  EXPECT_EQ(rows.size(), 3u * (4u * 6u + 1u));
  for (const auto& r : rows) EXPECT_FALSE(r.overflow);
}

TEST(Sigprop, FirstLayerMatchesDiagonalPredictionAtNuZero) {
  DeepNetSpec spec;
  spec.nu = 0.0;
  const stochastic::SequenceBatch data =
      synthetic_embeddings(16, 128, 64, 0.0, stochastic::RngStream(3));
  const std::vector<SigpropRow> rows = sigprop_at_init(spec, data, {0.0}, {8, 5, 1});
  double measured = 0.0;
  for (const auto& r : rows)
    if (r.layer == 1 && r.quantity == "hidden") measured = r.value;

  // Net for ν index 0, as drawn inside sigprop_at_init.
  spec.validate();
  const DeepNet net = init_deep_net(spec, stochastic::RngStream(5).child(0));
  const auto& cell = std::get<models::DiagonalComplexCell>(net.blocks[0].rec);
  std::vector<double> lags = stochastic::empirical_autocorrelation(data, 64);
  const double r0 = lags[0];
  for (double& l : lags) l /= r0;
  const auto model = stochastic::AutocorrelationModel::empirical(lags);
  const Eigen::MatrixXcd bw = cell.b * net.enc_w.cast<std::complex<double>>();
  const Eigen::VectorXcd lam = cell.lambda();
  double predicted = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j)
    predicted += r0 * bw.row(j).squaredNorm() *
                 analytic::hidden_variance(analytic::Eigenvalue::from_complex(lam(j)), model);
  predicted /= static_cast<double>(lam.size());
  EXPECT_GT(measured, 0.5 * predicted);
  EXPECT_LT(measured, 2.0 * predicted);
}

TEST(Sigprop, IndependentOfJobs) {
  DeepNetSpec spec;
  spec.recurrent = "crnn";
  spec.input_dim = 4;
  spec.hidden = 5;
  const auto data = synthetic_embeddings(8, 12, 4, 0.5, stochastic::RngStream(4));
  const auto a = sigprop_at_init(spec, data, {0.5, 0.9}, {2, 7, 1});
  const auto b = sigprop_at_init(spec, data, {0.5, 0.9}, {2, 7, 3});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
}

TEST(Sigprop, RejectsMismatchedData) {
  DeepNetSpec spec;
  spec.input_dim = 4;
  const auto data = synthetic_embeddings(8, 12, 3, 0.0, stochastic::RngStream(5));
  EXPECT_THROW(sigprop_at_init(spec, data, {0.5}), DimensionError);
}

TEST(Float32Loader, ReadsLittleEndianTensor) {
  const std::string path = ::testing::TempDir() + "tensor.f32";
  {
    std::ofstream f(path, std::ios::binary);
    for (int i = 0; i < 12; ++i) {
      const float v = 0.5f * static_cast<float>(i);
      f.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  const auto b = load_float32_tensor(path, 2, 3, 2);
  EXPECT_EQ(b(1, 2, 1), 5.5);
  EXPECT_THROW(load_float32_tensor(path, 2, 3, 3), DimensionError);
  std::remove(path.c_str());
}
