#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "memcurse/errors.hpp"
#include "memcurse/models/cells.hpp"
#include "memcurse/models/gradient_check.hpp"
#include "memcurse/models/linalg.hpp"
#include "memcurse/models/sensitivity.hpp"
#include "memcurse/models/serialization.hpp"
#include "memcurse/models/teacher.hpp"

using namespace memcurse;
using namespace memcurse::models;
using cd = std::complex<double>;

namespace {

void expect_gradients_match(const RecurrentCell& cell, stochastic::RngStream& rng, std::size_t T) {
  const TimeSeries x = random_series(T, input_dim(cell), 3, rng);
  const TimeSeries e = random_series(T, output_dim(cell), 3, rng);
  for (const auto& g : check_gradients(cell, x, e)) {
    EXPECT_LE(g.relative_error, 1e-6) << cell_kind(cell) << " group " << g.label;
  }
}

}  // namespace

class CellGradients : public ::testing::TestWithParam<std::string> {};

TEST_P(CellGradients, MatchFiniteDifferences) {
  stochastic::RngStream root(11);
  for (std::uint64_t i = 0; i < 20; ++i) {
    stochastic::RngStream rng = root.child(i);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(i % 4);
    const std::size_t T = 5 + 3 * (i % 6);
    const RecurrentCell cell = random_cell(GetParam(), n, 1 + i % 2, 1 + (i / 2) % 2, 0.9, rng);
    expect_gradients_match(cell, rng, T);
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, CellGradients,
                         ::testing::Values("dense", "block_diagonal", "complex_diagonal", "lru",
                                           "lstm"));

TEST(CellGradients, PolarParametrizationsMatchFiniteDifferences) {
  using analytic::ParamKind;
  using analytic::Parametrization;
  const std::pair<ParamKind, ParamKind> combos[] = {
      {ParamKind::Direct, ParamKind::PolarDirect},
      {ParamKind::Tanh, ParamKind::PolarExpAngle},
      {ParamKind::DoubleExp, ParamKind::PolarExpAngle},
      {ParamKind::DoubleExp, ParamKind::Optimal1D},
  };
  stochastic::RngStream root(12);
  std::uint64_t i = 0;
  for (const auto& [mag, ang] : combos) {
    for (bool stop : {true, false}) {
      stochastic::RngStream rng = root.child(i++);
      const Eigen::VectorXcd lam = sample_ring_eigenvalues(3, 0.3, 0.9, 0.2, 2.5, rng);
      const auto cell = DiagonalComplexCell::polar(
          lam, Parametrization(mag), Parametrization(ang), complex_gaussian(3, 2, 2, rng),
          complex_gaussian(2, 3, 3, rng), gaussian_matrix(2, 2, 1.0, rng),
          analytic::NormalizationSpec::sqrt_one_minus_nu_sq(stop));
      expect_gradients_match(cell, rng, 12);
    }
  }
}

TEST(DenseSSM, ImpulseResponseIsMarkovParameters) {
  stochastic::RngStream rng(3);
  const auto cell = std::get<DenseLinearSSM>(random_cell("dense", 4, 1, 1, 0.9, rng));
  TimeSeries x(8, Eigen::MatrixXd::Zero(1, 1));
  x[0](0, 0) = 1.0;
  const Trajectory tr = cell.forward(x);
  EXPECT_NEAR(tr.outputs[0](0, 0), (cell.C * cell.B + cell.D)(0, 0), 1e-12);
  Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(4, 4);
  for (std::size_t t = 1; t < 8; ++t) {
    Ak = cell.A * Ak;
    EXPECT_NEAR(tr.outputs[t](0, 0), (cell.C * Ak * cell.B)(0, 0), 1e-12);
  }
}

TEST(DenseSSM, IsLinearInInputs) {
  stochastic::RngStream rng(4);
  const RecurrentCell cell = random_cell("dense", 3, 2, 2, 0.9, rng);
  const TimeSeries x1 = random_series(10, 2, 2, rng), x2 = random_series(10, 2, 2, rng);
  TimeSeries mix(10);
  for (std::size_t t = 0; t < 10; ++t) mix[t] = 2.0 * x1[t] - 0.5 * x2[t];
  const auto y1 = forward(cell, x1).outputs, y2 = forward(cell, x2).outputs;
  const auto ym = forward(cell, mix).outputs;
  for (std::size_t t = 0; t < 10; ++t)
    EXPECT_LE((ym[t] - (2.0 * y1[t] - 0.5 * y2[t])).norm(), 1e-10);
}

TEST(DenseSSM, DiagonalFormsReproduceOutputs) {
  const DenseLinearSSM teacher = build_teacher(6, 0.9, M_PI, stochastic::RngStream(5),
                                               {2, 2, 8});
  stochastic::RngStream rng(6);
  const TimeSeries x = random_series(30, 2, 3, rng);
  const auto y = teacher.forward(x).outputs;
  const auto yd = to_diagonal(teacher).forward(x).outputs;
  const auto yr = to_diagonal_reduced(teacher).forward(x).outputs;
  for (std::size_t t = 0; t < x.size(); ++t) {
    EXPECT_LE((y[t] - yd[t]).norm(), 1e-8);
    EXPECT_LE((y[t] - yr[t]).norm(), 1e-8);
  }
}

TEST(Diagonalize, RotationScaleBlock) {
  Eigen::MatrixXd A(2, 2);
  const double r = 0.8, th = 0.7;
  A << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
  const Diagonalization d = diagonalize(A);
  EXPECT_NEAR(std::abs(d.lambda(0) - std::polar(r, th)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d.lambda(1) - std::polar(r, -th)), 0.0, 1e-12);
  EXPECT_LE(reconstruction_residual(d, A), 1e-12);
}

TEST(Diagonalize, DiagonalInputIsSortedByMagnitude) {
  const Eigen::Vector3d v(0.2, -0.9, 0.5);
  const Diagonalization d = diagonalize(v.asDiagonal().toDenseMatrix());
  EXPECT_NEAR(d.lambda(0).real(), -0.9, 1e-14);
  EXPECT_NEAR(d.lambda(1).real(), 0.5, 1e-14);
  EXPECT_NEAR(d.lambda(2).real(), 0.2, 1e-14);
}

TEST(Diagonalize, RandomMatrixReconstructsWithConjugatePairs) {
  stochastic::RngStream rng(7);
  const Eigen::MatrixXd A = gaussian_matrix(10, 10, 1.0, rng);
  const Diagonalization d = diagonalize(A);
  EXPECT_LE(reconstruction_residual(d, A), 1e-10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    if (d.lambda(i).imag() > 0) {
      EXPECT_EQ(d.lambda(i + 1), std::conj(d.lambda(i)));
      EXPECT_LE((d.P.col(i + 1) - d.P.col(i).conjugate()).norm(), 1e-14);
    }
  }
}

TEST(Teacher, EigenvalueMagnitudesLieInTransformedRange) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const DenseLinearSSM t = build_teacher(16, 0.99, M_PI, stochastic::RngStream(100 + s));
    for (const cd& l : eigenvalues(t.A)) {
      EXPECT_GE(std::abs(l), 0.99 - 1e-9);
      EXPECT_LE(std::abs(l), 0.99 + 0.01 * std::tanh(3.0) + 1e-9);
    }
  }
}

TEST(Teacher, IsDeterministicPerStream) {
  const DenseLinearSSM a = build_teacher(8, 0.9, 1.0, stochastic::RngStream(9));
  const DenseLinearSSM b = build_teacher(8, 0.9, 1.0, stochastic::RngStream(9));
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.C, b.C);
}

TEST(Teacher, EigenbasisTeacherRespectsAngleBound) {
  const DenseLinearSSM t = build_teacher_eigenbasis(4, 0.9, 0.3, stochastic::RngStream(10));
  for (const cd& l : eigenvalues(t.A)) {
    EXPECT_GE(std::abs(l), 0.9 - 1e-9);
    EXPECT_LE(std::abs(std::arg(l)), 0.3 + 1e-9);
  }
}

TEST(Init, ChronoForgetGateMatchesTimescales) {
  const double nu = 0.99;
  const LSTMCell c = chrono_init(64, 2, nu, stochastic::RngStream(13));
  for (Eigen::Index j = 0; j < 64; ++j) {
    const double bf = c.bias(64 + j), bi = c.bias(j);
    const double f = 1.0 / (1.0 + std::exp(-bf));
    EXPECT_GE(f, nu - 1e-12);
    EXPECT_LE(f, 1.0 - (1.0 - nu) / 2.0 + 1e-12);
    EXPECT_NEAR(f + 1.0 / (1.0 + std::exp(-bi)), 1.0, 1e-12);
  }
}

TEST(Init, RingEigenvaluesStayInRing) {
  stochastic::RngStream rng(14);
  const Eigen::VectorXcd l = sample_ring_eigenvalues(200, 0.9, 0.95, 0.0, 0.5, rng);
  for (const cd& v : l) {
    EXPECT_GE(std::abs(v), 0.9 - 1e-12);
    EXPECT_LE(std::abs(v), 0.95 + 1e-12);
    EXPECT_GE(std::arg(v), -1e-12);
    EXPECT_LE(std::arg(v), 0.5 + 1e-12);
  }
}

TEST(Sensitivity, ScalarOracle) {
  DenseLinearSSM s{Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Ones(1, 1),
                   Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  const auto batch = stochastic::sample_wss_sequence(stochastic::AutocorrelationModel::constant(),
                                                     3, 2, 1, stochastic::RngStream(1));
  const SensitivityNorms n = sensitivity_decomposition(s, batch, 3);
  EXPECT_NEAR(n.p_term, 1.75, 1e-12);
  EXPECT_NEAR(n.lambda_term, 2.0, 1e-12);
  EXPECT_NEAR(n.p_inv_term, 1.75, 1e-12);
}

TEST(Sensitivity, ZeroInputsGiveZeroNorms) {
  const DenseLinearSSM t = build_teacher(4, 0.9, M_PI, stochastic::RngStream(15));
  stochastic::SequenceBatch b =
      stochastic::sample_wss_sequence(stochastic::AutocorrelationModel::iid(), 20, 4, 1,
                                      stochastic::RngStream(16));
  std::fill(b.data.begin(), b.data.end(), 0.0);
  const SensitivityNorms n = sensitivity_decomposition(t, b, 20);
  EXPECT_EQ(n.p_term, 0.0);
  EXPECT_EQ(n.lambda_term, 0.0);
  EXPECT_EQ(n.p_inv_term, 0.0);
}

TEST(Sensitivity, LambdaTermDominatesNearUnitCircle) {
  const auto batch = stochastic::sample_wss_sequence(stochastic::AutocorrelationModel::iid(), 400,
                                                     32, 1, stochastic::RngStream(17));
  auto ratio = [&](double nu) {
    const DenseLinearSSM t = build_teacher(8, nu, M_PI, stochastic::RngStream(18));
    const SensitivityNorms n = sensitivity_decomposition(t, batch, 400);
    return n.lambda_term / n.p_term;
  };
  EXPECT_GT(ratio(0.99), 5.0 * ratio(0.5));
}

TEST(Serialization, RoundTripsEveryKind) {
  stochastic::RngStream rng(19);
  for (const std::string kind : {"dense", "block_diagonal", "complex_diagonal", "lru", "lstm"}) {
    const RecurrentCell cell = random_cell(kind, 3, 2, 2, 0.9, rng);
    const RecurrentCell back = cell_from_json(nlohmann::json::parse(cell_to_json(cell).dump()));
    EXPECT_EQ(cell_kind(back), kind);
    EXPECT_EQ(parameters(cell).flatten(), parameters(back).flatten()) << kind;
  }
}

TEST(Backward, ZeroErrorsGiveZeroGradients) {
  stochastic::RngStream rng(20);
  for (const std::string kind : {"dense", "block_diagonal", "complex_diagonal", "lru", "lstm"}) {
    const RecurrentCell cell = random_cell(kind, 3, 1, 1, 0.9, rng);
    const TimeSeries x = random_series(6, input_dim(cell), 2, rng);
    TimeSeries e(6, Eigen::MatrixXd::Zero(output_dim(cell), 2));
    const auto g = backward(cell, x, forward(cell, x), e).gradients;
    EXPECT_EQ(g.squared_norm(), 0.0) << kind;
  }
}

TEST(GradientBundle, FlattenRoundTrip) {
  stochastic::RngStream rng(21);
  const GradientBundle p = parameters(random_cell("block_diagonal", 4, 2, 1, 0.9, rng));
  GradientBundle q = p.zeros_like();
  q.unflatten(p.flatten());
  EXPECT_EQ(q.flatten(), p.flatten());
  EXPECT_EQ(p.element_labels().size(), static_cast<std::size_t>(p.size()));
}
