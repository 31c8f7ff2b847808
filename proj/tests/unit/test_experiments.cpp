#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "memcurse/analytic/loss.hpp"
#include "memcurse/errors.hpp"
#include "memcurse/experiments/landscape.hpp"
#include "memcurse/experiments/optim.hpp"
#include "memcurse/experiments/train.hpp"
#include "memcurse/models/teacher.hpp"
#include "memcurse/util/hash.hpp"

using namespace memcurse;
using namespace memcurse::experiments;
using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

models::DiagonalComplexCell scalar_diag(cd lambda) {
  return models::DiagonalComplexCell::cartesian(Eigen::VectorXcd::Constant(1, lambda),
                                                Eigen::MatrixXcd::Ones(1, 1),
                                                Eigen::MatrixXcd::Ones(1, 1),
                                                Eigen::MatrixXd::Zero(1, 1));
}

models::DenseLinearSSM scalar_dense(double lambda) {
  return {Eigen::MatrixXd::Constant(1, 1, lambda), Eigen::MatrixXd::Ones(1, 1),
          Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1)};
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seq_len = 30;
  cfg.steps = 25;
  cfg.lr = 1e-2;
  return cfg;
}

SweepSpec tiny_sweep(unsigned jobs) {
  SweepSpec s;
  s.teacher.n = 2;
  s.teacher.nu = 0.9;
  s.cfg = tiny_config();
  s.seeds = {3, 4};
  s.jobs = jobs;
  s.arms.push_back({"dense", {{"dense", 4, "nu_teacher"}, {"dense", 4, "nu_zero"}}, {1e-3, 1e-2}});
  s.arms.push_back({"lru", {{"lru", 4, "nu_teacher"}}, {1e-2, 3e-2}});
  return s;
}

}  // namespace

TEST(Adam, MatchesReferenceRuleOnScriptedGradients) {
  const double g[10] = {0.3, -1.2, 0.05, 2.0, -0.7, 0.0, 1e-3, -4.0, 0.8, 0.25};
  Adam adam(2);
  Eigen::VectorXd p(2);
  p << 1.0, -0.5;
  long double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {1.0L, -0.5L};
  for (int t = 1; t <= 10; ++t) {
    Eigen::VectorXd grad(2);
    grad << g[t - 1], -2.0 * g[t - 1];
    adam.step(p, grad, 0.01);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9L * m[i] + 0.1L * grad(i);
      v[i] = 0.999L * v[i] + 0.001L * grad(i) * grad(i);
      const long double mh = m[i] / (1.0L - std::pow(0.9L, t));
      const long double vh = v[i] / (1.0L - std::pow(0.999L, t));
      ref[i] -= 0.01L * mh / (std::sqrt(vh) + 1e-8L);
    }
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(p(i), static_cast<double>(ref[i]), 1e-12);
  }
  EXPECT_EQ(adam.step_count(), 10);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  Adam adam(1);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1), g = Eigen::VectorXd::Constant(1, 123.0);
  adam.step(p, g, 0.1);
  EXPECT_NEAR(p(0), -0.1, 1e-9);
}

TEST(Schedule, CosineEndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(scheduled_lr(Schedule::Cosine, 2.0, 0, 10), 2.0);
  EXPECT_NEAR(scheduled_lr(Schedule::Cosine, 2.0, 5, 10), 1.0, 1e-15);
  EXPECT_GT(scheduled_lr(Schedule::Cosine, 2.0, 9, 10), 0.0);
  EXPECT_DOUBLE_EQ(scheduled_lr(Schedule::Constant, 2.0, 7, 10), 2.0);
}

TEST(Train, StudentAtTeacherStaysAtZeroLoss) {
  const models::DenseLinearSSM dense =
      models::build_teacher(4, 0.9, kPi, stochastic::RngStream(5), {1, 1, 8});
  const models::DiagonalComplexCell teacher = models::to_diagonal(dense);
  TrainConfig cfg = tiny_config();
  const TrainTrace tr = train(teacher, teacher, cfg, stochastic::RngStream(6));
  ASSERT_EQ(tr.loss.size(), 25u);
  for (double l : tr.loss) EXPECT_LE(l, 1e-10);
  // The converted dense teacher starts at rounding level; Adam then amplifies
  // rounding-level gradients by lr/eps, so only the first loss is checked.
  const TrainTrace conv = train(teacher, dense, cfg, stochastic::RngStream(6));
  EXPECT_LE(conv.loss.front(), 1e-20);
}

TEST(Train, MemorylessTeacherIsLearnedThroughFeedthrough) {
  models::DenseLinearSSM teacher = scalar_dense(0.0);
  teacher.C.setZero();
  teacher.D(0, 0) = 0.7;
  TrainConfig cfg = tiny_config();
  cfg.steps = 600;
  cfg.lr = 2e-2;
  models::DenseLinearSSM student = scalar_dense(0.0);
  student.C.setZero();
  const TrainTrace tr = train(student, teacher, cfg, stochastic::RngStream(1));
  EXPECT_NEAR(tr.loss.front(), 0.5 * 0.49, 0.1);
  EXPECT_LE(tr.final_loss(), 1e-6);
}

TEST(Train, InitialLossOfScalarStudentMatchesClosedForm) {
  const cd lam(0.5, 0.0);
  TrainConfig cfg;
  cfg.batch_size = 256;
  cfg.seq_len = 2000;
  const models::TimeSeries x = models::to_time_major(stochastic::sample_wss_sequence(
      stochastic::AutocorrelationModel::iid(), cfg.seq_len, cfg.batch_size, 1, stochastic::RngStream(2)));
  const double mc = evaluate_loss(scalar_diag(lam), scalar_dense(0.8), x);
  EXPECT_NEAR(mc / analytic::loss_1d(lam, cd(0.8, 0.0), 0.0), 1.0, 0.03);
}

TEST(Train, RejectsBadConfigAndMismatchedDims) {
  TrainConfig cfg = tiny_config();
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  models::DenseLinearSSM wide = scalar_dense(0.5);
  wide.B = Eigen::MatrixXd::Ones(1, 2);
  wide.D = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_THROW(train(scalar_dense(0.5), wide, tiny_config(), stochastic::RngStream(0)), DimensionError);
}

TEST(Train, DivergenceIsFlaggedAndHalts) {
  TrainConfig cfg = tiny_config();
  cfg.lr = 1e6;
  cfg.steps = 200;
  const TrainTrace tr = train(scalar_dense(0.5), scalar_dense(0.9), cfg, stochastic::RngStream(0));
  EXPECT_TRUE(tr.diverged);
  EXPECT_LT(tr.loss.size(), 200u);
  EXPECT_TRUE(std::isinf(tr.final_loss()));
}

TEST(Train, FinalLossAveragesLastTwentieth) {
  TrainTrace tr;
  for (int i = 0; i < 40; ++i) tr.loss.push_back(i);
  EXPECT_DOUBLE_EQ(tr.final_loss(), 38.5);
  tr.diverged = true;
  EXPECT_TRUE(std::isinf(tr.final_loss()));
}

TEST(Median, HandlesEvenOddAndDiverged) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_TRUE(std::isinf(median({1.0, INFINITY, INFINITY})));
}

TEST(Sweep, IndependentOfJobsAndRerun) {
  const SweepResult a = lr_grid_sweep(tiny_sweep(1));
  const SweepResult b = lr_grid_sweep(tiny_sweep(3));
  ASSERT_EQ(a.cells.size(), 2u * 2u * 2u + 2u * 2u);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].trace.loss, b.cells[i].trace.loss);
  for (std::size_t k = 0; k < a.arms.size(); ++k) {
    EXPECT_EQ(a.arms[k].best_lr, b.arms[k].best_lr);
    EXPECT_EQ(a.arms[k].best_variant, b.arms[k].best_variant);
  }
}

TEST(Sweep, SingleLearningRateEqualsTrain) {
  SweepSpec s = tiny_sweep(1);
  s.arms = {{"lru", {{"lru", 4, "nu_teacher"}}, {1e-2}}};
  s.seeds = {9};
  const SweepResult r = lr_grid_sweep(s);
  const stochastic::RngStream root(9);
  const models::RecurrentCell teacher = make_teacher(s.teacher, root.child(0));
  const models::RecurrentCell student =
      make_student(s.arms[0].variants[0], s.teacher, root.child(1).child(util::fnv1a64("lru/lru/nu_teacher")));
  TrainConfig cfg = s.cfg;
  cfg.lr = 1e-2;
  EXPECT_EQ(r.cells.at(0).trace.loss, train(student, teacher, cfg, root.child(2)).loss);
  EXPECT_EQ(r.arms.at(0).best_lr, 1e-2);
}

TEST(Sweep, DenseArmScansBothInitializations) {
  const SweepSpec s = desk_comparison_preset(0.99);
  ASSERT_EQ(s.arms[0].name, "dense");
  ASSERT_EQ(s.arms[0].variants.size(), 2u);
  EXPECT_EQ(s.arms[0].variants[0].init, "nu_teacher");
  EXPECT_EQ(s.arms[0].variants[1].init, "nu_zero");
  EXPECT_EQ(s.seeds.size(), 3u);
}

TEST(Sweep, AllDivergedArmThrows) {
  SweepSpec s = tiny_sweep(1);
  s.arms = {{"dense", {{"dense", 4, "nu_teacher"}}, {1e7}}};
  s.cfg.steps = 200;
  EXPECT_THROW(lr_grid_sweep(s), SweepFailureError);
}

TEST(Landscape, RealAxisMinimumAtTeacher) {
  for (double ls : {0.3, 0.77, 0.95}) {
    const auto pts = landscape_grid_1d(cd(ls, 0.0), LandscapeScenario::RealAxis, 101);
    const auto best = std::min_element(pts.begin(), pts.end(),
                                       [](const auto& a, const auto& b) { return a.loss < b.loss; });
    EXPECT_DOUBLE_EQ(best->x, ls);
    EXPECT_NEAR(best->loss, 0.0, 1e-12);
  }
}

TEST(Landscape, CircleZeroAtTeacherAngle) {
  const cd ls = std::polar(0.9, kPi / 100);
  const auto pts = landscape_grid_1d(ls, LandscapeScenario::Circle, 200);
  ASSERT_EQ(pts.size(), 200u);
  bool found = false;
  for (const auto& p : pts) {
    EXPECT_GE(p.loss, -1e-12);
    if (std::abs(p.x - kPi / 100) < 1e-12) {
      found = true;
      EXPECT_NEAR(p.loss, 0.0, 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Landscape, SharpensAsTeacherApproachesUnitCircle) {
  double prev = 0.0;
  for (double ls : {0.5, 0.9, 0.99}) {
    const double h = 1e-3;
    double curv = 0.0;
    for (double x0 : {ls - h, ls, ls + h}) {
      const cd l(x0, 0.0), star(ls, 0.0);
      const double d2 = (analytic::loss_1d(l + h, star, 0.0) - 2.0 * analytic::loss_1d(l, star, 0.0) +
                         analytic::loss_1d(l - h, star, 0.0)) / (h * h);
      curv = std::max(curv, std::abs(d2));
    }
    EXPECT_GT(curv, prev);
    prev = curv;
  }
}

TEST(Landscape, MarksPolesWithoutThrowing) {
  const auto pts = landscape_grid_1d(cd(0.5, 0.0), LandscapeScenario::RealAxis, 11);
  EXPECT_TRUE(pts.back().pole);
  EXPECT_TRUE(std::isinf(pts.back().loss));
  EXPECT_FALSE(pts.front().pole);
  EXPECT_THROW(landscape_grid_1d(cd(1.0, 0.0), LandscapeScenario::Circle, 11), DomainError);
}

TEST(Landscape, ReparamGridSeries) {
  const auto pts = landscape_grid_1d(std::polar(0.9, 0.3), LandscapeScenario::ReparamGrid, 20);
  EXPECT_EQ(pts.size(), 3u * 2u * 20u);
  for (const auto& p : pts) EXPECT_GE(p.loss, -1e-12);
}

TEST(AngleTraining, StationaryAtTeacher) {
  AngleTrainConfig cfg;
  cfg.steps = 500;
  cfg.init_jitter = 0.0;
  const cd ls = std::polar(0.99, kPi / 100);
  for (AngleParam p : {AngleParam::Polar, AngleParam::Exp, AngleParam::Optimal}) {
    const AngleTrajectory t = train_1d_angle(ls, ls, p, cfg);
    ASSERT_EQ(t.lambda.size(), 500u);
    EXPECT_LE(t.terminal_distance(ls), 1e-6) << to_string(p);
  }
}

TEST(AngleTraining, TrajectoryLengthAndDeterminism) {
  AngleTrainConfig cfg;
  cfg.steps = 321;
  cfg.seed = 4;
  const cd l0 = std::polar(0.99, kPi / 4), ls = std::polar(0.99, kPi / 100);
  const AngleTrajectory a = train_1d_angle(l0, ls, AngleParam::Exp, cfg);
  const AngleTrajectory b = train_1d_angle(l0, ls, AngleParam::Exp, cfg);
  EXPECT_EQ(a.lambda.size(), 321u);
  EXPECT_EQ(a.loss.size(), 321u);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_LT(a.loss.back(), a.loss.front());
}

TEST(AngleTraining, RejectsOutsideUnitDisk) {
  EXPECT_THROW(train_1d_angle(cd(1.0, 0.0), cd(0.5, 0.0), AngleParam::Polar, {}), DomainError);
}
