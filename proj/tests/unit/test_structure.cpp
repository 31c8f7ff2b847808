#include <gtest/gtest.h>

#include "memcurse/errors.hpp"
#include "memcurse/experiments/structure.hpp"

using namespace memcurse;
using namespace memcurse::experiments;

TEST(Concentration, AlignmentFallsAsAnglesConcentrate) {
  ConcentrationConfig cfg;
  cfg.draws = 8;
  const auto rows = eigenvalue_concentration(cfg);
  ASSERT_EQ(rows.size(), 8u * 3u);
  const std::vector<double> m = mean_alignment_by_theta(rows, cfg.theta0);
  EXPECT_GT(m[0], m[1]);
  EXPECT_GT(m[1], m[2]);
  for (const auto& r : rows) {
    EXPECT_GT(r.axis_alignment, 0.0);
    EXPECT_LE(r.axis_alignment, 1.0);
  }
}

TEST(Concentration, DeterministicPerSeed) {
  ConcentrationConfig cfg;
  cfg.draws = 3;
  const auto a = eigenvalue_concentration(cfg), b = eigenvalue_concentration(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].axis_alignment, b[i].axis_alignment);
  cfg.draws = 0;
  EXPECT_THROW(eigenvalue_concentration(cfg), DomainError);
}

TEST(Structure, DiagonalOptimumIsMoreAxisAligned) {
  StructureConfig cfg;
  cfg.nu = 0.9;
  cfg.samples = 300;
  const StructureComparison s = hessian_structure_comparison(cfg);
  EXPECT_EQ(s.dense.matrix.rows(), s.diagonal.matrix.rows());
  EXPECT_LE(s.dense.residual_rms, 1e-8);
  EXPECT_LE(s.diagonal.residual_rms, 1e-8);
  EXPECT_GT(s.diagonal.metrics.axis_alignment, s.dense.metrics.axis_alignment);
  EXPECT_GT(s.diagonal_reduced.metrics.axis_alignment, s.diagonal.metrics.axis_alignment);
  EXPECT_GE(s.dense.eigenvalues.minCoeff(), -1e-8 * s.dense.eigenvalues.maxCoeff());
}
