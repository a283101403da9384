#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "dmm/transform.hpp"
#include "test_support.hpp"

namespace dmm {
namespace {

double two_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

TEST(Transform, BlockFactorReassemblesEveryCase) {
  for (double lambda : {-0.9, -0.5, -1.0 / 3.0, 0.0, 0.2, 0.5, 0.8, 0.99}) {
    for (StrategyKind kind : kAllStrategies) {
      double la = 1, lc = 1, lb = 0;
      switch (kind) {
        case StrategyKind::kED: la = lambda, lc = 1, lb = std::sqrt(1 - lambda); break;
        case StrategyKind::kEXTRA: la = 1, lc = lambda, lb = std::sqrt(1 - lambda); break;
        case StrategyKind::kATC_GT: la = lambda * lambda, lc = 1, lb = 1 - lambda; break;
        case StrategyKind::kSemiATC_GT: la = lambda, lc = lambda, lb = 1 - lambda; break;
        case StrategyKind::kNonATC_GT: la = 1, lc = lambda * lambda, lb = 1 - lambda; break;
      }
      const BlockFactor f = factor_block(la, lc, lb);
      EXPECT_LT((f.v * f.t * f.v_inv - f.g).norm(), 1e-12) << to_string(kind) << " lambda " << lambda;
      Eigen::Matrix2d g;
      g << la * lc - lb * lb, -lb, lb, 1;
      EXPECT_EQ(f.g, g);
    }
  }
}

TEST(Transform, ClassifiesBlockShapes) {
  // ED at lambda = 0.5: trace 1, determinant 1/2, complex pair.
  EXPECT_EQ(factor_block(0.5, 1.0, std::sqrt(0.5)).kind, BlockCase::kComplex);
  // EXTRA at lambda = -1/3: roots 1/3 and -1.
  const BlockFactor real = factor_block(1.0, -1.0 / 3.0, std::sqrt(4.0 / 3.0));
  EXPECT_EQ(real.kind, BlockCase::kRealDistinct);
  EXPECT_NEAR(std::min(real.t(0, 0), real.t(1, 1)), -1.0, 1e-14);
  EXPECT_NEAR(std::max(real.t(0, 0), real.t(1, 1)), 1.0 / 3.0, 1e-14);
  // ATC-GT has trace 2 lambda and determinant lambda^2: always a double root.
  for (double lambda : {-0.5, 0.3, 0.9}) {
    const BlockFactor atc = factor_block(lambda * lambda, 1.0, 1.0 - lambda);
    EXPECT_EQ(atc.kind, BlockCase::kJordan);
    EXPECT_NEAR(atc.t(0, 0), lambda, 1e-15);
  }
  const BlockFactor complex = factor_block(0.5, 1.0, std::sqrt(0.5));
  EXPECT_NEAR(complex.t(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(complex.t(0, 1)), 0.5, 1e-15);
}

TEST(Transform, TwoAgentLineExactDiffusionIsAJordanBlock) {
  // lambda = 0: G = [[-1, -1], [1, 1]] is nilpotent.
  const BlockFactor f = factor_block(0.0, 1.0, 1.0);
  EXPECT_EQ(f.kind, BlockCase::kJordan);
  EXPECT_DOUBLE_EQ(f.epsilon, 0.5);
  EXPECT_EQ(f.t(0, 0), 0.0);
  EXPECT_EQ(f.t(1, 1), 0.0);
  EXPECT_EQ(f.t(0, 1), 0.5);
  EXPECT_LT((f.v * f.t * f.v_inv - f.g).norm(), 1e-15);

  const TransitionFactorization tf =
      build_transition(build_strategy(StrategyKind::kED, testing::mixing_for(GraphKind::kLine, 2)));
  EXPECT_NEAR(tf.t_norm, 0.5, 1e-12);
}

TEST(Transform, TransitionReassemblesAndNormIsBlockMaximum) {
  for (GraphKind g : {GraphKind::kRing, GraphKind::kLine, GraphKind::kMetropolisRandom}) {
    const MixingMatrix m = testing::mixing_for(g, 9, 2);
    for (StrategyKind kind : kAllStrategies) {
      const TransitionFactorization f = build_transition(build_strategy(kind, m));
      EXPECT_LT(f.reassembly_residual, 1e-12) << to_string(g) << " " << to_string(kind);
      EXPECT_NEAR(f.t_norm, two_norm(f.t), 1e-12);
      EXPECT_LT((f.q_hat * f.q_hat_inv - Matrix::Identity(16, 16)).norm(), 1e-10);
    }
  }
}

TEST(Transform, AtcNormGrowsWithRingSize) {
  double previous = 0.0;
  for (int k : {5, 10, 20}) {
    const double t =
        build_transition(build_strategy(StrategyKind::kATC_GT, testing::mixing_for(GraphKind::kRing, k))).t_norm;
    EXPECT_LT(t, 1.0);
    EXPECT_GT(t, previous) << "K=" << k;
    previous = t;
  }
}

TEST(Transform, EvenRingPutsTheExactDiffusionFamilyOnTheUnitCircle) {
  // Metropolis weights on an even ring have eigenvalue -1/3, where the
  // ED/EXTRA block has eigenvalue -1.
  const MixingMatrix m = testing::mixing_for(GraphKind::kRing, 8);
  EXPECT_NEAR(m.spectral().lambda[7], -1.0 / 3.0, 1e-14);
  for (StrategyKind kind : {StrategyKind::kED, StrategyKind::kEXTRA})
    EXPECT_NEAR(build_transition(build_strategy(kind, m)).t_norm, 1.0, 1e-12) << to_string(kind);
  for (StrategyKind kind : {StrategyKind::kATC_GT, StrategyKind::kSemiATC_GT, StrategyKind::kNonATC_GT})
    EXPECT_LT(build_transition(build_strategy(kind, m)).t_norm, 1.0 - 1e-6) << to_string(kind);
}

TEST(Transform, ConsensusStateHasNoError) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kRing, 5);
  for (StrategyKind kind : kAllStrategies) {
    const StrategySet s = build_strategy(kind, m);
    const TransitionFactorization f = build_transition(s);
    const Block x = Block::Constant(5, 2, 3.0), zero = Block::Zero(5, 2);
    const CoupledError e = compute_error_vectors(s, f, 0.1, 0.1, x, zero, zero, x, zero, zero);
    EXPECT_LT(e.e_x.norm(), 1e-13);
    EXPECT_LT(e.e_y.norm(), 1e-13);
  }
}

TEST(Transform, AuxiliaryVariableAtZeroDual) {
  const StrategySet s = build_strategy(StrategyKind::kSemiATC_GT, testing::mixing_for(GraphKind::kLine, 4));
  std::mt19937_64 rng(5);
  const Block x = testing::random_block(4, 2, rng), m = testing::random_block(4, 2, rng);
  const Block zero = Block::Zero(4, 2);
  EXPECT_LT((auxiliary_x(s, 0.3, x, zero, m) - (0.3 * (s.a * m) - s.b_sq * x)).norm(), 1e-14);
  EXPECT_LT((auxiliary_y(s, 0.3, x, zero, m) - (-0.3 * (s.a * m) - s.b_sq * x)).norm(), 1e-14);
}

TEST(Transform, RecordedRunsSatisfyTheTransformedRecursion) {
  QuadraticOptions o;
  o.agents = 6;
  o.dim_x = o.dim_y = 4;
  o.samples_per_agent = 50;
  const auto p = make_quadratic(o, 3);
  for (GraphKind g : {GraphKind::kLine, GraphKind::kMetropolisRandom}) {
    const MixingMatrix m = testing::mixing_for(g, 6, 4);
    for (StrategyKind kind : kAllStrategies) {
      RunConfig c;
      c.rounds = 40;
      c.strategy = kind;
      c.grace = specialize(EstimatorName::kGRACE, 50);
      c.record_trajectory = true;
      const RunResult r = run(*p, m, c, make_initialization(6, 4, 4, 2, 1.0, false));
      const StrategySet s = build_strategy(kind, m);
      const TransformReport rep = verify_transformed_dynamics(s, build_transition(s), *r.trajectory, c.mu_x, c.mu_y);
      EXPECT_EQ(rep.rounds.size(), 40u);
      EXPECT_LE(rep.max_error, kErrorTol) << to_string(g) << " " << to_string(kind);
      EXPECT_LE(rep.max_centroid, kCentroidTol) << to_string(g) << " " << to_string(kind);
      EXPECT_FALSE(rep.contraction_checked);
    }
  }
}

TEST(Transform, ZeroStepRunsContract) {
  QuadraticOptions o;
  o.agents = 8;
  o.dim_x = o.dim_y = 3;
  o.samples_per_agent = 40;
  const auto p = make_quadratic(o, 3);
  const MixingMatrix m = testing::mixing_for(GraphKind::kLine, 8);
  for (StrategyKind kind : kAllStrategies) {
    RunConfig c;
    c.rounds = 60;
    c.mu_x = c.mu_y = 0.0;
    c.strategy = kind;
    c.grace = specialize(EstimatorName::kSTORM, 40);
    c.record_trajectory = true;
    const RunResult r = run(*p, m, c, make_initialization(8, 3, 3, 5, 1.0, false));
    const StrategySet s = build_strategy(kind, m);
    const TransformReport rep = verify_transformed_dynamics(s, build_transition(s), *r.trajectory, 0.0, 0.0);
    EXPECT_TRUE(rep.contraction_checked);
    EXPECT_TRUE(rep.contraction_holds) << to_string(kind) << " excess " << rep.worst_contraction_excess;
  }
}

TEST(Transform, ReportListsEveryRound) {
  TransformReport rep;
  rep.rounds.resize(3);
  std::ostringstream out;
  write_report(rep, out);
  const std::string text = out.str();
  EXPECT_NE(text.find("round,centroid_x,centroid_y,error_x,error_y,norm_e_x,norm_e_y"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4 + 1 + 3);
}

}  // namespace
}  // namespace dmm
