#include <cmath>

#include <gtest/gtest.h>

#include "dmm/strategy.hpp"
#include "test_support.hpp"

namespace dmm {
namespace {

double gap(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(Strategy, MatricesFollowTheStrategyTable) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kRing, 7);
  const Matrix& w = m.w();
  const Matrix i = Matrix::Identity(7, 7);
  const Matrix w2 = w * w;
  const Matrix iw2 = (i - w) * (i - w);

  const StrategySet ed = build_strategy(StrategyKind::kED, m);
  EXPECT_LT(gap(ed.a, w), 1e-15);
  EXPECT_LT(gap(ed.c, i), 1e-15);
  EXPECT_LT(gap(ed.b_sq, i - w), 1e-15);
  EXPECT_LT(gap(ed.b * ed.b, i - w), 1e-12);

  const StrategySet extra = build_strategy(StrategyKind::kEXTRA, m);
  EXPECT_LT(gap(extra.a, i), 1e-15);
  EXPECT_LT(gap(extra.c, w), 1e-15);
  EXPECT_LT(gap(extra.b, ed.b), 1e-15);

  const StrategySet atc = build_strategy(StrategyKind::kATC_GT, m);
  EXPECT_LT(gap(atc.a, w2), 1e-15);
  EXPECT_LT(gap(atc.c, i), 1e-15);
  EXPECT_LT(gap(atc.b, i - w), 1e-15);
  EXPECT_LT(gap(atc.b_sq, iw2), 1e-15);

  const StrategySet semi = build_strategy(StrategyKind::kSemiATC_GT, m);
  EXPECT_LT(gap(semi.a, w), 1e-15);
  EXPECT_LT(gap(semi.c, w), 1e-15);

  const StrategySet non = build_strategy(StrategyKind::kNonATC_GT, m);
  EXPECT_LT(gap(non.a, i), 1e-15);
  EXPECT_LT(gap(non.c, w2), 1e-15);
}

TEST(Strategy, EigenvaluesDiagonalizeInTheMixingBasis) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kMetropolisRandom, 9, 5);
  const Matrix& u = m.spectral().u;
  for (StrategyKind kind : kAllStrategies) {
    const StrategySet s = build_strategy(kind, m);
    EXPECT_DOUBLE_EQ(s.eig_a[0], 1.0);
    EXPECT_DOUBLE_EQ(s.eig_c[0], 1.0);
    EXPECT_DOUBLE_EQ(s.eig_b[0], 0.0);
    EXPECT_LT(gap(u.transpose() * s.a * u, Matrix(s.eig_a.asDiagonal())), 1e-12) << to_string(kind);
    EXPECT_LT(gap(u.transpose() * s.c * u, Matrix(s.eig_c.asDiagonal())), 1e-12) << to_string(kind);
    EXPECT_LT(gap(u.transpose() * s.b * u, Matrix(s.eig_b.asDiagonal())), 1e-12) << to_string(kind);
  }
}

TEST(Strategy, ValidationPassesOnEveryGraph) {
  for (GraphKind g : {GraphKind::kRing, GraphKind::kLine, GraphKind::kComplete, GraphKind::kMetropolisRandom}) {
    for (int k : {2, 5, 8, 13}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const MixingMatrix m = testing::mixing_for(g, k, seed);
        for (StrategyKind kind : kAllStrategies) {
          const ValidationReport r = validate_strategy(build_strategy(kind, m));
          EXPECT_TRUE(r.all_passed()) << to_string(g) << " K=" << k << " " << to_string(kind) << ": "
                                      << r.failures();
        }
      }
    }
  }
}

TEST(Strategy, BSquareRootAnnihilatesOnes) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kRing, 8);
  for (StrategyKind kind : kAllStrategies) {
    const StrategySet s = build_strategy(kind, m);
    EXPECT_LT((s.b * Vector::Ones(8)).cwiseAbs().maxCoeff(), 1e-15) << to_string(kind);
    EXPECT_LT((Vector::Ones(8).transpose() * s.b).cwiseAbs().maxCoeff(), 1e-15) << to_string(kind);
  }
}

TEST(Strategy, ValidationNamesABrokenSquareRoot) {
  StrategySet s = build_strategy(StrategyKind::kED, testing::mixing_for(GraphKind::kRing, 6));
  s.b(0, 0) += 1e-3;
  const ValidationReport r = validate_strategy(s);
  EXPECT_FALSE(r.all_passed());
  EXPECT_NE(r.failures().find("b*b == b_sq"), std::string::npos);
}

TEST(Strategy, DiagnosticsOnTwoAgentLine) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kLine, 2);
  const StrategyDiagnostics ed = strategy_diagnostics(build_strategy(StrategyKind::kED, m));
  EXPECT_NEAR(ed.a_radius, 0.0, 1e-15);
  EXPECT_NEAR(ed.b_radius, 1.0, 1e-15);
  EXPECT_NEAR(ed.min_nonzero_eig_bsq, 1.0, 1e-15);
  const StrategyDiagnostics atc = strategy_diagnostics(build_strategy(StrategyKind::kATC_GT, m));
  EXPECT_NEAR(atc.a_radius, 0.0, 1e-15);
  EXPECT_NEAR(atc.min_nonzero_eig_bsq, 1.0, 1e-15);
}

TEST(Strategy, NamesRoundTrip) {
  for (StrategyKind kind : kAllStrategies) EXPECT_EQ(parse_strategy_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_strategy_kind("DIGing"), InvalidArgument);
  EXPECT_TRUE(is_gradient_tracking(StrategyKind::kSemiATC_GT));
  EXPECT_FALSE(is_gradient_tracking(StrategyKind::kEXTRA));
}

}  // namespace
}  // namespace dmm
