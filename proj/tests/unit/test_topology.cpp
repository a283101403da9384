#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dmm/topology.hpp"
#include "test_support.hpp"

namespace dmm {
namespace {

std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

TEST(Topology, RingMetropolisSpectrumMatchesCirculantFormula) {
  for (int k : {3, 5, 8, 16}) {
    const MixingMatrix m = testing::mixing_for(GraphKind::kRing, k);
    std::vector<double> expected;
    for (int j = 0; j < k; ++j) expected.push_back((1.0 + 2.0 * std::cos(2.0 * std::numbers::pi * j / k)) / 3.0);
    expected = sorted_desc(expected);
    const Vector& got = m.spectral().lambda;
    ASSERT_EQ(got.size(), k);
    for (int j = 0; j < k; ++j) EXPECT_NEAR(got[j], expected[j], 1e-12) << "K=" << k << " j=" << j;
  }
}

TEST(Topology, LineOfTwoAveragesExactly) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kLine, 2);
  EXPECT_DOUBLE_EQ(m.w()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.w()(0, 1), 0.5);
  EXPECT_NEAR(m.spectral().lambda[1], 0.0, 1e-15);
  EXPECT_NEAR(m.lambda_mix(), 0.0, 1e-15);
}

TEST(Topology, CompleteGraphIsUniformAveraging) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kComplete, 5);
  EXPECT_LT((m.w() - Matrix::Constant(5, 5, 0.2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(m.lambda_mix(), 0.0, 1e-12);
}

TEST(Topology, MetropolisWeightsFollowDegreeRule) {
  const Graph g(4, {{0, 1}, {1, 2}, {1, 3}});
  const Matrix w = metropolis_weight_matrix(g);
  EXPECT_DOUBLE_EQ(w(0, 1), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(w(1, 2), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(w(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(w(0, 0), 3.0 / 4.0);
  EXPECT_NEAR(w(1, 1), 1.0 / 4.0, 1e-15);
}

TEST(Topology, SpectralDataReconstructsAndIsOrthogonal) {
  const MixingMatrix m = testing::mixing_for(GraphKind::kMetropolisRandom, 12, 3);
  const SpectralData& s = m.spectral();
  const int k = 12;
  EXPECT_LT((s.u.transpose() * s.u - Matrix::Identity(k, k)).norm(), 1e-12);
  EXPECT_LT((s.u * s.lambda.asDiagonal() * s.u.transpose() - m.w()).norm(), 1e-12);
  EXPECT_LT((s.u.col(0) - Vector::Constant(k, 1.0 / std::sqrt(double(k)))).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(s.lambda[0], 1.0);
  for (int i = 1; i < k; ++i) EXPECT_GE(s.lambda[i - 1], s.lambda[i]);
  EXPECT_EQ(s.u_hat().cols(), k - 1);
}

TEST(Topology, RandomGraphsAreConnectedAndSeeded) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Graph a = build_graph(GraphKind::kMetropolisRandom, 10, seed, {0.3, 1000});
    const Graph b = build_graph(GraphKind::kMetropolisRandom, 10, seed, {0.3, 1000});
    EXPECT_TRUE(a.is_connected());
    EXPECT_EQ(a.edges(), b.edges());
    const MixingMatrix m = metropolis_weights(a);
    EXPECT_LT(m.lambda_mix(), 1.0);
  }
  const Graph full = build_graph(GraphKind::kMetropolisRandom, 6, 1, {1.0, 10});
  EXPECT_EQ(full.edges().size(), 15u);
}

TEST(Topology, MixingInvariantsHoldAcrossKinds) {
  for (GraphKind kind : {GraphKind::kRing, GraphKind::kLine, GraphKind::kComplete, GraphKind::kMetropolisRandom}) {
    for (int k : {2, 4, 9}) {
      const Graph g = build_graph(kind, k, 11);
      const MixingCheck c = check_mixing(g, metropolis_weight_matrix(g));
      EXPECT_TRUE(c.passed) << to_string(kind) << " K=" << k << " " << c.failure;
      EXPECT_LE(c.row_sum, MixingMatrix::kStochasticTol);
      EXPECT_LE(c.symmetry, MixingMatrix::kStochasticTol);
      EXPECT_EQ(c.sparsity, 0.0);
    }
  }
}

TEST(Topology, CorruptedWeightsAreRejected) {
  const Graph g = build_graph(GraphKind::kRing, 6, 1);
  Matrix w = metropolis_weight_matrix(g);
  w(0, 1) += 1e-3;
  const MixingCheck c = check_mixing(g, w);
  EXPECT_FALSE(c.passed);
  EXPECT_EQ(c.failure, "symmetric");
  EXPECT_THROW(MixingMatrix(g, w), InvalidArgument);

  Matrix off_graph = metropolis_weight_matrix(g);
  off_graph(0, 3) = off_graph(3, 0) = 0.1;
  off_graph(0, 0) -= 0.1;
  off_graph(3, 3) -= 0.1;
  EXPECT_EQ(check_mixing(g, off_graph).failure, "sparsity respects graph");
}

TEST(Topology, IdentityIsNotPrimitive) {
  const Graph g = build_graph(GraphKind::kRing, 4, 1);
  const MixingCheck c = check_mixing(g, Matrix::Identity(4, 4));
  EXPECT_FALSE(c.passed);
  EXPECT_EQ(c.failure, "primitive (lambda < 1)");
}

TEST(Topology, BadInputsThrow) {
  EXPECT_THROW(build_graph(GraphKind::kRing, 1, 1), InvalidArgument);
  EXPECT_THROW(build_graph(GraphKind::kMetropolisRandom, 5, 1, {0.0, 10}), InvalidArgument);
  EXPECT_THROW(parse_graph_kind("torus"), InvalidArgument);
  EXPECT_EQ(parse_graph_kind("metropolis"), GraphKind::kMetropolisRandom);
  EXPECT_THROW(Graph(3, {{0, 5}}), InvalidArgument);
}

}  // namespace
}  // namespace dmm
