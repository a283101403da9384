#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmm/common.hpp"

namespace dmm {

enum class GraphKind { kRing, kLine, kComplete, kMetropolisRandom };

std::string_view to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

// Undirected graph over agents [0, K). Self-loops are implicit.
class Graph {
 public:
  Graph(int node_count, std::vector<std::pair<int, int>> edges);

  int node_count() const { return node_count_; }
  // Sorted, deduplicated, each pair stored as (min, max).
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int node) const { return adjacency_.at(node); }
  int degree(int node) const { return static_cast<int>(adjacency_.at(node).size()); }
  bool has_edge(int i, int j) const;
  bool is_connected() const;

 private:
  int node_count_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
};

struct GraphOptions {
  double edge_probability = 0.5;  // metropolis_random only, in (0, 1]
  int max_retries = 1000;
};

// Throws InvalidArgument for K < 2 or bad options, NumericError when a
// connected random graph cannot be drawn within the retry budget.
Graph build_graph(GraphKind kind, int node_count, std::uint64_t seed,
                  const GraphOptions& options = {});

struct SpectralData {
  Matrix u;              // orthogonal, first column 1/sqrt(K)
  Vector lambda;         // descending, lambda[0] == 1
  double lambda_mix = 0; // max |lambda[i]| for i >= 1
  Matrix u_hat() const { return u.rightCols(u.cols() - 1); }
  Vector lambda_hat() const { return lambda.tail(lambda.size() - 1); }
};

struct MixingCheck {
  double symmetry = 0;
  double row_sum = 0;
  double col_sum = 0;
  double sparsity = 0;  // largest |w_ij| on a non-edge
  double lambda_mix = 0;
  double reconstruction = 0;
  bool passed = false;
  std::string failure;  // name of the first failed invariant
};

// Symmetric doubly stochastic primitive mixing matrix with cached spectral data.
class MixingMatrix {
 public:
  static constexpr double kStochasticTol = 1e-12;
  static constexpr double kReconstructionTol = 1e-10;

  // Validates every invariant; throws InvalidArgument naming the first failure.
  MixingMatrix(Graph graph, Matrix weights);

  const Graph& graph() const { return graph_; }
  const Matrix& w() const { return w_; }
  int size() const { return static_cast<int>(w_.rows()); }
  const SpectralData& spectral() const { return spectral_; }
  double lambda_mix() const { return spectral_.lambda_mix; }

 private:
  Graph graph_;
  Matrix w_;
  SpectralData spectral_;
};

// Full invariant check without throwing.
MixingCheck check_mixing(const Graph& graph, const Matrix& weights);

// Eigendecomposition with the Perron vector placed first and the remaining
// columns re-orthogonalized against it. Eigenvalues sorted descending, ties by
// original solver index.
SpectralData spectral_data(const Matrix& weights);

// w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal fills rows to 1.
Matrix metropolis_weight_matrix(const Graph& graph);
MixingMatrix metropolis_weights(const Graph& graph);

}  // namespace dmm
