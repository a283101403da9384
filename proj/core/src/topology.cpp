#include "dmm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include <Eigen/Eigenvalues>

namespace dmm {

std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kRing: return "ring";
    case GraphKind::kLine: return "line";
    case GraphKind::kComplete: return "complete";
    case GraphKind::kMetropolisRandom: return "metropolis_random";
  }
  return "unknown";
}

GraphKind parse_graph_kind(std::string_view name) {
  if (name == "ring") return GraphKind::kRing;
  if (name == "line") return GraphKind::kLine;
  if (name == "complete") return GraphKind::kComplete;
  if (name == "metropolis_random" || name == "metropolis") return GraphKind::kMetropolisRandom;
  throw InvalidArgument("unknown topology '" + std::string(name) + "'");
}

Graph::Graph(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count), adjacency_(node_count > 0 ? node_count : 0) {
  require(node_count >= 1, "graph needs at least one node");
  for (auto& [i, j] : edges) {
    require(i >= 0 && i < node_count && j >= 0 && j < node_count,
            "edge index out of range");
    require(i != j, "explicit self-loops are not allowed (they are implicit)");
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
}

bool Graph::is_connected() const {
  std::vector<bool> seen(node_count_, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int visited = 1;
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    for (int next : adjacency_[node]) {
      if (!seen[next]) {
        seen[next] = true;
        ++visited;
        frontier.push(next);
      }
    }
  }
  return visited == node_count_;
}

Graph build_graph(GraphKind kind, int node_count, std::uint64_t seed,
                  const GraphOptions& options) {
  require(node_count >= 2, "topology needs K >= 2 agents");
  std::vector<std::pair<int, int>> edges;
  switch (kind) {
    case GraphKind::kRing:
      for (int i = 0; i < node_count; ++i) edges.emplace_back(i, (i + 1) % node_count);
      return Graph(node_count, std::move(edges));
    case GraphKind::kLine:
      for (int i = 0; i + 1 < node_count; ++i) edges.emplace_back(i, i + 1);
      return Graph(node_count, std::move(edges));
    case GraphKind::kComplete:
      for (int i = 0; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j) edges.emplace_back(i, j);
      return Graph(node_count, std::move(edges));
    case GraphKind::kMetropolisRandom: {
      require(options.edge_probability > 0.0 && options.edge_probability <= 1.0,
              "edge probability must lie in (0, 1]");
      require(options.max_retries >= 1, "retry budget must be positive");
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(options.edge_probability);
      for (int attempt = 0; attempt < options.max_retries; ++attempt) {
        edges.clear();
        for (int i = 0; i < node_count; ++i)
          for (int j = i + 1; j < node_count; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
        Graph graph(node_count, edges);
        if (graph.is_connected()) return graph;
      }
      throw NumericError("could not draw a connected random graph within the retry budget");
    }
  }
  throw InvalidArgument("unknown graph kind");
}

SpectralData spectral_data(const Matrix& weights) {
  const Eigen::Index k = weights.rows();
  require(k >= 1 && weights.cols() == k, "mixing matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(weights);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed on mixing matrix");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const Vector& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

  SpectralData out;
  out.u.resize(k, k);
  out.lambda.resize(k);
  const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
  out.u.col(0).setConstant(inv_sqrt_k);
  out.lambda[0] = 1.0;
  for (Eigen::Index j = 1; j < k; ++j) {
    Vector v = solver.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    // Two passes of modified Gram-Schmidt against the columns already placed.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index prev = 0; prev < j; ++prev) v -= out.u.col(prev).dot(v) * out.u.col(prev);
    }
    const double norm = v.norm();
    if (!(norm > 1e-8)) throw NumericError("eigenvector collapsed during re-orthogonalization");
    out.u.col(j) = v / norm;
    out.lambda[j] = values[order[static_cast<std::size_t>(j)]];
  }
  out.lambda_mix = 0.0;
  for (Eigen::Index j = 1; j < k; ++j) out.lambda_mix = std::max(out.lambda_mix, std::abs(out.lambda[j]));
  return out;
}

MixingCheck check_mixing(const Graph& graph, const Matrix& w) {
  MixingCheck check;
  const int k = graph.node_count();
  if (w.rows() != k || w.cols() != k) {
    check.failure = "shape";
    return check;
  }
  check.symmetry = (w - w.transpose()).cwiseAbs().maxCoeff();
  check.row_sum = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  check.col_sum = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && !graph.has_edge(i, j)) check.sparsity = std::max(check.sparsity, std::abs(w(i, j)));

  if (check.symmetry > MixingMatrix::kStochasticTol) {
    check.failure = "symmetric";
  } else if (check.row_sum > MixingMatrix::kStochasticTol || check.col_sum > MixingMatrix::kStochasticTol) {
    check.failure = "doubly stochastic";
  } else if (check.sparsity > 0.0) {
    check.failure = "sparsity respects graph";
  }
  if (!check.failure.empty()) return check;

  const SpectralData spectral = spectral_data(w);
  check.lambda_mix = spectral.lambda_mix;
  check.reconstruction =
      (spectral.u * spectral.lambda.asDiagonal() * spectral.u.transpose() - w).norm();
  if (!(check.lambda_mix < 1.0 - MixingMatrix::kStochasticTol)) {
    check.failure = "primitive (lambda < 1)";
  } else if (check.reconstruction > MixingMatrix::kReconstructionTol) {
    check.failure = "eigendecomposition reconstruction";
  } else {
    check.passed = true;
  }
  return check;
}

MixingMatrix::MixingMatrix(Graph graph, Matrix weights)
    : graph_(std::move(graph)), w_(std::move(weights)) {
  const MixingCheck check = check_mixing(graph_, w_);
  if (!check.passed) throw InvalidArgument("invalid mixing matrix: " + check.failure + " check failed");
  spectral_ = spectral_data(w_);
}

Matrix metropolis_weight_matrix(const Graph& graph) {
  const int k = graph.node_count();
  Matrix w = Matrix::Zero(k, k);
  for (const auto& [i, j] : graph.edges()) {
    const double weight = 1.0 / (1.0 + std::max(graph.degree(i), graph.degree(j)));
    w(i, j) = weight;
    w(j, i) = weight;
  }
  for (int i = 0; i < k; ++i) {
    double off = 0.0;
    for (int j : graph.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return w;
}

MixingMatrix metropolis_weights(const Graph& graph) {
  require(graph.is_connected(), "metropolis weights need a connected graph");
  return MixingMatrix(graph, metropolis_weight_matrix(graph));
}

}  // namespace dmm
