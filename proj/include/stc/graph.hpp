#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace stc {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph over dense 0-based node indices.
///
/// Adjacency lists are sorted and symmetric. Instances are immutable once
/// built and may be shared freely between concurrent simulations.
class Graph {
 public:
  Graph() = default;

  /// Throws std::invalid_argument on out-of-range indices, self-loops, or
  /// duplicate edges (in either orientation).
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::span<const NodeId> neighbors(NodeId i) const { return adjacency_[i]; }
  std::size_t degree(NodeId i) const { return adjacency_[i].size(); }
  std::size_t max_degree() const { return max_degree_; }
  bool adjacent(NodeId i, NodeId j) const;

  /// Edges as (lo, hi) pairs in lexicographic order.
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
  std::size_t max_degree_ = 0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Region {
  double width = 0.0;
  double height = 0.0;
};

struct GeometricGraph {
  Graph graph;
  std::vector<Point2> positions;
};

/// Row-major dense square matrix; only used for analysis-side quantities.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
};

Graph make_cycle(std::size_t n);
Graph make_complete(std::size_t n);
Graph make_path(std::size_t n);
Graph make_erdos_renyi(std::size_t n, double p, std::mt19937_64& rng);
GeometricGraph make_random_geometric(std::size_t n, Region region, double range,
                                     std::mt19937_64& rng);

bool is_connected(const Graph& g);
DenseMatrix laplacian(const Graph& g);
std::size_t common_neighbors(const Graph& g, NodeId i, NodeId j);

inline constexpr int kConnectedRetryCap = 1000;

/// Resamples until connected. Throws std::runtime_error after
/// kConnectedRetryCap failed attempts.
Graph make_connected_erdos_renyi(std::size_t n, double p, std::mt19937_64& rng);
GeometricGraph make_connected_random_geometric(std::size_t n, Region region, double range,
                                               std::mt19937_64& rng);

}  // namespace stc
