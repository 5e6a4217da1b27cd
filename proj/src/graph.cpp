#include "stc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stc {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  Graph g;
  g.adjacency_.resize(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") has an index outside [0," + std::to_string(n) + ")");
    }
    if (a == b) {
      throw std::invalid_argument("self-loop at node " + std::to_string(a));
    }
    g.adjacency_[a].push_back(b);
    g.adjacency_[b].push_back(a);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& adj = g.adjacency_[i];
    std::sort(adj.begin(), adj.end());
    if (std::adjacent_find(adj.begin(), adj.end()) != adj.end()) {
      throw std::invalid_argument("duplicate edge at node " + std::to_string(i));
    }
    g.max_degree_ = std::max(g.max_degree_, adj.size());
  }
  g.edge_count_ = edges.size();
  return g;
}

bool Graph::adjacent(NodeId i, NodeId j) const {
  const auto& adj = adjacency_[i];
  return std::binary_search(adj.begin(), adj.end(), j);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < size(); ++i) {
    for (NodeId j : adjacency_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

Graph make_cycle(std::size_t n) {
  if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, edges);
}

Graph make_complete(std::size_t n) {
  if (n < 2) throw std::invalid_argument("complete graph needs n >= 2");
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

Graph make_path(std::size_t n) {
  if (n < 1) throw std::invalid_argument("path needs n >= 1");
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

Graph make_erdos_renyi(std::size_t n, double p, std::mt19937_64& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in (0,1]");
  std::bernoulli_distribution keep(p);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (keep(rng)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

GeometricGraph make_random_geometric(std::size_t n, Region region, double range,
                                     std::mt19937_64& rng) {
  if (!(range > 0.0)) throw std::invalid_argument("communication range must be positive");
  if (!(region.width > 0.0 && region.height > 0.0))
    throw std::invalid_argument("deployment region must have positive width and height");
  std::uniform_real_distribution<double> ux(0.0, region.width);
  std::uniform_real_distribution<double> uy(0.0, region.height);
  GeometricGraph out;
  out.positions.resize(n);
  for (auto& p : out.positions) {
    // Clamp guards the rare libstdc++ case of returning the upper bound.
    p.x = std::min(ux(rng), region.width);
    p.y = std::min(uy(rng), region.height);
  }
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double dx = out.positions[i].x - out.positions[j].x;
      const double dy = out.positions[i].y - out.positions[j].y;
      if (std::hypot(dx, dy) <= range) edges.emplace_back(i, j);
    }
  }
  out.graph = Graph::from_edges(n, edges);
  return out;
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.size();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const NodeId i = stack.back();
    stack.pop_back();
    for (NodeId j : g.neighbors(i)) {
      if (!seen[j]) {
        seen[j] = 1;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == n;
}

DenseMatrix laplacian(const Graph& g) {
  DenseMatrix l{g.size(), std::vector<double>(g.size() * g.size(), 0.0)};
  for (NodeId i = 0; i < g.size(); ++i) {
    l(i, i) = static_cast<double>(g.degree(i));
    for (NodeId j : g.neighbors(i)) l(i, j) = -1.0;
  }
  return l;
}

std::size_t common_neighbors(const Graph& g, NodeId i, NodeId j) {
  if (i == j) throw std::invalid_argument("common_neighbors needs two distinct nodes");
  const auto a = g.neighbors(i);
  const auto b = g.neighbors(j);
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

Graph make_connected_erdos_renyi(std::size_t n, double p, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kConnectedRetryCap; ++attempt) {
    Graph g = make_erdos_renyi(n, p, rng);
    if (is_connected(g)) return g;
  }
  throw std::runtime_error("no connected Erdos-Renyi graph after retry cap");
}

GeometricGraph make_connected_random_geometric(std::size_t n, Region region, double range,
                                               std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kConnectedRetryCap; ++attempt) {
    GeometricGraph g = make_random_geometric(n, region, range, rng);
    if (is_connected(g.graph)) return g;
  }
  throw std::runtime_error("no connected random geometric graph after retry cap");
}

}  // namespace stc
