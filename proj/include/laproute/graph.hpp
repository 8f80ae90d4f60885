#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace laproute {

using NodeId = int;
using EdgeId = int;

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Edge {
  EdgeId id;
  NodeId u;
  NodeId v;
  NodeId other(NodeId n) const { return n == u ? v : u; }
};

// Undirected simple graph. Edge ids are dense 0..edge_count()-1 in insertion
// order; self loops and parallel edges are rejected.
class Graph {
 public:
  Graph(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edges);

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(EdgeId e) const;
  const std::vector<Edge>& edges() const { return edges_; }
  std::optional<EdgeId> find_edge(NodeId u, NodeId v) const;
  // (neighbor, connecting edge) pairs sorted by neighbor id
  const std::vector<std::pair<NodeId, EdgeId>>& neighbors(NodeId n) const;

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<NodeId, EdgeId>>> adj_;
};

struct Path {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;

  int length() const { return static_cast<int>(edges.size()); }
  double cost(const Eigen::VectorXd& c) const;
  bool operator==(const Path& o) const { return nodes == o.nodes; }
  bool operator!=(const Path& o) const { return !(*this == o); }
};

struct RouteQuery {
  NodeId source = 0;
  NodeId target = 0;
};

// Builds a Path from a node sequence, resolving edge ids. Throws when the
// sequence is not a simple path of the graph.
Path make_path(const Graph& g, const std::vector<NodeId>& nodes);

// Minimum-cost simple path from source to target. Dispatches to Dijkstra when
// min(c) >= 0 and otherwise to an exact branch-and-bound over simple paths, so
// routes are never corrupted by negative cycles. Ties are broken by the
// lexicographically smallest node sequence. Throws NoPathError when target is
// unreachable.
Path shortest_path(const Graph& g, const Eigen::VectorXd& cost, NodeId source, NodeId target);

// Second-distinct simple path by cost (Yen's algorithm, K = 2), with the same
// general-weight solver on spur graphs. `best` must be the minimum-cost path.
// Returns `best` itself when no alternative simple route exists.
Path second_shortest_simple_path(const Graph& g, const Eigen::VectorXd& cost, NodeId source,
                                 NodeId target, const Path& best);

// All simple source->target paths in lexicographic node-sequence order.
// Throws CapacityError when more than `limit` paths exist.
std::vector<Path> enumerate_simple_paths(const Graph& g, NodeId source, NodeId target,
                                         std::size_t limit = 10000);

bool has_at_least_k_simple_paths(const Graph& g, NodeId source, NodeId target, std::size_t k);

// |E| x |E| 0/1 matrix; entry (e, f) is 1 iff distinct edges e, f share an
// endpoint.
Eigen::MatrixXd line_graph_adjacency(const Graph& g);

}  // namespace laproute
