#include "laproute/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace laproute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool lex_less(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_endpoint(const Graph& g, NodeId n, const char* what) {
  if (n < 0 || n >= g.node_count()) throw std::invalid_argument(std::string(what) + " out of range");
}

void check_cost_vector(const Graph& g, const Eigen::VectorXd& c) {
  if (c.size() != g.edge_count()) throw std::invalid_argument("cost vector size mismatch");
  if (!c.allFinite()) throw std::invalid_argument("cost vector must be finite");
}

struct Label {
  double dist;
  std::vector<NodeId> nodes;
};

struct LabelWorse {
  bool operator()(const Label& a, const Label& b) const {
    if (a.dist != b.dist) return a.dist > b.dist;
    return lex_less(b.nodes, a.nodes);
  }
};

// Uniform-cost search over simple paths, exact for nonnegative costs.
// Re-expands a node when an equal-distance, lexicographically smaller
// sequence arrives, so ties resolve to the smallest node sequence.
std::optional<std::vector<NodeId>> dijkstra_nodes(const Graph& g, const Eigen::VectorXd& c,
                                                  NodeId s, NodeId t,
                                                  const std::vector<char>& banned_node,
                                                  EdgeId banned_edge) {
  std::priority_queue<Label, std::vector<Label>, LabelWorse> pq;
  std::vector<double> best_dist(g.node_count(), kInf);
  std::vector<std::vector<NodeId>> best_seq(g.node_count());
  pq.push({0.0, {s}});
  while (!pq.empty()) {
    Label cur = pq.top();
    pq.pop();
    NodeId v = cur.nodes.back();
    if (v == t) return cur.nodes;
    if (cur.dist > best_dist[v]) continue;
    if (cur.dist == best_dist[v] && !lex_less(cur.nodes, best_seq[v])) continue;
    best_dist[v] = cur.dist;
    best_seq[v] = cur.nodes;
    for (const auto& [w, e] : g.neighbors(v)) {
      if (banned_node[w] || e == banned_edge) continue;
      if (std::find(cur.nodes.begin(), cur.nodes.end(), w) != cur.nodes.end()) continue;
      Label nxt{cur.dist + c(e), cur.nodes};
      nxt.nodes.push_back(w);
      if (nxt.dist > best_dist[w]) continue;
      pq.push(std::move(nxt));
    }
  }
  return std::nullopt;
}

// Depth-first branch and bound over simple paths; handles negative costs
// exactly. Admissible bound: distance to target under costs clamped at zero
// plus the total negative mass of unused edges.
struct BranchAndBound {
  const Graph& g;
  const Eigen::VectorXd& c;
  NodeId target;
  const std::vector<char>& banned_node;
  EdgeId banned_edge;
  std::vector<double> to_target;  // clamped-cost distances
  double best_cost = kInf;
  std::vector<NodeId> best_nodes;
  std::vector<char> on_path;
  std::vector<NodeId> cur;

  BranchAndBound(const Graph& gg, const Eigen::VectorXd& cc, NodeId t,
                 const std::vector<char>& bn, EdgeId be)
      : g(gg), c(cc), target(t), banned_node(bn), banned_edge(be), on_path(gg.node_count(), 0) {
    to_target.assign(g.node_count(), kInf);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    to_target[t] = 0.0;
    pq.push({0.0, t});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > to_target[v]) continue;
      for (const auto& [w, e] : g.neighbors(v)) {
        if (banned_node[w] || e == banned_edge) continue;
        double nd = d + std::max(c(e), 0.0);
        if (nd < to_target[w]) {
          to_target[w] = nd;
          pq.push({nd, w});
        }
      }
    }
  }

  void run(NodeId s, double neg_total) {
    cur.push_back(s);
    on_path[s] = 1;
    dfs(s, 0.0, neg_total);
    on_path[s] = 0;
    cur.pop_back();
  }

  void dfs(NodeId v, double acc, double neg_remaining) {
    if (v == target) {
      if (acc < best_cost || (acc == best_cost && lex_less(cur, best_nodes))) {
        best_cost = acc;
        best_nodes = cur;
      }
      return;
    }
    for (const auto& [w, e] : g.neighbors(v)) {
      if (on_path[w] || banned_node[w] || e == banned_edge) continue;
      double ce = c(e);
      double nacc = acc + ce;
      double nneg = neg_remaining - std::min(ce, 0.0);
      double bound = nacc + to_target[w] + nneg;
      if (!(bound < kInf) || bound > best_cost + 1e-12) continue;
      on_path[w] = 1;
      cur.push_back(w);
      dfs(w, nacc, nneg);
      cur.pop_back();
      on_path[w] = 0;
    }
  }
};

std::optional<std::vector<NodeId>> solve_nodes(const Graph& g, const Eigen::VectorXd& c, NodeId s,
                                               NodeId t, const std::vector<char>& banned_node,
                                               EdgeId banned_edge) {
  if (c.minCoeff() >= 0.0) return dijkstra_nodes(g, c, s, t, banned_node, banned_edge);
  double neg_total = 0.0;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (e == banned_edge) continue;
    const Edge& ed = g.edge(e);
    if (banned_node[ed.u] || banned_node[ed.v]) continue;
    neg_total += std::min(c(e), 0.0);
  }
  BranchAndBound bb(g, c, t, banned_node, banned_edge);
  if (!(bb.to_target[s] < kInf)) return std::nullopt;
  bb.run(s, neg_total);
  if (bb.best_nodes.empty()) return std::nullopt;
  return bb.best_nodes;
}

}  // namespace

Graph::Graph(int node_count, const std::vector<std::pair<NodeId, NodeId>>& edges)
    : node_count_(node_count) {
  if (node_count <= 0) throw std::invalid_argument("graph needs a positive node count");
  adj_.resize(node_count);
  edges_.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || u >= node_count || v < 0 || v >= node_count)
      throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self loops are not allowed");
    if (find_edge(u, v)) throw std::invalid_argument("parallel edges are not allowed");
    EdgeId id = static_cast<EdgeId>(i);
    edges_.push_back({id, u, v});
    adj_[u].push_back({v, id});
    adj_[v].push_back({u, id});
  }
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

const Edge& Graph::edge(EdgeId e) const {
  if (e < 0 || e >= edge_count()) throw std::invalid_argument("edge id out of range");
  return edges_[e];
}

std::optional<EdgeId> Graph::find_edge(NodeId u, NodeId v) const {
  if (u < 0 || u >= node_count_ || v < 0 || v >= node_count_) return std::nullopt;
  for (const auto& [w, e] : adj_[u])
    if (w == v) return e;
  return std::nullopt;
}

const std::vector<std::pair<NodeId, EdgeId>>& Graph::neighbors(NodeId n) const {
  if (n < 0 || n >= node_count_) throw std::invalid_argument("node id out of range");
  return adj_[n];
}

double Path::cost(const Eigen::VectorXd& c) const {
  double total = 0.0;
  for (EdgeId e : edges) total += c(e);
  return total;
}

Path make_path(const Graph& g, const std::vector<NodeId>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("path needs at least two nodes");
  Path p;
  p.nodes = nodes;
  p.edges.reserve(nodes.size() - 1);
  std::vector<char> seen(g.node_count(), 0);
  for (NodeId n : nodes) {
    check_endpoint(g, n, "path node");
    if (seen[n]) throw std::invalid_argument("path revisits a node");
    seen[n] = 1;
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto e = g.find_edge(nodes[i], nodes[i + 1]);
    if (!e) throw std::invalid_argument("consecutive path nodes are not adjacent");
    p.edges.push_back(*e);
  }
  return p;
}

Path shortest_path(const Graph& g, const Eigen::VectorXd& cost, NodeId source, NodeId target) {
  check_cost_vector(g, cost);
  check_endpoint(g, source, "source");
  check_endpoint(g, target, "target");
  if (source == target) throw std::invalid_argument("source equals target");
  std::vector<char> banned(g.node_count(), 0);
  auto nodes = solve_nodes(g, cost, source, target, banned, -1);
  if (!nodes) throw NoPathError("target unreachable from source");
  return make_path(g, *nodes);
}

Path second_shortest_simple_path(const Graph& g, const Eigen::VectorXd& cost, NodeId source,
                                 NodeId target, const Path& best) {
  check_cost_vector(g, cost);
  check_endpoint(g, source, "source");
  check_endpoint(g, target, "target");
  if (best.nodes.empty() || best.nodes.front() != source || best.nodes.back() != target)
    throw std::invalid_argument("best path does not match the route query");

  std::optional<Path> runner;
  auto consider = [&](const std::vector<NodeId>& nodes) {
    Path cand = make_path(g, nodes);
    if (cand == best) return;
    if (!runner) {
      runner = cand;
      return;
    }
    double cc = cand.cost(cost), rc = runner->cost(cost);
    if (cc < rc || (cc == rc && lex_less(cand.nodes, runner->nodes))) runner = cand;
  };

  std::vector<char> banned(g.node_count(), 0);
  for (std::size_t i = 0; i + 1 < best.nodes.size(); ++i) {
    NodeId spur = best.nodes[i];
    for (std::size_t j = 0; j < i; ++j) banned[best.nodes[j]] = 1;
    auto tail = solve_nodes(g, cost, spur, target, banned, best.edges[i]);
    for (std::size_t j = 0; j < i; ++j) banned[best.nodes[j]] = 0;
    if (!tail) continue;
    std::vector<NodeId> nodes(best.nodes.begin(), best.nodes.begin() + i);
    nodes.insert(nodes.end(), tail->begin(), tail->end());
    consider(nodes);
  }
  return runner ? *runner : best;
}

std::vector<Path> enumerate_simple_paths(const Graph& g, NodeId source, NodeId target,
                                         std::size_t limit) {
  check_endpoint(g, source, "source");
  check_endpoint(g, target, "target");
  if (source == target) throw std::invalid_argument("source equals target");
  std::vector<Path> out;
  std::vector<NodeId> cur{source};
  std::vector<char> on_path(g.node_count(), 0);
  on_path[source] = 1;
  auto dfs = [&](auto&& self, NodeId v) -> void {
    if (v == target) {
      if (out.size() >= limit) throw CapacityError("simple path enumeration limit exceeded");
      out.push_back(make_path(g, cur));
      return;
    }
    for (const auto& [w, e] : g.neighbors(v)) {
      (void)e;
      if (on_path[w]) continue;
      on_path[w] = 1;
      cur.push_back(w);
      self(self, w);
      cur.pop_back();
      on_path[w] = 0;
    }
  };
  dfs(dfs, source);
  return out;
}

bool has_at_least_k_simple_paths(const Graph& g, NodeId source, NodeId target, std::size_t k) {
  if (k == 0) return true;
  check_endpoint(g, source, "source");
  check_endpoint(g, target, "target");
  if (source == target) return false;
  std::size_t found = 0;
  std::vector<char> on_path(g.node_count(), 0);
  on_path[source] = 1;
  auto dfs = [&](auto&& self, NodeId v) -> bool {
    if (v == target) return ++found >= k;
    for (const auto& [w, e] : g.neighbors(v)) {
      (void)e;
      if (on_path[w]) continue;
      on_path[w] = 1;
      bool done = self(self, w);
      on_path[w] = 0;
      if (done) return true;
    }
    return false;
  };
  return dfs(dfs, source);
}

Eigen::MatrixXd line_graph_adjacency(const Graph& g) {
  int m = g.edge_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int e = 0; e < m; ++e) {
    for (int f = e + 1; f < m; ++f) {
      const Edge &ee = g.edge(e), &ff = g.edge(f);
      bool shared = ee.u == ff.u || ee.u == ff.v || ee.v == ff.u || ee.v == ff.v;
      if (shared) a(e, f) = a(f, e) = 1.0;
    }
  }
  return a;
}

}  // namespace laproute
