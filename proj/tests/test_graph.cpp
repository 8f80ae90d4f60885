#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

#include "laproute/graph.hpp"
#include "support/oracles.hpp"

using namespace laproute;

namespace {

Eigen::VectorXd costs(std::initializer_list<double> v) {
  Eigen::VectorXd c(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) c[i++] = x;
  return c;
}

Graph diamond() { return Graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}); }

}  // namespace

TEST_CASE("graph construction and lookups") {
  Graph g(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(g.node_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(g.edge(1).u == 1);
  CHECK(g.edge(1).v == 2);
  CHECK(g.edge(2).other(2) == 0);
  CHECK(g.find_edge(2, 1).value() == 1);
  CHECK(g.find_edge(1, 2).value() == 1);
  CHECK(!g.find_edge(0, 0).has_value());

  auto nb = g.neighbors(2);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].first == 0);
  CHECK(nb[0].second == 2);
  CHECK(nb[1].first == 1);
  CHECK(nb[1].second == 1);

  CHECK_THROWS_AS(Graph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(2, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(2, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("make_path resolves edges and validates") {
  Graph g = diamond();
  Path p = make_path(g, {0, 1, 3});
  CHECK(p.length() == 2);
  CHECK(p.edges == std::vector<EdgeId>{0, 2});
  CHECK(p.cost(costs({1, 1, 5, 1})) == 6.0);

  CHECK_THROWS_AS(make_path(g, {0}), std::invalid_argument);
  CHECK_THROWS_AS(make_path(g, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(make_path(g, {0, 1, 0}), std::invalid_argument);
}

TEST_CASE("shortest path on a triangle") {
  Graph g(3, {{0, 1}, {1, 2}, {0, 2}});
  Path p = shortest_path(g, costs({1, 1, 3}), 0, 2);
  CHECK(p.nodes == std::vector<NodeId>{0, 1, 2});
  CHECK(p.cost(costs({1, 1, 3})) == 2.0);

  // direct edge wins once it is cheap
  Path q = shortest_path(g, costs({1, 1, 1.5}), 0, 2);
  CHECK(q.nodes == std::vector<NodeId>{0, 2});
}

TEST_CASE("shortest path breaks ties lexicographically") {
  Graph g = diamond();
  Path p = shortest_path(g, costs({1, 1, 1, 1}), 0, 3);
  CHECK(p.nodes == std::vector<NodeId>{0, 1, 3});

  // same with the negative-cost solver
  Path q = shortest_path(g, costs({-1, -1, 1, 1}), 0, 3);
  CHECK(q.nodes == std::vector<NodeId>{0, 1, 3});
}

TEST_CASE("negative edges are handled exactly") {
  Graph g = diamond();
  Eigen::VectorXd c = costs({1, 1, -1, 1});
  Path p = shortest_path(g, c, 0, 3);
  CHECK(p.nodes == std::vector<NodeId>{0, 1, 3});
  CHECK(p.cost(c) == 0.0);

  // a very negative edge off the route must not corrupt the answer: the
  // solver only considers simple paths
  Graph h(5, {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 2}});
  Eigen::VectorXd hc = costs({1, 1, 1, -10, -10});
  Path best = shortest_path(h, hc, 0, 3);
  CHECK(best == oracles::enumeration_best(h, hc, 0, 3));
  CHECK(best.cost(hc) == -18.0);
}

TEST_CASE("shortest path error cases") {
  Graph g(4, {{0, 1}, {2, 3}});
  Eigen::VectorXd c = costs({1, 1});
  CHECK_THROWS_AS(shortest_path(g, c, 0, 3), NoPathError);
  CHECK_THROWS_AS(shortest_path(g, c, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(shortest_path(g, costs({1}), 0, 1), std::invalid_argument);
  Eigen::VectorXd bad = costs({1, 1});
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(shortest_path(g, bad, 0, 1), std::invalid_argument);
}

TEST_CASE("second shortest path") {
  Graph g = diamond();
  Eigen::VectorXd c = costs({1, 2, 1, 2});
  Path best = shortest_path(g, c, 0, 3);
  REQUIRE(best.nodes == std::vector<NodeId>{0, 1, 3});
  Path second = second_shortest_simple_path(g, c, 0, 3, best);
  CHECK(second.nodes == std::vector<NodeId>{0, 2, 3});
  CHECK(second.cost(c) == 4.0);

  // single-route graph: returns best itself
  Graph line(3, {{0, 1}, {1, 2}});
  Eigen::VectorXd lc = costs({1, 1});
  Path lb = shortest_path(line, lc, 0, 2);
  CHECK(second_shortest_simple_path(line, lc, 0, 2, lb) == lb);

  CHECK_THROWS_AS(second_shortest_simple_path(g, c, 0, 3, lb), std::invalid_argument);
}

TEST_CASE("second shortest agrees with enumeration on random graphs") {
  std::mt19937_64 eng(7151);
  int done = 0;
  while (done < 40) {
    auto inst = oracles::random_route_instance(eng, 9);
    Eigen::VectorXd c = oracles::random_integer_costs(eng, inst.g.edge_count(), 0, 8);
    std::vector<Path> all;
    try {
      all = enumerate_simple_paths(inst.g, inst.source, inst.target, 4000);
    } catch (const CapacityError&) {
      continue;
    }
    Path best = shortest_path(inst.g, c, inst.source, inst.target);
    Path second = second_shortest_simple_path(inst.g, c, inst.source, inst.target, best);
    CHECK(best == oracles::enumeration_best(inst.g, c, inst.source, inst.target));
    CHECK(second == oracles::enumeration_second(inst.g, c, best));
    ++done;
  }
}

TEST_CASE("path enumeration") {
  Graph g = diamond();
  auto paths = enumerate_simple_paths(g, 0, 3);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].nodes == std::vector<NodeId>{0, 1, 3});
  CHECK(paths[1].nodes == std::vector<NodeId>{0, 2, 3});

  // K4, opposite corners: 1 direct + 2 two-hop + 2 three-hop
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  auto k4paths = enumerate_simple_paths(k4, 0, 3);
  CHECK(k4paths.size() == 5);
  CHECK(std::is_sorted(k4paths.begin(), k4paths.end(),
                       [](const Path& a, const Path& b) { return a.nodes < b.nodes; }));

  CHECK_THROWS_AS(enumerate_simple_paths(k4, 0, 3, 4), CapacityError);
  CHECK_THROWS_AS(enumerate_simple_paths(k4, 0, 0), std::invalid_argument);

  CHECK(has_at_least_k_simple_paths(k4, 0, 3, 5));
  CHECK(!has_at_least_k_simple_paths(k4, 0, 3, 6));
  CHECK(has_at_least_k_simple_paths(g, 0, 3, 2));
  Graph split(4, {{0, 1}, {2, 3}});
  CHECK(!has_at_least_k_simple_paths(split, 0, 3, 1));
}

TEST_CASE("both solvers agree with enumeration on random graphs") {
  std::mt19937_64 eng(40961);
  int done = 0;
  while (done < 60) {
    auto inst = oracles::random_route_instance(eng, 12);
    // alternate nonnegative draws (Dijkstra) with mixed-sign draws (exact
    // branch and bound)
    const bool nonneg = (done % 2) == 0;
    Eigen::VectorXd c =
        oracles::random_integer_costs(eng, inst.g.edge_count(), nonneg ? 0 : -3, 10);
    Path want;
    try {
      want = oracles::enumeration_best(inst.g, c, inst.source, inst.target, 20000);
    } catch (const CapacityError&) {
      continue;
    }
    Path got = shortest_path(inst.g, c, inst.source, inst.target);
    CHECK(got == want);
    CHECK(got.cost(c) == want.cost(c));
    ++done;
  }
}

TEST_CASE("line graph adjacency") {
  // path on 3 nodes: two edges sharing node 1
  Graph p3(3, {{0, 1}, {1, 2}});
  Eigen::MatrixXd a = line_graph_adjacency(p3);
  REQUIRE(a.rows() == 2);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(0, 0) == 0.0);
  CHECK(a(1, 1) == 0.0);

  // two disjoint edges: all zero
  Graph split(4, {{0, 1}, {2, 3}});
  CHECK(line_graph_adjacency(split).isZero(0.0));

  // triangle: every pair of edges shares a node
  Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
  Eigen::MatrixXd t = line_graph_adjacency(tri);
  CHECK(t.sum() == 6.0);
  CHECK(t.diagonal().isZero(0.0));
  CHECK(t == t.transpose());
}
