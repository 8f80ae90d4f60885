#include "doctest.h"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <vector>

#include "laproute/similarity.hpp"
#include "support/oracles.hpp"

using namespace laproute;

namespace {

Graph path_graph(int nodes) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i + 1 < nodes; ++i) e.emplace_back(i, i + 1);
  return Graph(nodes, e);
}

void check_model_invariants(const SimilarityModel& m) {
  const Eigen::MatrixXd& w = m.weights;
  CHECK(w.rows() == w.cols());
  CHECK((w - w.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.diagonal().isZero(0.0));
  // Laplacian rows sum to zero and L = D - W
  CHECK(m.laplacian.rowwise().sum().isZero(1e-12));
  Eigen::MatrixXd l = Eigen::MatrixXd(w.rowwise().sum().asDiagonal()) - w;
  CHECK((m.laplacian - l).lpNorm<Eigen::Infinity>() <= 1e-12);
  // components partition the edge set
  std::vector<int> seen(m.size(), 0);
  for (const auto& comp : m.components)
    for (int e : comp) ++seen[e];
  for (int c : seen) CHECK(c == 1);
}

}  // namespace

TEST_CASE("similarity_from_weights validates input") {
  Eigen::MatrixXd ok = Eigen::MatrixXd::Zero(2, 2);
  ok(0, 1) = ok(1, 0) = 1.0;
  SimilarityModel m = similarity_from_weights(ok);
  CHECK(m.size() == 2);
  check_model_invariants(m);

  Eigen::MatrixXd rect = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(similarity_from_weights(rect), std::invalid_argument);

  Eigen::MatrixXd asym = ok;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(similarity_from_weights(asym), std::invalid_argument);

  Eigen::MatrixXd neg = ok;
  neg(0, 1) = neg(1, 0) = -1.0;
  CHECK_THROWS_AS(similarity_from_weights(neg), std::invalid_argument);

  Eigen::MatrixXd diag = ok;
  diag(0, 0) = 1.0;
  CHECK_THROWS_AS(similarity_from_weights(diag), std::invalid_argument);
}

TEST_CASE("one hop similarity on small graphs") {
  // two edges sharing a node
  SimilarityModel m = one_hop_similarity(path_graph(3));
  check_model_invariants(m);
  CHECK(m.weights(0, 1) == 1.0);
  Eigen::MatrixXd want(2, 2);
  want << 1, -1, -1, 1;
  CHECK((m.laplacian - want).lpNorm<Eigen::Infinity>() == 0.0);
  REQUIRE(m.components.size() == 1);
  CHECK(m.components[0] == std::vector<int>{0, 1});

  // disjoint edges: isolated in the line graph
  Graph split(4, {{0, 1}, {2, 3}});
  SimilarityModel s = one_hop_similarity(split);
  CHECK(s.weights.isZero(0.0));
  CHECK(s.laplacian.isZero(0.0));
  CHECK(s.components.size() == 2);

  // triangle: line graph is K3, Laplacian diagonal 2
  Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
  SimilarityModel t = one_hop_similarity(tri);
  check_model_invariants(t);
  CHECK(t.laplacian.diagonal() == Eigen::Vector3d(2, 2, 2));
}

TEST_CASE("two hop similarity") {
  // path on 4 nodes: edges 0-1-2 in the line graph; 0 and 2 are two hops apart
  SimilarityModel m = two_hop_similarity(path_graph(4), 0.5);
  check_model_invariants(m);
  CHECK(m.weights(0, 1) == 1.0);
  CHECK(m.weights(1, 2) == 1.0);
  CHECK(m.weights(0, 2) == 0.5);

  // path on 6 nodes: edges 0 and 4 are four hops apart, stay at zero
  SimilarityModel far = two_hop_similarity(path_graph(6), 0.5);
  CHECK(far.weights(0, 4) == 0.0);
  CHECK(far.weights(0, 3) == 0.0);
  CHECK(far.weights(0, 2) == 0.5);

  // alpha is honored
  SimilarityModel a = two_hop_similarity(path_graph(4), 0.25);
  CHECK(a.weights(0, 2) == 0.25);
}

TEST_CASE("heat kernel similarity") {
  // two-edge line graph: exp(-tL) off-diagonal is (1 - exp(-2t)) / 2
  const double t = 0.5;
  SimilarityModel m = heat_kernel_similarity(path_graph(3), t);
  check_model_invariants(m);
  CHECK(m.weights(0, 1) == doctest::Approx((1.0 - std::exp(-2.0 * t)) / 2.0).epsilon(1e-12));
  CHECK(m.weights(0, 1) == doctest::Approx(0.31606027941427883).epsilon(1e-12));

  // t -> 0: everything falls below the default cutoff
  SimilarityModel zero = heat_kernel_similarity(path_graph(3), 1e-9);
  CHECK(zero.weights.isZero(0.0));

  // small t, no cutoff: exp(-tL) - (I - tL) = O(t^2)
  const double eps = 1e-3;
  SimilarityModel lin = heat_kernel_similarity(path_graph(4), eps, 0.0);
  SimilarityModel one = one_hop_similarity(path_graph(4));
  Eigen::MatrixXd expm = (-eps * one.laplacian).exp();
  // compare off-diagonal entries: the kernel is eps * W + O(eps^2)
  for (int i = 0; i < lin.size(); ++i)
    for (int j = 0; j < lin.size(); ++j) {
      if (i == j) continue;
      CHECK(lin.weights(i, j) == doctest::Approx(eps * one.weights(i, j)).epsilon(5e-3));
      CHECK(lin.weights(i, j) == doctest::Approx(expm(i, j)).epsilon(1e-9));
    }

  // disconnected line graph stays zero
  Graph split(4, {{0, 1}, {2, 3}});
  CHECK(heat_kernel_similarity(split, t).weights.isZero(0.0));

  // cutoff thresholds small entries
  SimilarityModel cut = heat_kernel_similarity(path_graph(6), 0.05, 1e-3);
  check_model_invariants(cut);
  CHECK(cut.weights(0, 1) > 0.0);
  CHECK(cut.weights(0, 4) == 0.0);
}

TEST_CASE("support components") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
  w(0, 1) = w(1, 0) = 1.0;
  w(3, 4) = w(4, 3) = 0.2;
  auto comps = support_components(w);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<int>{0, 1});
  CHECK(comps[1] == std::vector<int>{2});
  CHECK(comps[2] == std::vector<int>{3, 4});

  // cutoff drops weak links
  auto cut = support_components(w, 0.5);
  CHECK(cut.size() == 4);

  // chain of positive entries forms one component
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(4, 4);
  chain(0, 1) = chain(1, 0) = 0.1;
  chain(1, 2) = chain(2, 1) = 0.1;
  chain(2, 3) = chain(3, 2) = 0.1;
  CHECK(support_components(chain).size() == 1);
}

TEST_CASE("Laplacian quadratic form identity") {
  std::mt19937_64 eng(1234);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd w = oracles::random_similarity(eng, 7, 0.5);
    SimilarityModel m = similarity_from_weights(w);
    check_model_invariants(m);
    Eigen::VectorXd x(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 7; ++i) x[i] = gauss(eng);
    double quad = x.dot(m.laplacian * x);
    double direct = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j) direct += w(i, j) * (x[i] - x[j]) * (x[i] - x[j]);
    CHECK(quad == doctest::Approx(direct).epsilon(1e-10));
    CHECK(quad >= -1e-12);
  }
}
