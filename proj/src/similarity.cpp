#include "laproute/similarity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace laproute {

std::vector<std::vector<int>> support_components(const Eigen::MatrixXd& w, double cutoff) {
  int m = static_cast<int>(w.rows());
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (w(i, j) > cutoff) {
        int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<int>> comps(m);
  for (int i = 0; i < m; ++i) comps[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& c : comps)
    if (!c.empty()) out.push_back(std::move(c));
  return out;
}

SimilarityModel similarity_from_weights(Eigen::MatrixXd w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("similarity matrix must be square");
  if (!w.allFinite()) throw std::invalid_argument("similarity matrix must be finite");
  double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("similarity matrix must be symmetric");
  if (w.minCoeff() < 0.0) throw std::invalid_argument("similarity weights must be nonnegative");
  if (w.diagonal().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("similarity diagonal must be zero");
  w = 0.5 * (w + w.transpose()).eval();

  SimilarityModel m;
  m.laplacian = Eigen::MatrixXd(w.rowwise().sum().asDiagonal()) - w;
  m.components = support_components(w, 0.0);
  m.weights = std::move(w);
  return m;
}

SimilarityModel one_hop_similarity(const Graph& g) {
  return similarity_from_weights(line_graph_adjacency(g));
}

SimilarityModel two_hop_similarity(const Graph& g, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("two-hop weight must be nonnegative");
  Eigen::MatrixXd a = line_graph_adjacency(g);
  Eigen::MatrixXd a2 = a * a;
  int m = static_cast<int>(a.rows());
  Eigen::MatrixXd w = a;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && a(i, j) == 0.0 && a2(i, j) > 0.0) w(i, j) = alpha;
  return similarity_from_weights(std::move(w));
}

SimilarityModel heat_kernel_similarity(const Graph& g, double t, double cutoff) {
  if (t < 0.0) throw std::invalid_argument("diffusion time must be nonnegative");
  if (cutoff < 0.0) throw std::invalid_argument("cutoff must be nonnegative");
  Eigen::MatrixXd a = line_graph_adjacency(g);
  Eigen::MatrixXd lap = Eigen::MatrixXd(a.rowwise().sum().asDiagonal()) - a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
  if (es.info() != Eigen::Success) throw std::runtime_error("line-graph eigendecomposition failed");
  Eigen::VectorXd decay = (-t * es.eigenvalues().array()).exp();
  Eigen::MatrixXd w = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
  w = 0.5 * (w + w.transpose()).eval();
  w.diagonal().setZero();
  w = (w.cwiseAbs().array() < cutoff).select(0.0, w);
  w = w.cwiseMax(0.0);  // exp(-tL) is entrywise nonnegative; clear rounding dust
  return similarity_from_weights(std::move(w));
}

}  // namespace laproute
