#pragma once

#include <Eigen/Dense>

#include <vector>

#include "laproute/graph.hpp"

namespace laproute {

// Edge-similarity model: symmetric nonnegative weights W with zero diagonal,
// the graph Laplacian L = diag(W 1) - W, and the connected components of the
// support of W (each a sorted list of edge ids).
struct SimilarityModel {
  Eigen::MatrixXd weights;
  Eigen::MatrixXd laplacian;
  std::vector<std::vector<int>> components;

  int size() const { return static_cast<int>(weights.rows()); }
};

// Validates W (square, symmetric, nonnegative, zero diagonal) and derives the
// Laplacian and support components.
SimilarityModel similarity_from_weights(Eigen::MatrixXd w);

// W(e, f) = 1 iff e and f share an endpoint.
SimilarityModel one_hop_similarity(const Graph& g);

// Adds two-hop line-graph neighbors at weight alpha.
SimilarityModel two_hop_similarity(const Graph& g, double alpha = 0.5);

// Heat kernel exp(-t L_line) of the line graph, symmetrized, diagonal zeroed,
// entries below cutoff zeroed (in that order).
SimilarityModel heat_kernel_similarity(const Graph& g, double t = 0.5, double cutoff = 1e-6);

// Connected components of {(e, f) : W(e, f) > cutoff}, sorted by smallest
// member; every edge appears exactly once (isolated edges are singletons).
std::vector<std::vector<int>> support_components(const Eigen::MatrixXd& w, double cutoff = 0.0);

}  // namespace laproute
