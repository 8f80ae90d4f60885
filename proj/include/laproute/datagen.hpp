#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "laproute/active.hpp"
#include "laproute/estimator.hpp"
#include "laproute/graph.hpp"
#include "laproute/similarity.hpp"

namespace laproute {

struct SyntheticSpec {
  double mu_mean = 50.0;
  double mu_sd = 10.0;
  double real_noise_sd = 30.0;
  int real_samples_per_edge = 20;
  double unobservable_fraction = 0.25;
  double bias_smoothness = 1.0;  // rho
  double bias_seminorm = 1.0;    // B
  int synth_samples_per_edge = 0;  // 0 stores exact synthetic means
  double synth_noise_sd = 0.0;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  Eigen::VectorXd mu;      // true real means
  Eigen::VectorXd mu_sim;  // synthetic means, mu - bias
  Eigen::VectorXd bias;    // b*
  Eigen::VectorXd sigma2;  // real-measurement noise variances
};

// Draws xi ~ N(0, I), solves (I + rho L) b = xi, and rescales to Laplacian
// seminorm exactly B. Degenerate draws (seminorm numerically zero) are
// redrawn a bounded number of times; B = 0 yields the zero field after a
// single draw so stream consumption does not depend on B.
Eigen::VectorXd smooth_bias_field(const SimilarityModel& m, double rho, double B,
                                  std::uint64_t seed);

struct Instance {
  GroundTruth truth;
  EdgeData data;
};

// Samples a full synthetic instance: edge means, a smooth bias field, an
// unobservable mask, and per-edge measurement samples. Streams are named per
// concern (mu / bias / mask / samples) and samples use per-edge substreams,
// so changing one knob leaves unrelated draws untouched.
Instance make_instance(const Graph& g, const SimilarityModel& m, const SyntheticSpec& spec);

// Real-measurement oracle with lazily seeded per-edge streams; sample values
// for an edge do not depend on queries to other edges.
class GaussianOracle final : public QueryOracle {
 public:
  GaussianOracle(Eigen::VectorXd means, Eigen::VectorXd sds, std::uint64_t seed);
  double sample(EdgeId e) override;

 private:
  Eigen::VectorXd means_;
  Eigen::VectorXd sds_;
  std::uint64_t seed_;
  std::vector<std::optional<std::mt19937_64>> engines_;
};

Graph make_grid_graph(int rows, int cols);
Graph make_ladder_graph(int cols);

}  // namespace laproute
