#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laproute/bounds.hpp"
#include "laproute/graph.hpp"
#include "laproute/similarity.hpp"

namespace laproute {

// One real-cost sample per call; implementations must be deterministic under
// their seed regardless of query interleaving.
class QueryOracle {
 public:
  virtual ~QueryOracle() = default;
  virtual double sample(EdgeId e) = 0;
};

struct ActiveConfig {
  double lambda = 1.0;
  double seminorm_cap = 1.0;  // B
  double delta = 0.1;
  double epsilon = 0.0;
  double kappa_plus = 1.0;
  double kappa_minus = 1.0;
  long max_rounds = 0;  // <= 0 picks 10 * |E| * ceil(max sigma^2)
  BoundConfig::BiasConstant bias_constant = BoundConfig::BiasConstant::per_form;
};

struct ActiveState {
  long round = 0;  // t, starts at 1 after initialization
  std::vector<long> counts;
  Eigen::VectorXd real_mean;  // running means, 0 where unqueried
  Eigen::VectorXd synth_mean;
  Eigen::VectorXd sigma2;  // known per-edge noise variances
  NodeId source = 0;
  NodeId target = 0;
  Path sim_best;  // shortest route under the synthetic means
  long total_queries = 0;

  long total_count() const;
};

// Queries one real sample per edge of the synthetic-best route and starts the
// round counter at one.
ActiveState initialize_active(const Graph& g, const Eigen::VectorXd& synth_mean,
                              const Eigen::VectorXd& sigma2, NodeId source, NodeId target,
                              QueryOracle& oracle);

// argmax_e sigma_e^2 / n_e with sigma^2 / 0 = +inf; ties go to the lowest
// edge id.
EdgeId greedy_query_choice(const Eigen::VectorXd& sigma2, const std::vector<long>& counts);

// w_e(t) = kappa_minus * n_e(t) / sigma_e^2
Eigen::VectorXd active_weights(const Eigen::VectorXd& sigma2, const std::vector<long>& counts,
                               double kappa_minus);

// argmin LCB over routes other than `best`: the LCB-shortest path when it
// differs from `best`, otherwise the second-shortest (Yen, K = 2). Defaults to
// `best` when no alternative route exists.
Path challenger_path(const Graph& g, const Eigen::VectorXd& mu_hat, const RadiusTable& r,
                     const Path& best);

struct StepResult {
  bool stopped = false;
  Path best;
  Path challenger;
  double ucb_best = 0.0;
  double lcb_challenger = 0.0;
  double gap = 0.0;
  std::optional<EdgeId> queried;
  Eigen::VectorXd mu_hat;
};

// One round: calibrate, compute anytime radii, rank best against challenger,
// stop or query greedily. Single-route graphs certify immediately.
StepResult active_step(ActiveState& s, const Graph& g, const SimilarityModel& m,
                       const ActiveConfig& cfg, QueryOracle& oracle);

struct GapTraceRow {
  long round = 0;
  double gap = 0.0;
  double ucb_best = 0.0;
  double lcb_challenger = 0.0;
  double best_cost = 0.0;
  EdgeId queried = -1;  // -1 on the stopping round
  std::string best;
  std::string challenger;
};

struct ActiveReport {
  bool certified = false;
  Path path;
  long rounds = 0;
  long total_queries = 0;
  std::vector<long> counts;
  Eigen::VectorXd mu_hat;
  std::vector<GapTraceRow> trace;
};

ActiveReport run_aesp(const Graph& g, const SimilarityModel& m, const Eigen::VectorXd& synth_mean,
                      const Eigen::VectorXd& sigma2, NodeId source, NodeId target,
                      const ActiveConfig& cfg, QueryOracle& oracle);

// Same loop with uniformly random queries from a dedicated selector stream;
// shares the initialization rule with run_aesp.
ActiveReport run_random_baseline(const Graph& g, const SimilarityModel& m,
                                 const Eigen::VectorXd& synth_mean, const Eigen::VectorXd& sigma2,
                                 NodeId source, NodeId target, const ActiveConfig& cfg,
                                 QueryOracle& oracle, std::uint64_t selector_seed);

std::string path_to_string(const Path& p);

}  // namespace laproute
