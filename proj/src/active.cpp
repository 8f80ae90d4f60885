#include "laproute/active.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "laproute/estimator.hpp"

namespace laproute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long default_round_budget(long edge_count, const Eigen::VectorXd& sigma2) {
  double cap = std::ceil(sigma2.maxCoeff());
  if (cap < 1.0) cap = 1.0;
  return 10 * edge_count * static_cast<long>(cap);
}

void record_query(ActiveState& s, EdgeId e, double value) {
  // running mean update
  const long n = s.counts[static_cast<std::size_t>(e)];
  s.real_mean[e] = (s.real_mean[e] * static_cast<double>(n) + value) / static_cast<double>(n + 1);
  s.counts[static_cast<std::size_t>(e)] = n + 1;
  s.total_queries += 1;
}

// Calibrate from the current counts and rank best against challenger at round
// t. Does not query.
StepResult rank_round(const ActiveState& s, const Graph& g, const SimilarityModel& m,
                      const ActiveConfig& cfg) {
  StepResult step;
  if (s.round < 1) throw std::logic_error("active step: state not initialized");

  Eigen::VectorXd w = active_weights(s.sigma2, s.counts, cfg.kappa_minus);
  Eigen::VectorXd y = s.real_mean - s.synth_mean;
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (s.counts[static_cast<std::size_t>(e)] == 0) y[e] = 0.0;
  Eigen::VectorXd bias = solve_bias(y, WeightSpec::plain(w), m, cfg.lambda);
  step.mu_hat = s.synth_mean + bias;

  BoundConfig bc;
  bc.seminorm_cap = cfg.seminorm_cap;
  bc.delta = cfg.delta;
  bc.lambda = cfg.lambda;
  bc.kappa_plus = cfg.kappa_plus;
  bc.kappa_minus = cfg.kappa_minus;
  bc.bias_constant = cfg.bias_constant;
  RadiusTable r = anytime_radii(m, w, bc, s.round);

  step.best = shortest_path(g, step.mu_hat, s.source, s.target);
  step.challenger = challenger_path(g, step.mu_hat, r, step.best);

  if (step.challenger == step.best) {
    // no alternative route: the best is trivially certified
    step.ucb_best = step.best.cost(step.mu_hat);
    step.lcb_challenger = step.ucb_best;
    step.gap = 0.0;
    step.stopped = true;
    return step;
  }

  double ub = 0.0;
  for (EdgeId e : step.best.edges) ub += step.mu_hat[e] + r.radius[e];
  double lb = 0.0;
  for (EdgeId e : step.challenger.edges) lb += step.mu_hat[e] - r.radius[e];
  step.ucb_best = ub;
  step.lcb_challenger = lb;
  step.gap = ub - lb;
  step.stopped = ub <= lb + cfg.epsilon;
  return step;
}

ActiveReport run_loop(const Graph& g, const SimilarityModel& m, const Eigen::VectorXd& synth_mean,
                      const Eigen::VectorXd& sigma2, NodeId source, NodeId target,
                      const ActiveConfig& cfg, QueryOracle& oracle,
                      const std::function<EdgeId(const ActiveState&)>& chooser) {
  ActiveState s = initialize_active(g, synth_mean, sigma2, source, target, oracle);
  const long max_rounds =
      cfg.max_rounds > 0 ? cfg.max_rounds : default_round_budget(g.edge_count(), sigma2);

  ActiveReport rep;
  while (true) {
    const long t = s.round;
    StepResult step = rank_round(s, g, m, cfg);
    if (!step.stopped) {
      EdgeId pick = chooser(s);
      step.queried = pick;
      record_query(s, pick, oracle.sample(pick));
      s.round += 1;
    }

    GapTraceRow row;
    row.round = t;
    row.gap = step.gap;
    row.ucb_best = step.ucb_best;
    row.lcb_challenger = step.lcb_challenger;
    row.best_cost = step.best.cost(step.mu_hat);
    row.queried = step.queried ? *step.queried : -1;
    row.best = path_to_string(step.best);
    row.challenger = path_to_string(step.challenger);
    rep.trace.push_back(std::move(row));

    if (step.stopped) {
      rep.certified = true;
      rep.path = step.best;
      rep.rounds = t;
      rep.mu_hat = step.mu_hat;
      break;
    }
    if (s.round > max_rounds) {
      // budget exhausted: report the current best without a certificate
      rep.certified = false;
      rep.path = step.best;
      rep.rounds = max_rounds;
      rep.mu_hat = step.mu_hat;
      break;
    }
  }
  rep.total_queries = s.total_queries;
  rep.counts = s.counts;
  return rep;
}

}  // namespace

long ActiveState::total_count() const {
  long t = 0;
  for (long c : counts) t += c;
  return t;
}

ActiveState initialize_active(const Graph& g, const Eigen::VectorXd& synth_mean,
                              const Eigen::VectorXd& sigma2, NodeId source, NodeId target,
                              QueryOracle& oracle) {
  if (synth_mean.size() != g.edge_count() || sigma2.size() != g.edge_count())
    throw std::invalid_argument("initialize_active: vector length mismatch");
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (!(sigma2[e] > 0.0) || !std::isfinite(sigma2[e]))
      throw std::invalid_argument("initialize_active: sigma2 must be positive and finite");

  ActiveState s;
  s.counts.assign(static_cast<std::size_t>(g.edge_count()), 0);
  s.real_mean = Eigen::VectorXd::Zero(g.edge_count());
  s.synth_mean = synth_mean;
  s.sigma2 = sigma2;
  s.source = source;
  s.target = target;
  s.sim_best = shortest_path(g, synth_mean, source, target);
  for (EdgeId e : s.sim_best.edges) record_query(s, e, oracle.sample(e));
  s.round = 1;
  return s;
}

EdgeId greedy_query_choice(const Eigen::VectorXd& sigma2, const std::vector<long>& counts) {
  if (sigma2.size() != static_cast<Eigen::Index>(counts.size()) || counts.empty())
    throw std::invalid_argument("greedy_query_choice: bad inputs");
  EdgeId best = -1;
  double best_score = -kInf;
  for (EdgeId e = 0; e < sigma2.size(); ++e) {
    const long n = counts[static_cast<std::size_t>(e)];
    const double score = n == 0 ? kInf : sigma2[e] / static_cast<double>(n);
    if (score > best_score) {
      best_score = score;
      best = e;
    }
  }
  return best;
}

Eigen::VectorXd active_weights(const Eigen::VectorXd& sigma2, const std::vector<long>& counts,
                               double kappa_minus) {
  Eigen::VectorXd w(sigma2.size());
  for (EdgeId e = 0; e < sigma2.size(); ++e)
    w[e] = kappa_minus * static_cast<double>(counts[static_cast<std::size_t>(e)]) / sigma2[e];
  return w;
}

Path challenger_path(const Graph& g, const Eigen::VectorXd& mu_hat, const RadiusTable& r,
                     const Path& best) {
  Eigen::VectorXd lcb(mu_hat.size());
  for (EdgeId e = 0; e < mu_hat.size(); ++e) {
    if (!std::isfinite(r.radius[e]))
      throw std::invalid_argument("challenger_path: infinite radius");
    lcb[e] = mu_hat[e] - r.radius[e];
  }
  NodeId src = best.nodes.front();
  NodeId tgt = best.nodes.back();
  Path p = shortest_path(g, lcb, src, tgt);
  if (!(p == best)) return p;
  return second_shortest_simple_path(g, lcb, src, tgt, best);
}

StepResult active_step(ActiveState& s, const Graph& g, const SimilarityModel& m,
                       const ActiveConfig& cfg, QueryOracle& oracle) {
  StepResult step = rank_round(s, g, m, cfg);
  if (!step.stopped) {
    EdgeId pick = greedy_query_choice(s.sigma2, s.counts);
    step.queried = pick;
    record_query(s, pick, oracle.sample(pick));
    s.round += 1;
  }
  return step;
}

ActiveReport run_aesp(const Graph& g, const SimilarityModel& m, const Eigen::VectorXd& synth_mean,
                      const Eigen::VectorXd& sigma2, NodeId source, NodeId target,
                      const ActiveConfig& cfg, QueryOracle& oracle) {
  return run_loop(g, m, synth_mean, sigma2, source, target, cfg, oracle,
                  [&](const ActiveState& s) { return greedy_query_choice(s.sigma2, s.counts); });
}

ActiveReport run_random_baseline(const Graph& g, const SimilarityModel& m,
                                 const Eigen::VectorXd& synth_mean, const Eigen::VectorXd& sigma2,
                                 NodeId source, NodeId target, const ActiveConfig& cfg,
                                 QueryOracle& oracle, std::uint64_t selector_seed) {
  std::mt19937_64 sel(selector_seed);
  std::uniform_int_distribution<EdgeId> pick(0, static_cast<EdgeId>(g.edge_count() - 1));
  return run_loop(g, m, synth_mean, sigma2, source, target, cfg, oracle,
                  [&](const ActiveState&) { return pick(sel); });
}

std::string path_to_string(const Path& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    if (i) os << '-';
    os << p.nodes[i];
  }
  return os.str();
}

}  // namespace laproute
