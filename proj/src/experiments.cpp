#include "laproute/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "laproute/bounds.hpp"
#include "laproute/estimator.hpp"
#include "laproute/io.hpp"
#include "laproute/rng.hpp"
#include "laproute/similarity.hpp"

namespace laproute {

namespace {

using nlohmann::json;

const std::set<std::string> kScenarios = {"estimate", "paths", "active"};
const std::set<std::string> kEstimators = {"ours", "sim", "real", "const"};
const std::set<std::string> kKernels = {"one_hop", "two_hop", "heat"};
const std::set<std::string> kLambdaMethods = {"fixed", "sure", "cv", "discrepancy"};

// sweep axes; the first five regenerate the instance and are unavailable for
// bundle graphs, the last two apply to the active scenario only
const std::vector<std::string> kGenerativeAxes = {"unobservable_fraction", "real_noise_sd",
                                                  "bias_seminorm", "bias_smoothness",
                                                  "real_samples_per_edge"};
const std::vector<std::string> kActiveAxes = {"delta", "epsilon"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& known) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

void validate_axis_values(const std::string& name, const std::vector<double>& vals) {
  if (vals.empty()) throw ConfigError("axis '" + name + "' has no values");
  for (double v : vals) {
    if (!std::isfinite(v)) throw ConfigError("axis '" + name + "' has a non-finite value");
    if (name == "unobservable_fraction" && (v < 0.0 || v > 1.0))
      throw ConfigError("axis 'unobservable_fraction' values must lie in [0, 1]");
    if ((name == "real_noise_sd" || name == "bias_seminorm" || name == "lambda" ||
         name == "epsilon") &&
        v < 0.0)
      throw ConfigError("axis '" + name + "' values must be nonnegative");
    if (name == "bias_smoothness" && v <= 0.0)
      throw ConfigError("axis 'bias_smoothness' values must be positive");
    if (name == "real_samples_per_edge" && (v < 0.0 || v != std::floor(v)))
      throw ConfigError("axis 'real_samples_per_edge' values must be nonnegative integers");
    if (name == "delta" && (v <= 0.0 || v >= 1.0))
      throw ConfigError("axis 'delta' values must lie in (0, 1)");
  }
}

BoundConfig::BiasConstant bias_constant_from_string(const std::string& s) {
  if (s == "per_form") return BoundConfig::BiasConstant::per_form;
  if (s == "static_form") return BoundConfig::BiasConstant::static_form;
  if (s == "anytime_form") return BoundConfig::BiasConstant::anytime_form;
  throw ConfigError("unknown bias_constant '" + s + "'");
}

std::string bias_constant_name(BoundConfig::BiasConstant c) {
  switch (c) {
    case BoundConfig::BiasConstant::static_form: return "static_form";
    case BoundConfig::BiasConstant::anytime_form: return "anytime_form";
    default: return "per_form";
  }
}

int resolved_min_routes(const ExperimentConfig& cfg) {
  if (cfg.min_routes > 0) return cfg.min_routes;
  return cfg.scenario == "active" ? 10 : 2;
}

struct Prepared {
  Graph g;
  SimilarityModel m;
  std::optional<Instance> bundle;
};

Prepared prepare(const ExperimentConfig& cfg) {
  if (cfg.graph.kind == GraphSource::Kind::bundle) {
    InstanceBundle b = load_instance_bundle(cfg.graph.path);
    return Prepared{std::move(b.graph), std::move(b.similarity), std::move(b.instance)};
  }
  Graph g = cfg.graph.kind == GraphSource::Kind::ladder
                ? make_ladder_graph(cfg.graph.cols)
                : make_grid_graph(cfg.graph.rows, cfg.graph.cols);
  SimilarityModel m = cfg.kernel.name == "one_hop" ? one_hop_similarity(g)
                      : cfg.kernel.name == "two_hop"
                          ? two_hop_similarity(g, cfg.kernel.alpha)
                          : heat_kernel_similarity(g, cfg.kernel.t, cfg.kernel.cutoff);
  return Prepared{std::move(g), std::move(m), std::nullopt};
}

// one row of raw output; metrics are scenario specific
struct RawRow {
  std::vector<double> axis_vals;
  int seed = 0;
  int source = -1;
  int target = -1;
  std::string label;
  std::vector<double> metrics;
};

std::vector<std::vector<double>> cartesian(const std::vector<SweepAxis>& axes) {
  std::vector<std::vector<double>> points{{}};
  for (const SweepAxis& ax : axes) {
    std::vector<std::vector<double>> next;
    for (const std::vector<double>& p : points)
      for (double v : ax.values) {
        std::vector<double> q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

struct PointParams {
  SyntheticSpec spec;
  std::optional<double> lambda_override;
  double delta;
  double epsilon;
};

PointParams apply_point(const ExperimentConfig& cfg, const std::vector<double>& vals) {
  PointParams p{cfg.base, std::nullopt, cfg.active.delta, cfg.active.epsilon};
  for (std::size_t i = 0; i < cfg.axes.size(); ++i) {
    const std::string& name = cfg.axes[i].name;
    const double v = vals[i];
    if (name == "unobservable_fraction")
      p.spec.unobservable_fraction = v;
    else if (name == "real_noise_sd")
      p.spec.real_noise_sd = v;
    else if (name == "bias_seminorm")
      p.spec.bias_seminorm = v;
    else if (name == "bias_smoothness")
      p.spec.bias_smoothness = v;
    else if (name == "real_samples_per_edge")
      p.spec.real_samples_per_edge = static_cast<int>(std::lround(v));
    else if (name == "lambda")
      p.lambda_override = v;
    else if (name == "delta")
      p.delta = v;
    else if (name == "epsilon")
      p.epsilon = v;
  }
  return p;
}

double resolve_lambda(const ExperimentConfig& cfg, const PointParams& p, const EdgeData& d,
                      const SimilarityModel& m, const WeightSpec& w, std::uint64_t run_seed) {
  if (p.lambda_override) return *p.lambda_override;
  const LambdaRule& r = cfg.lambda_rule;
  if (r.method == "fixed") return r.fixed;
  std::vector<double> grid = default_lambda_grid();
  if (r.method == "sure") return tune_lambda_sure(d, m, w, grid);
  if (r.method == "cv")
    return tune_lambda_cv(d, m, w, grid, r.folds, stream_seed(run_seed, "cv"));
  return tune_lambda_discrepancy(d, m, w, grid, r.multiplier);
}

RouteQuery pick_pair(const Graph& g, std::uint64_t run_seed, int min_routes) {
  std::mt19937_64 eng = make_stream(run_seed, "pairs");
  std::uniform_int_distribution<NodeId> pick(0, g.node_count() - 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    NodeId s = pick(eng);
    NodeId t = pick(eng);
    if (s == t) continue;
    if (has_at_least_k_simple_paths(g, s, t, static_cast<std::size_t>(min_routes)))
      return RouteQuery{s, t};
  }
  throw std::runtime_error("no source-target pair with enough distinct routes");
}

Eigen::VectorXd estimator_mu_hat(const std::string& label, const EdgeData& d,
                                 const SimilarityModel& m, const WeightSpec& w, double lambda) {
  if (label == "ours") return calibrate_with_weights(d, m, w, lambda).mu_hat;
  if (label == "sim") return baseline_sim(d);
  if (label == "real") return baseline_real(d);
  return baseline_const(d, w);
}

void run_job(const ExperimentConfig& cfg, const Prepared& prep, const std::vector<double>& vals,
             int seed_index, std::vector<RawRow>& out) {
  PointParams p = apply_point(cfg, vals);
  const std::uint64_t run_seed = indexed_seed(cfg.root_seed, static_cast<std::uint64_t>(seed_index));
  p.spec.seed = run_seed;

  const Instance inst = prep.bundle ? *prep.bundle : make_instance(prep.g, prep.m, p.spec);
  const Graph& g = prep.g;

  WeightOptions opt;
  opt.real_noise_var = inst.truth.sigma2;
  if (p.spec.synth_noise_sd > 0.0)
    opt.synth_noise_var = Eigen::VectorXd::Constant(
        g.edge_count(), p.spec.synth_noise_sd * p.spec.synth_noise_sd);

  RawRow base_row;
  base_row.axis_vals = vals;
  base_row.seed = seed_index;

  if (cfg.scenario == "estimate") {
    WeightSpec w = fidelity_weights(inst.data, opt);
    const double lam = resolve_lambda(cfg, p, inst.data, prep.m, w, run_seed);
    const double denom = static_cast<double>(g.edge_count());
    for (const std::string& label : cfg.estimators) {
      Eigen::VectorXd mu_hat = estimator_mu_hat(label, inst.data, prep.m, w, lam);
      RawRow row = base_row;
      row.label = label;
      row.metrics = {std::sqrt((mu_hat - inst.truth.mu).squaredNorm() / denom)};
      out.push_back(std::move(row));
    }
    return;
  }

  RouteQuery q = pick_pair(g, run_seed, resolved_min_routes(cfg));
  base_row.source = q.source;
  base_row.target = q.target;
  Path p_star = shortest_path(g, inst.truth.mu, q.source, q.target);
  const double c_star = p_star.cost(inst.truth.mu);

  if (cfg.scenario == "paths") {
    WeightSpec w = fidelity_weights(inst.data, opt);
    const double lam = resolve_lambda(cfg, p, inst.data, prep.m, w, run_seed);
    for (const std::string& label : cfg.estimators) {
      Eigen::VectorXd mu_hat = estimator_mu_hat(label, inst.data, prep.m, w, lam);
      Path p_hat = shortest_path(g, mu_hat, q.source, q.target);
      RawRow row = base_row;
      row.label = label;
      row.metrics = {p_hat.cost(inst.truth.mu) - c_star};
      out.push_back(std::move(row));
    }
    return;
  }

  // active: paired A-ESP / random runs sharing the oracle stream
  ActiveConfig acfg = cfg.active;
  acfg.delta = p.delta;
  acfg.epsilon = p.epsilon;
  acfg.lambda = p.lambda_override ? *p.lambda_override : cfg.lambda_rule.fixed;
  if (cfg.active_auto_cap) acfg.seminorm_cap = p.spec.bias_seminorm;
  const Eigen::VectorXd sd = inst.truth.sigma2.cwiseSqrt();
  const std::uint64_t oracle_seed = stream_seed(run_seed, "oracle");
  const std::uint64_t selector_seed = stream_seed(run_seed, "selector");

  GaussianOracle oracle_a(inst.truth.mu, sd, oracle_seed);
  ActiveReport aesp = run_aesp(g, prep.m, inst.truth.mu_sim, inst.truth.sigma2, q.source,
                               q.target, acfg, oracle_a);
  GaussianOracle oracle_r(inst.truth.mu, sd, oracle_seed);
  ActiveReport rnd = run_random_baseline(g, prep.m, inst.truth.mu_sim, inst.truth.sigma2,
                                         q.source, q.target, acfg, oracle_r, selector_seed);

  for (const auto* rep : {&aesp, &rnd}) {
    RawRow row = base_row;
    row.label = rep == &aesp ? "aesp" : "random";
    row.metrics = {static_cast<double>(rep->rounds), rep->certified ? 1.0 : 0.0,
                   static_cast<double>(rep->total_queries),
                   rep->path.cost(inst.truth.mu) - c_star};
    out.push_back(std::move(row));
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> labels_for(const ExperimentConfig& cfg) {
  if (cfg.scenario == "active") return {"aesp", "random"};
  return cfg.estimators;
}

std::vector<std::string> metric_names(const ExperimentConfig& cfg) {
  if (cfg.scenario == "estimate") return {"rmse"};
  if (cfg.scenario == "paths") return {"gap"};
  return {"rounds", "certified", "queries", "subopt"};
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, "config",
             {"scenario", "graph", "kernel", "estimators", "lambda", "base", "axes", "seeds",
              "root_seed", "out_dir", "active", "min_routes"});

  ExperimentConfig cfg;
  if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario'");
  cfg.scenario = j.at("scenario").get<std::string>();
  if (!kScenarios.count(cfg.scenario))
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");

  if (j.contains("graph")) {
    const json& g = j.at("graph");
    check_keys(g, "graph", {"kind", "rows", "cols", "path"});
    std::string kind = g.value("kind", "ladder");
    if (kind == "ladder")
      cfg.graph.kind = GraphSource::Kind::ladder;
    else if (kind == "grid")
      cfg.graph.kind = GraphSource::Kind::grid;
    else if (kind == "bundle")
      cfg.graph.kind = GraphSource::Kind::bundle;
    else
      throw ConfigError("unknown graph kind '" + kind + "'");
    cfg.graph.rows = g.value("rows", 2);
    cfg.graph.cols = g.value("cols", 10);
    cfg.graph.path = g.value("path", std::string());
    if (cfg.graph.kind == GraphSource::Kind::bundle && cfg.graph.path.empty())
      throw ConfigError("bundle graph requires 'path'");
    if (cfg.graph.kind != GraphSource::Kind::bundle &&
        (cfg.graph.rows < 1 || cfg.graph.cols < 1 || cfg.graph.rows * cfg.graph.cols < 2))
      throw ConfigError("graph dimensions too small");
  }

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    check_keys(k, "kernel", {"name", "alpha", "t", "cutoff"});
    cfg.kernel.name = k.value("name", "one_hop");
    if (!kKernels.count(cfg.kernel.name))
      throw ConfigError("unknown kernel '" + cfg.kernel.name + "'");
    cfg.kernel.alpha = k.value("alpha", 0.5);
    cfg.kernel.t = k.value("t", 0.5);
    cfg.kernel.cutoff = k.value("cutoff", 1e-6);
    if (cfg.kernel.alpha < 0.0) throw ConfigError("kernel alpha must be nonnegative");
    if (cfg.kernel.t <= 0.0) throw ConfigError("kernel t must be positive");
    if (cfg.kernel.cutoff < 0.0) throw ConfigError("kernel cutoff must be nonnegative");
  }

  if (j.contains("estimators")) {
    cfg.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (cfg.estimators.empty()) throw ConfigError("estimators list is empty");
    std::set<std::string> seen;
    for (const std::string& e : cfg.estimators) {
      if (!kEstimators.count(e)) throw ConfigError("unknown estimator '" + e + "'");
      if (!seen.insert(e).second) throw ConfigError("duplicate estimator '" + e + "'");
    }
  }

  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    check_keys(l, "lambda", {"method", "value", "folds", "multiplier"});
    cfg.lambda_rule.method = l.value("method", "fixed");
    if (!kLambdaMethods.count(cfg.lambda_rule.method))
      throw ConfigError("unknown lambda method '" + cfg.lambda_rule.method + "'");
    cfg.lambda_rule.fixed = l.value("value", 1.0);
    cfg.lambda_rule.folds = l.value("folds", 5);
    cfg.lambda_rule.multiplier = l.value("multiplier", 1.0);
    if (cfg.lambda_rule.fixed < 0.0) throw ConfigError("lambda value must be nonnegative");
    if (cfg.lambda_rule.folds < 2) throw ConfigError("cv folds must be at least 2");
    if (cfg.lambda_rule.multiplier <= 0.0)
      throw ConfigError("discrepancy multiplier must be positive");
  }

  if (j.contains("base")) {
    const json& b = j.at("base");
    check_keys(b, "base",
               {"mu_mean", "mu_sd", "real_noise_sd", "real_samples_per_edge",
                "unobservable_fraction", "bias_smoothness", "bias_seminorm",
                "synth_samples_per_edge", "synth_noise_sd"});
    cfg.base.mu_mean = b.value("mu_mean", 50.0);
    cfg.base.mu_sd = b.value("mu_sd", 10.0);
    cfg.base.real_noise_sd = b.value("real_noise_sd", 30.0);
    cfg.base.real_samples_per_edge = b.value("real_samples_per_edge", 20);
    cfg.base.unobservable_fraction = b.value("unobservable_fraction", 0.25);
    cfg.base.bias_smoothness = b.value("bias_smoothness", 1.0);
    cfg.base.bias_seminorm = b.value("bias_seminorm", 1.0);
    cfg.base.synth_samples_per_edge = b.value("synth_samples_per_edge", 0);
    cfg.base.synth_noise_sd = b.value("synth_noise_sd", 0.0);
    if (cfg.base.mu_sd < 0.0 || cfg.base.real_noise_sd < 0.0 || cfg.base.synth_noise_sd < 0.0)
      throw ConfigError("standard deviations must be nonnegative");
    if (cfg.base.unobservable_fraction < 0.0 || cfg.base.unobservable_fraction > 1.0)
      throw ConfigError("unobservable_fraction must lie in [0, 1]");
    if (cfg.base.bias_smoothness <= 0.0) throw ConfigError("bias_smoothness must be positive");
    if (cfg.base.bias_seminorm < 0.0) throw ConfigError("bias_seminorm must be nonnegative");
    if (cfg.base.real_samples_per_edge < 0 || cfg.base.synth_samples_per_edge < 0)
      throw ConfigError("sample counts must be nonnegative");
  }

  if (j.contains("axes")) {
    for (const json& a : j.at("axes")) {
      check_keys(a, "axis", {"name", "values"});
      SweepAxis ax;
      ax.name = a.at("name").get<std::string>();
      ax.values = a.at("values").get<std::vector<double>>();
      const bool generative = contains(kGenerativeAxes, ax.name);
      const bool active_only = contains(kActiveAxes, ax.name);
      if (!generative && !active_only && ax.name != "lambda")
        throw ConfigError("unknown sweep axis '" + ax.name + "'");
      if (generative && cfg.graph.kind == GraphSource::Kind::bundle)
        throw ConfigError("axis '" + ax.name + "' regenerates the instance; not available for bundle graphs");
      if (active_only && cfg.scenario != "active")
        throw ConfigError("axis '" + ax.name + "' applies to the active scenario only");
      validate_axis_values(ax.name, ax.values);
      for (const SweepAxis& prev : cfg.axes)
        if (prev.name == ax.name) throw ConfigError("duplicate sweep axis '" + ax.name + "'");
      cfg.axes.push_back(std::move(ax));
    }
  }

  cfg.seeds = j.value("seeds", 5);
  if (cfg.seeds < 1) throw ConfigError("seeds must be at least 1");
  cfg.root_seed = j.value("root_seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", std::string("out"));

  if (j.contains("active")) {
    const json& a = j.at("active");
    check_keys(a, "active",
               {"delta", "epsilon", "kappa_plus", "kappa_minus", "max_rounds", "bias_constant",
                "seminorm_cap"});
    cfg.active.delta = a.value("delta", 0.1);
    cfg.active.epsilon = a.value("epsilon", 0.0);
    cfg.active.kappa_plus = a.value("kappa_plus", 1.0);
    cfg.active.kappa_minus = a.value("kappa_minus", 1.0);
    cfg.active.max_rounds = a.value("max_rounds", 0L);
    cfg.active.bias_constant = bias_constant_from_string(a.value("bias_constant", "per_form"));
    const double cap = a.value("seminorm_cap", -1.0);
    cfg.active_auto_cap = cap < 0.0;
    if (!cfg.active_auto_cap) cfg.active.seminorm_cap = cap;
    if (cfg.active.delta <= 0.0 || cfg.active.delta >= 1.0)
      throw ConfigError("active delta must lie in (0, 1)");
    if (cfg.active.epsilon < 0.0) throw ConfigError("active epsilon must be nonnegative");
    if (cfg.active.kappa_plus <= 0.0 || cfg.active.kappa_minus <= 0.0)
      throw ConfigError("kappa constants must be positive");
    if (cfg.active.max_rounds < 0) throw ConfigError("max_rounds must be nonnegative");
  }

  cfg.min_routes = j.value("min_routes", 0);
  if (cfg.min_routes < 0) throw ConfigError("min_routes must be nonnegative");

  if (cfg.scenario == "active") {
    bool lambda_axis = false;
    for (const SweepAxis& ax : cfg.axes)
      if (ax.name == "lambda") lambda_axis = true;
    if (cfg.lambda_rule.method != "fixed" && !lambda_axis)
      throw ConfigError("the active scenario requires a fixed lambda");
  }
  for (const SweepAxis& ax : cfg.axes)
    if (ax.name == "lambda" && cfg.lambda_rule.method != "fixed")
      throw ConfigError("a lambda axis conflicts with lambda method '" +
                        cfg.lambda_rule.method + "'");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["scenario"] = cfg.scenario;
  j["graph"] = {{"kind", cfg.graph.kind == GraphSource::Kind::ladder  ? "ladder"
                         : cfg.graph.kind == GraphSource::Kind::grid ? "grid"
                                                                     : "bundle"},
                {"rows", cfg.graph.rows},
                {"cols", cfg.graph.cols},
                {"path", cfg.graph.path}};
  j["kernel"] = {{"name", cfg.kernel.name},
                 {"alpha", cfg.kernel.alpha},
                 {"t", cfg.kernel.t},
                 {"cutoff", cfg.kernel.cutoff}};
  j["estimators"] = cfg.estimators;
  j["lambda"] = {{"method", cfg.lambda_rule.method},
                 {"value", cfg.lambda_rule.fixed},
                 {"folds", cfg.lambda_rule.folds},
                 {"multiplier", cfg.lambda_rule.multiplier}};
  j["base"] = {{"mu_mean", cfg.base.mu_mean},
               {"mu_sd", cfg.base.mu_sd},
               {"real_noise_sd", cfg.base.real_noise_sd},
               {"real_samples_per_edge", cfg.base.real_samples_per_edge},
               {"unobservable_fraction", cfg.base.unobservable_fraction},
               {"bias_smoothness", cfg.base.bias_smoothness},
               {"bias_seminorm", cfg.base.bias_seminorm},
               {"synth_samples_per_edge", cfg.base.synth_samples_per_edge},
               {"synth_noise_sd", cfg.base.synth_noise_sd}};
  json axes = json::array();
  for (const SweepAxis& ax : cfg.axes) axes.push_back({{"name", ax.name}, {"values", ax.values}});
  j["axes"] = std::move(axes);
  j["seeds"] = cfg.seeds;
  j["root_seed"] = cfg.root_seed;
  j["out_dir"] = cfg.out_dir;
  j["active"] = {{"delta", cfg.active.delta},
                 {"epsilon", cfg.active.epsilon},
                 {"kappa_plus", cfg.active.kappa_plus},
                 {"kappa_minus", cfg.active.kappa_minus},
                 {"max_rounds", cfg.active.max_rounds},
                 {"bias_constant", bias_constant_name(cfg.active.bias_constant)},
                 {"seminorm_cap", cfg.active_auto_cap ? -1.0 : cfg.active.seminorm_cap}};
  j["min_routes"] = resolved_min_routes(cfg);
  return j;
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_to_json(cfg).dump())));
  return buf;
}

ExperimentOutputs run_experiment(const ExperimentConfig& cfg, int jobs) {
  const Prepared prep = prepare(cfg);
  const std::vector<std::vector<double>> points = cartesian(cfg.axes);
  const std::size_t slot_count = points.size() * static_cast<std::size_t>(cfg.seeds);
  std::vector<std::vector<RawRow>> slots(slot_count);

  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= slot_count) break;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) break;
      }
      try {
        const std::size_t pt = i / static_cast<std::size_t>(cfg.seeds);
        const int seed = static_cast<int>(i % static_cast<std::size_t>(cfg.seeds));
        run_job(cfg, prep, points[pt], seed, slots[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };

  int n_threads = std::max(1, jobs);
  n_threads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(n_threads), slot_count));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  const std::vector<std::string> metrics = metric_names(cfg);
  const std::vector<std::string> labels = labels_for(cfg);
  const bool has_pair = cfg.scenario != "estimate";

  std::ostringstream raw;
  for (const SweepAxis& ax : cfg.axes) raw << ax.name << ',';
  raw << "seed,";
  if (has_pair) raw << "source,target,";
  raw << (cfg.scenario == "active" ? "method" : "estimator");
  for (const std::string& m : metrics) raw << ',' << m;
  raw << '\n';
  std::size_t row_count = 0;
  for (const std::vector<RawRow>& slot : slots)
    for (const RawRow& r : slot) {
      for (double v : r.axis_vals) raw << fmt_double(v) << ',';
      raw << r.seed << ',';
      if (has_pair) raw << r.source << ',' << r.target << ',';
      raw << r.label;
      for (std::size_t k = 0; k < r.metrics.size(); ++k) {
        if (cfg.scenario == "active" && k != 3)
          raw << ',' << static_cast<long>(r.metrics[k]);
        else
          raw << ',' << fmt_double(r.metrics[k]);
      }
      raw << '\n';
      ++row_count;
    }

  std::ostringstream agg;
  for (const SweepAxis& ax : cfg.axes) agg << ax.name << ',';
  agg << (cfg.scenario == "active" ? "method" : "estimator") << ",n";
  if (cfg.scenario == "active") {
    agg << ",mean_rounds,sd_rounds,median_rounds,certified_rate,mean_queries,mean_subopt";
  } else {
    const std::string& m = metrics[0];
    agg << ",mean_" << m << ",sd_" << m << ",median_" << m;
  }
  agg << '\n';

  for (std::size_t pt = 0; pt < points.size(); ++pt) {
    for (const std::string& label : labels) {
      std::vector<std::vector<double>> series(metrics.size());
      for (int seed = 0; seed < cfg.seeds; ++seed) {
        const std::vector<RawRow>& slot = slots[pt * static_cast<std::size_t>(cfg.seeds) +
                                                static_cast<std::size_t>(seed)];
        for (const RawRow& r : slot)
          if (r.label == label)
            for (std::size_t k = 0; k < metrics.size(); ++k) series[k].push_back(r.metrics[k]);
      }
      if (series[0].empty()) continue;
      for (double v : points[pt]) agg << fmt_double(v) << ',';
      agg << label << ',' << series[0].size();
      if (cfg.scenario == "active") {
        agg << ',' << fmt_double(mean_of(series[0])) << ',' << fmt_double(sd_of(series[0])) << ','
            << fmt_double(median_of(series[0])) << ',' << fmt_double(mean_of(series[1])) << ','
            << fmt_double(mean_of(series[2])) << ',' << fmt_double(mean_of(series[3]));
      } else {
        agg << ',' << fmt_double(mean_of(series[0])) << ',' << fmt_double(sd_of(series[0])) << ','
            << fmt_double(median_of(series[0]));
      }
      agg << '\n';
    }
  }

  json manifest;
  manifest["scenario"] = cfg.scenario;
  manifest["config"] = config_to_json(cfg);
  manifest["config_hash"] = config_hash_hex(cfg);
  manifest["outputs"] = {{"raw", "raw.csv"}, {"aggregate", "aggregate.csv"}};
  manifest["row_count"] = row_count;

  ExperimentOutputs out;
  out.raw_csv = raw.str();
  out.aggregate_csv = agg.str();
  out.manifest_json = manifest.dump(2) + "\n";
  return out;
}

void write_experiment(const ExperimentConfig& cfg, const ExperimentOutputs& out) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream f(fs::path(cfg.out_dir) / name);
    if (!f) throw std::runtime_error(std::string("cannot write ") + name);
    f << content;
  };
  write("raw.csv", out.raw_csv);
  write("aggregate.csv", out.aggregate_csv);
  write("manifest.json", out.manifest_json);
}

std::string dry_run_plan(const ExperimentConfig& cfg) {
  const Prepared prep = prepare(cfg);
  const std::size_t n_points = cartesian(cfg.axes).size();
  std::ostringstream os;
  os << "scenario: " << cfg.scenario << '\n';
  os << "graph: ";
  switch (cfg.graph.kind) {
    case GraphSource::Kind::ladder: os << "ladder cols=" << cfg.graph.cols; break;
    case GraphSource::Kind::grid:
      os << "grid rows=" << cfg.graph.rows << " cols=" << cfg.graph.cols;
      break;
    case GraphSource::Kind::bundle: os << "bundle " << cfg.graph.path; break;
  }
  os << " (nodes=" << prep.g.node_count() << ", edges=" << prep.g.edge_count() << ")\n";
  if (cfg.graph.kind == GraphSource::Kind::bundle)
    os << "kernel: from bundle\n";
  else
    os << "kernel: " << cfg.kernel.name << '\n';
  os << "lambda: " << cfg.lambda_rule.method;
  if (cfg.lambda_rule.method == "fixed") os << " " << fmt_double(cfg.lambda_rule.fixed);
  os << '\n';
  if (cfg.scenario != "active") {
    os << "estimators:";
    for (const std::string& e : cfg.estimators) os << ' ' << e;
    os << '\n';
  }
  for (const SweepAxis& ax : cfg.axes) {
    os << "axis " << ax.name << ':';
    for (double v : ax.values) os << ' ' << fmt_double(v);
    os << '\n';
  }
  os << "points: " << n_points << ", seeds: " << cfg.seeds << ", jobs: "
     << n_points * static_cast<std::size_t>(cfg.seeds) << '\n';
  os << "out: " << cfg.out_dir << "/{raw.csv, aggregate.csv, manifest.json}\n";
  os << "config_hash: " << config_hash_hex(cfg) << '\n';
  return os.str();
}

}  // namespace laproute
