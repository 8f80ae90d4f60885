#include "laproute/estimator.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "laproute/warn.hpp"

namespace laproute {

namespace {

double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and nonnegative");
}

void check_sizes(const Eigen::VectorXd& y, const WeightSpec& w, const SimilarityModel& m) {
  if (y.size() != m.size() || w.w.size() != m.size())
    throw std::invalid_argument("edge dimension mismatch");
  if (!y.allFinite()) throw std::invalid_argument("discrepancy vector must be finite");
  if (!w.w.allFinite() || w.w.minCoeff() < 0.0)
    throw std::invalid_argument("weights must be finite and nonnegative");
}

Eigen::VectorXd grid_sorted(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  Eigen::VectorXd g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check_lambda(grid[i]);
    g(i) = grid[i];
  }
  std::sort(g.begin(), g.end());
  return g;
}

Eigen::VectorXd masked_discrepancies(const EdgeData& d) { return d.discrepancies(); }

}  // namespace

EdgeData::EdgeData(int edge_count) {
  if (edge_count <= 0) throw std::invalid_argument("edge data needs a positive edge count");
  real_.resize(edge_count);
  synth_.resize(edge_count);
  exact_synth_.resize(edge_count);
}

void EdgeData::check(EdgeId e) const {
  if (e < 0 || e >= edge_count()) throw std::invalid_argument("edge id out of range");
}

void EdgeData::add_real(EdgeId e, double value) {
  check(e);
  if (!std::isfinite(value)) throw std::invalid_argument("sample must be finite");
  real_[e].push_back(value);
}

void EdgeData::add_synth(EdgeId e, double value) {
  check(e);
  if (!std::isfinite(value)) throw std::invalid_argument("sample must be finite");
  if (exact_synth_[e]) throw std::invalid_argument("edge already has an exact synthetic mean");
  synth_[e].push_back(value);
}

void EdgeData::set_exact_synth_mean(EdgeId e, double mean) {
  check(e);
  if (!std::isfinite(mean)) throw std::invalid_argument("mean must be finite");
  if (!synth_[e].empty()) throw std::invalid_argument("edge already has synthetic samples");
  exact_synth_[e] = mean;
}

long EdgeData::real_count(EdgeId e) const {
  check(e);
  return static_cast<long>(real_[e].size());
}

long EdgeData::synth_count(EdgeId e) const {
  check(e);
  if (exact_synth_[e]) return 1;
  return static_cast<long>(synth_[e].size());
}

bool EdgeData::synth_exact(EdgeId e) const {
  check(e);
  return exact_synth_[e].has_value();
}

double EdgeData::real_mean(EdgeId e) const {
  check(e);
  return sample_mean(real_[e]);
}

double EdgeData::synth_mean(EdgeId e) const {
  check(e);
  if (exact_synth_[e]) return *exact_synth_[e];
  return sample_mean(synth_[e]);
}

double EdgeData::real_variance(EdgeId e) const {
  check(e);
  return sample_variance(real_[e]);
}

double EdgeData::synth_variance(EdgeId e) const {
  check(e);
  if (exact_synth_[e]) return 0.0;
  return sample_variance(synth_[e]);
}

const std::vector<double>& EdgeData::real_samples(EdgeId e) const {
  check(e);
  return real_[e];
}

const std::vector<double>& EdgeData::synth_samples(EdgeId e) const {
  check(e);
  return synth_[e];
}

Eigen::VectorXd EdgeData::real_means() const {
  Eigen::VectorXd v(edge_count());
  for (int e = 0; e < edge_count(); ++e) v(e) = real_mean(e);
  return v;
}

Eigen::VectorXd EdgeData::synth_means() const {
  Eigen::VectorXd v(edge_count());
  for (int e = 0; e < edge_count(); ++e) v(e) = synth_mean(e);
  return v;
}

Eigen::VectorXd EdgeData::discrepancies() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(edge_count());
  for (int e = 0; e < edge_count(); ++e)
    if (real_count(e) > 0) v(e) = real_mean(e) - synth_mean(e);
  return v;
}

WeightSpec WeightSpec::plain(Eigen::VectorXd w) {
  WeightSpec s;
  s.w = std::move(w);
  return s;
}

WeightSpec fidelity_weights(const EdgeData& d, const WeightOptions& opt) {
  if (opt.w_max <= 0.0 || opt.variance_floor <= 0.0)
    throw std::invalid_argument("weight cap and variance floor must be positive");
  int m = d.edge_count();
  auto proxy_ok = [m](const std::optional<Eigen::VectorXd>& p) {
    return !p || (p->size() == m && p->allFinite() && p->minCoeff() >= 0.0);
  };
  if (!proxy_ok(opt.real_noise_var) || !proxy_ok(opt.synth_noise_var))
    throw std::invalid_argument("noise proxies must be nonnegative per-edge variances");

  WeightSpec spec;
  spec.options = opt;
  spec.w = Eigen::VectorXd::Zero(m);
  for (EdgeId e = 0; e < m; ++e) {
    long n = d.real_count(e);
    if (n == 0) continue;
    double var = 0.0;
    if (n >= 2) {
      var += d.real_variance(e) / static_cast<double>(n);
    } else if (opt.real_noise_var) {
      var += (*opt.real_noise_var)(e) / static_cast<double>(n);
    } else {
      warn("edge with a single real sample and no noise proxy treated as unobserved");
      continue;
    }
    if (d.synth_exact(e)) {
      // exact simulator mean, no synthetic sampling variance
    } else {
      long ns = d.synth_count(e);
      if (ns >= 2) {
        var += d.synth_variance(e) / static_cast<double>(ns);
      } else if (ns >= 1 && opt.synth_noise_var) {
        var += (*opt.synth_noise_var)(e) / static_cast<double>(ns);
      } else {
        warn("edge without a usable synthetic variance treated as unobserved");
        continue;
      }
    }
    var = std::max(var, opt.variance_floor);
    spec.w(e) = std::min(1.0 / var, opt.w_max);
  }
  return spec;
}

Eigen::VectorXd solve_bias(const Eigen::VectorXd& y, const WeightSpec& w,
                           const SimilarityModel& m, double lambda, SolveInfo* info) {
  check_lambda(lambda);
  check_sizes(y, w, m);
  if (info) *info = SolveInfo{};

  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.size());
  if (lambda == 0.0) {
    for (int e = 0; e < m.size(); ++e)
      if (w.w(e) > 0.0) b(e) = y(e);
    return b;
  }

  for (const auto& comp : m.components) {
    int k = static_cast<int>(comp.size());
    Eigen::VectorXd wc(k), yc(k);
    for (int i = 0; i < k; ++i) {
      wc(i) = w.w(comp[i]);
      yc(i) = y(comp[i]);
    }
    if (wc.maxCoeff() <= 0.0) continue;  // uninformed component stays at zero

    Eigen::MatrixXd lc(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) lc(i, j) = m.laplacian(comp[i], comp[j]);
    Eigen::MatrixXd a = lambda * lc;
    a.diagonal() += wc;
    Eigen::VectorXd rhs = wc.cwiseProduct(yc);

    Eigen::VectorXd x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      x = ldlt.solve(rhs);
      ok = x.allFinite();
    }
    double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (ok) {
      double res = (a * x - rhs).cwiseAbs().maxCoeff();
      ok = res <= 1e-6 * scale;
    }
    if (!ok) {
      Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper> cg;
      cg.setMaxIterations(64L * k);
      cg.setTolerance(1e-14);
      cg.compute(a);
      x = cg.solve(rhs);
      if (info) info->direct_failures += 1;
    }
    if (!x.allFinite()) throw std::runtime_error("bias solve produced non-finite values");
    if (info)
      info->residual_inf =
          std::max(info->residual_inf, (a * x - rhs).cwiseAbs().maxCoeff() / scale);
    for (int i = 0; i < k; ++i) b(comp[i]) = x(i);
  }
  return b;
}

double degrees_of_freedom(const WeightSpec& w, const SimilarityModel& m, double lambda) {
  check_lambda(lambda);
  if (w.w.size() != m.size()) throw std::invalid_argument("edge dimension mismatch");
  if (lambda == 0.0) return static_cast<double>((w.w.array() > 0.0).count());

  double tr = 0.0;
  for (const auto& comp : m.components) {
    int k = static_cast<int>(comp.size());
    Eigen::VectorXd wc(k);
    for (int i = 0; i < k; ++i) wc(i) = w.w(comp[i]);
    if (wc.maxCoeff() <= 0.0) continue;
    Eigen::MatrixXd lc(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) lc(i, j) = m.laplacian(comp[i], comp[j]);
    Eigen::MatrixXd a = lambda * lc;
    a.diagonal() += wc;
    Eigen::MatrixXd inv = a.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    for (int i = 0; i < k; ++i) tr += wc(i) * inv(i, i);
  }
  return tr;
}

CalibrationResult calibrate_with_weights(const EdgeData& d, const SimilarityModel& m,
                                         const WeightSpec& w, double lambda) {
  if (d.edge_count() != m.size()) throw std::invalid_argument("edge dimension mismatch");
  for (EdgeId e = 0; e < d.edge_count(); ++e)
    if (d.synth_count(e) < 1)
      throw std::invalid_argument("every edge needs synthetic data before calibration");

  CalibrationResult r;
  Eigen::VectorXd y = masked_discrepancies(d);
  r.bias = solve_bias(y, w, m, lambda);
  r.mu_hat = d.synth_means() + r.bias;
  r.lambda = lambda;
  r.weighted_residual = (w.w.array() * (r.bias - y).array().square()).sum();
  r.degrees_of_freedom = degrees_of_freedom(w, m, lambda);
  return r;
}

CalibrationResult calibrate(const EdgeData& d, const SimilarityModel& m, double lambda,
                            const WeightOptions& opt) {
  return calibrate_with_weights(d, m, fidelity_weights(d, opt), lambda);
}

Eigen::VectorXd baseline_sim(const EdgeData& d) { return d.synth_means(); }

Eigen::VectorXd baseline_real(const EdgeData& d) {
  Eigen::VectorXd v(d.edge_count());
  for (EdgeId e = 0; e < d.edge_count(); ++e)
    v(e) = d.real_count(e) > 0 ? d.real_mean(e) : d.synth_mean(e);
  return v;
}

Eigen::VectorXd baseline_const(const EdgeData& d, const WeightSpec& w) {
  if (w.w.size() != d.edge_count()) throw std::invalid_argument("edge dimension mismatch");
  double total = w.w.sum();
  if (total <= 0.0) throw std::invalid_argument("constant-offset baseline needs a positive weight");
  Eigen::VectorXd y = masked_discrepancies(d);
  double gamma = w.w.dot(y) / total;
  return d.synth_means().array() + gamma;
}

std::vector<double> default_lambda_grid() {
  return {0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 5.0, 10.0, 20.0, 50.0, 100.0};
}

double tune_lambda_sure(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                        const std::vector<double>& grid, TunerTrace* trace) {
  Eigen::VectorXd g = grid_sorted(grid);
  Eigen::VectorXd y = masked_discrepancies(d);
  double best = g(0), best_score = std::numeric_limits<double>::infinity();
  if (trace) *trace = TunerTrace{};
  for (int i = 0; i < g.size(); ++i) {
    Eigen::VectorXd b = solve_bias(y, w, m, g(i));
    double score = (w.w.array() * (b - y).array().square()).sum() +
                   2.0 * degrees_of_freedom(w, m, g(i));
    if (trace) {
      trace->lambdas.push_back(g(i));
      trace->scores.push_back(score);
    }
    if (score < best_score) {
      best_score = score;
      best = g(i);
    }
  }
  if (trace) trace->chosen = best;
  return best;
}

double tune_lambda_cv(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                      const std::vector<double>& grid, int folds, std::uint64_t seed,
                      TunerTrace* trace) {
  Eigen::VectorXd g = grid_sorted(grid);
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least two folds");
  std::vector<int> observed;
  for (EdgeId e = 0; e < d.edge_count(); ++e)
    if (d.real_count(e) > 0) observed.push_back(e);
  if (static_cast<int>(observed.size()) < folds)
    throw std::invalid_argument("fewer observed edges than folds");

  std::mt19937_64 eng(seed);
  std::shuffle(observed.begin(), observed.end(), eng);
  std::vector<std::vector<int>> fold(folds);
  for (std::size_t i = 0; i < observed.size(); ++i) fold[i % folds].push_back(observed[i]);

  Eigen::VectorXd y = masked_discrepancies(d);
  double best = g(0), best_score = std::numeric_limits<double>::infinity();
  if (trace) *trace = TunerTrace{};
  for (int i = 0; i < g.size(); ++i) {
    double total = 0.0;
    for (const auto& held : fold) {
      WeightSpec wcv = w;
      for (int e : held) wcv.w(e) = 0.0;
      Eigen::VectorXd b = solve_bias(y, wcv, m, g(i));
      for (int e : held) total += w.w(e) * (b(e) - y(e)) * (b(e) - y(e));
    }
    double score = total / folds;
    if (trace) {
      trace->lambdas.push_back(g(i));
      trace->scores.push_back(score);
    }
    if (score < best_score) {
      best_score = score;
      best = g(i);
    }
  }
  if (trace) trace->chosen = best;
  return best;
}

double tune_lambda_discrepancy(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                               const std::vector<double>& grid, double multiplier,
                               TunerTrace* trace) {
  Eigen::VectorXd g = grid_sorted(grid);
  if (multiplier <= 0.0) throw std::invalid_argument("discrepancy multiplier must be positive");
  long observed = (w.w.array() > 0.0).count();
  if (observed == 0) throw std::invalid_argument("no positively weighted edges");
  double target = multiplier * static_cast<double>(observed);

  Eigen::VectorXd y = masked_discrepancies(d);
  if (trace) *trace = TunerTrace{};
  std::optional<double> chosen;
  for (int i = 0; i < g.size(); ++i) {
    Eigen::VectorXd b = solve_bias(y, w, m, g(i));
    double disc = (w.w.array() * (b - y).array().square()).sum();
    if (trace) {
      trace->lambdas.push_back(g(i));
      trace->scores.push_back(disc);
    }
    if (!chosen && disc >= target) chosen = g(i);
  }
  if (!chosen) {
    warn("discrepancy target never reached; returning the largest grid lambda");
    chosen = g(g.size() - 1);
  }
  if (trace) trace->chosen = *chosen;
  return *chosen;
}

}  // namespace laproute
