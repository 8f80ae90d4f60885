#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "laproute/similarity.hpp"

namespace laproute {

// Per-edge real and synthetic cost samples. Synthetic means may be stored
// exactly (simulator queried at convergence) instead of sampled.
class EdgeData {
 public:
  explicit EdgeData(int edge_count);

  int edge_count() const { return static_cast<int>(real_.size()); }
  void add_real(EdgeId e, double value);
  void add_synth(EdgeId e, double value);
  void set_exact_synth_mean(EdgeId e, double mean);

  long real_count(EdgeId e) const;
  long synth_count(EdgeId e) const;
  bool synth_exact(EdgeId e) const;
  double real_mean(EdgeId e) const;   // 0 when unobserved
  double synth_mean(EdgeId e) const;  // 0 when absent
  // Unbiased sample variances; NaN when fewer than two samples. Exact
  // synthetic means report zero variance.
  double real_variance(EdgeId e) const;
  double synth_variance(EdgeId e) const;
  const std::vector<double>& real_samples(EdgeId e) const;
  const std::vector<double>& synth_samples(EdgeId e) const;

  Eigen::VectorXd real_means() const;
  Eigen::VectorXd synth_means() const;
  // y_e = real mean - synthetic mean, 0 on unobserved edges
  Eigen::VectorXd discrepancies() const;

 private:
  void check(EdgeId e) const;
  std::vector<std::vector<double>> real_;
  std::vector<std::vector<double>> synth_;
  std::vector<std::optional<double>> exact_synth_;
};

struct WeightOptions {
  double w_max = 1e6;
  double variance_floor = 1e-8;
  // known per-edge noise variances, used as fallback when a side has fewer
  // than two samples
  std::optional<Eigen::VectorXd> real_noise_var;
  std::optional<Eigen::VectorXd> synth_noise_var;
  double kappa_minus = 1.0;
  double kappa_plus = 1.0;
};

struct WeightSpec {
  Eigen::VectorXd w;
  WeightOptions options;

  int size() const { return static_cast<int>(w.size()); }
  static WeightSpec plain(Eigen::VectorXd w);
};

// w_e = min{1 / VarHat(y_e), w_max} with VarHat = s^2/n + s'^2/n', floored at
// variance_floor; w_e = 0 when the edge has no real samples. A side with one
// sample and no configured noise proxy leaves the edge unobserved for
// weighting (with a warning).
WeightSpec fidelity_weights(const EdgeData& d, const WeightOptions& opt = {});

struct SolveInfo {
  int direct_failures = 0;   // components where the direct solve fell back to CG
  double residual_inf = 0.0; // max |(M + lambda L) b - M y| over components
};

// Minimizer of (b - y)^T M (b - y) + lambda b^T L b, solved per support
// component: fully unobserved components return 0, lambda = 0 returns y on
// observed edges, otherwise the normal equations are solved directly with an
// iterative fallback.
Eigen::VectorXd solve_bias(const Eigen::VectorXd& y, const WeightSpec& w,
                           const SimilarityModel& m, double lambda, SolveInfo* info = nullptr);

struct CalibrationResult {
  Eigen::VectorXd bias;    // b hat
  Eigen::VectorXd mu_hat;  // synthetic means + b hat
  double lambda = 0.0;
  double weighted_residual = 0.0;
  double degrees_of_freedom = 0.0;
};

CalibrationResult calibrate(const EdgeData& d, const SimilarityModel& m, double lambda,
                            const WeightOptions& opt = {});
CalibrationResult calibrate_with_weights(const EdgeData& d, const SimilarityModel& m,
                                         const WeightSpec& w, double lambda);

// mu hat = synthetic means
Eigen::VectorXd baseline_sim(const EdgeData& d);
// mu hat = real mean where observed, synthetic mean elsewhere
Eigen::VectorXd baseline_real(const EdgeData& d);
// mu hat = synthetic means + gamma 1, gamma the weighted mean discrepancy
Eigen::VectorXd baseline_const(const EdgeData& d, const WeightSpec& w);

// {0, 1e-4, 1e-3, 1e-2, 0.1, 1, 5, 10, 20, 50, 100}
std::vector<double> default_lambda_grid();

struct TunerTrace {
  std::vector<double> lambdas;
  std::vector<double> scores;
  double chosen = 0.0;
};

// tr(A_lambda^+ M); exact trace, pseudo-inverse semantics at lambda = 0
double degrees_of_freedom(const WeightSpec& w, const SimilarityModel& m, double lambda);

// SURE(lambda) = (b - y)^T M (b - y) + 2 tr(A_lambda^+ M); ties toward the
// smaller lambda.
double tune_lambda_sure(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                        const std::vector<double>& grid, TunerTrace* trace = nullptr);

// K-fold CV over observed edges; a held-out fold is dropped by zeroing its
// weights and scored with the original weights.
double tune_lambda_cv(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                      const std::vector<double>& grid, int folds, std::uint64_t seed,
                      TunerTrace* trace = nullptr);

// Smallest grid lambda whose weighted in-sample discrepancy reaches
// multiplier * (number of positively weighted edges); the largest grid lambda
// with a warning when never reached.
double tune_lambda_discrepancy(const EdgeData& d, const SimilarityModel& m, const WeightSpec& w,
                               const std::vector<double>& grid, double multiplier = 1.0,
                               TunerTrace* trace = nullptr);

}  // namespace laproute
