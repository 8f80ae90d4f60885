#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "laproute/estimator.hpp"
#include "laproute/graph.hpp"

namespace laproute {

struct BoundConfig {
  double seminorm_cap = 1.0;  // B, cap on the Laplacian seminorm of the bias
  double delta = 0.05;        // confidence level
  double lambda = 1.0;
  double kappa_plus = 1.0;
  double kappa_minus = 1.0;

  // The static radii carry sqrt(lambda)/2 on the bias term, the anytime radii
  // sqrt(lambda/2); both are kept verbatim. Override to force one constant
  // everywhere (ablation switch).
  enum class BiasConstant { per_form, static_form, anytime_form };
  BiasConstant bias_constant = BiasConstant::per_form;
};

struct RadiusTable {
  Eigen::VectorXd leverage;     // alpha_e
  Eigen::VectorXd radius;      // beta_e
  std::vector<bool> infinite;  // true where w_e = 0
  double leverage_max = 0.0;       // alpha over positively weighted edges
  double radius_max_finite = 0.0;  // beta bar, max over finite radii
};

// S_lambda = (I + lambda H)^{-1} with H = M^{-1/2} L M^{-1/2}; zero weights
// are jittered to 1e-12 inside this computation only.
Eigen::MatrixXd smoother_matrix(const SimilarityModel& m, const Eigen::VectorXd& w, double lambda);

// alpha_e = || S_lambda M^{-1/2} e_e ||_2
Eigen::VectorXd leverage_profile(const SimilarityModel& m, const Eigen::VectorXd& w, double lambda);

// d_eff = tr(S_lambda^2) = sum_k (1 + lambda eta_k)^{-2}
double effective_dimension(const SimilarityModel& m, const Eigen::VectorXd& w, double lambda);

// beta_e = sqrt(lambda)/2 * B / sqrt(w_e)
//        + sqrt(kappa_plus) * alpha_e * sqrt(2 log(2|E| / delta));
// zero-weight edges get an infinite radius and are flagged.
RadiusTable static_radii(const SimilarityModel& m, const Eigen::VectorXd& w, const BoundConfig& c);

// beta_e(t) = sqrt(lambda/2) * B / sqrt(w_e)
//           + sqrt(kappa_plus) * alpha_e * sqrt(2 log(2|E| pi^2 t^2 / (3 delta)));
// zero-weight edges are flagged and receive the conservative finite fallback
// 10x the radius formed from the smallest observed weight and the largest
// observed leverage.
RadiusTable anytime_radii(const SimilarityModel& m, const Eigen::VectorXd& w, const BoundConfig& c,
                          long round);

// (LCB, UCB) = (mu_hat(P) - sum beta_e, mu_hat(P) + sum beta_e); requires
// finite radii on the path
std::pair<double, double> path_bounds(const Path& p, const Eigen::VectorXd& mu_hat,
                                      const RadiusTable& r);

struct CertificateBound {
  double pathwise = 0.0;  // sum of radii over both paths, shared edges twice
  double uniform = 0.0;   // 2 * beta bar * l_max
};

CertificateBound suboptimality_certificate(const Path& p_hat, const Path& p_star,
                                           const RadiusTable& r, int l_max);

}  // namespace laproute
