#include "laproute/bounds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace laproute {

namespace {

constexpr double kJitter = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd jittered(const Eigen::VectorXd& w) {
  if (!w.allFinite() || w.minCoeff() < 0.0)
    throw std::invalid_argument("weights must be finite and nonnegative");
  return w.cwiseMax(kJitter);
}

void check_config(const BoundConfig& c) {
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda))
    throw std::invalid_argument("lambda must be finite and nonnegative");
  if (c.seminorm_cap < 0.0) throw std::invalid_argument("seminorm cap must be nonnegative");
  if (!(c.kappa_plus > 0.0)) throw std::invalid_argument("kappa_plus must be positive");
}

double bias_coefficient(const BoundConfig& c, bool anytime) {
  switch (c.bias_constant) {
    case BoundConfig::BiasConstant::static_form:
      return std::sqrt(c.lambda) / 2.0;
    case BoundConfig::BiasConstant::anytime_form:
      return std::sqrt(c.lambda / 2.0);
    case BoundConfig::BiasConstant::per_form:
    default:
      return anytime ? std::sqrt(c.lambda / 2.0) : std::sqrt(c.lambda) / 2.0;
  }
}

RadiusTable radii_common(const SimilarityModel& m, const Eigen::VectorXd& w, const BoundConfig& c,
                         double bias_c, double log_term, bool finite_fallback) {
  int n = m.size();
  if (w.size() != n) throw std::invalid_argument("edge dimension mismatch");

  RadiusTable t;
  t.leverage = leverage_profile(m, w, c.lambda);
  t.infinite.assign(n, false);
  t.radius = Eigen::VectorXd::Zero(n);

  double w_min = kInf;
  t.leverage_max = 0.0;
  for (int e = 0; e < n; ++e) {
    if (w(e) > 0.0) {
      w_min = std::min(w_min, w(e));
      t.leverage_max = std::max(t.leverage_max, t.leverage(e));
    }
  }
  bool any_observed = w_min < kInf;

  double dev = std::sqrt(c.kappa_plus) * std::sqrt(2.0 * log_term);
  double fallback = kInf;
  if (finite_fallback && any_observed)
    fallback = 10.0 * (bias_c * c.seminorm_cap / std::sqrt(w_min) + t.leverage_max * dev);

  t.radius_max_finite = 0.0;
  for (int e = 0; e < n; ++e) {
    if (w(e) > 0.0) {
      t.radius(e) = bias_c * c.seminorm_cap / std::sqrt(w(e)) + t.leverage(e) * dev;
    } else {
      t.infinite[e] = true;
      t.radius(e) = finite_fallback ? fallback : kInf;
    }
    if (std::isfinite(t.radius(e)))
      t.radius_max_finite = std::max(t.radius_max_finite, t.radius(e));
  }
  return t;
}

}  // namespace

Eigen::MatrixXd smoother_matrix(const SimilarityModel& m, const Eigen::VectorXd& w,
                                double lambda) {
  if (w.size() != m.size()) throw std::invalid_argument("edge dimension mismatch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and nonnegative");
  int n = m.size();
  if (lambda == 0.0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d = jittered(w).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd h = d.asDiagonal() * m.laplacian * d.asDiagonal();
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::MatrixXd a = lambda * h;
  a.diagonal().array() += 1.0;
  return a.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
}

Eigen::VectorXd leverage_profile(const SimilarityModel& m, const Eigen::VectorXd& w,
                                 double lambda) {
  Eigen::MatrixXd s = smoother_matrix(m, w, lambda);
  Eigen::VectorXd d = jittered(w).cwiseSqrt().cwiseInverse();
  Eigen::VectorXd alpha(m.size());
  for (int e = 0; e < m.size(); ++e) alpha(e) = d(e) * s.col(e).norm();
  return alpha;
}

double effective_dimension(const SimilarityModel& m, const Eigen::VectorXd& w, double lambda) {
  if (w.size() != m.size()) throw std::invalid_argument("edge dimension mismatch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and nonnegative");
  if (lambda == 0.0) return static_cast<double>(m.size());
  Eigen::VectorXd d = jittered(w).cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd h = d.asDiagonal() * m.laplacian * d.asDiagonal();
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  double total = 0.0;
  for (int k = 0; k < m.size(); ++k) {
    double eta = std::max(es.eigenvalues()(k), 0.0);
    double s = 1.0 + lambda * eta;
    total += 1.0 / (s * s);
  }
  return total;
}

RadiusTable static_radii(const SimilarityModel& m, const Eigen::VectorXd& w,
                         const BoundConfig& c) {
  check_config(c);
  double log_term = std::log(2.0 * m.size() / c.delta);
  return radii_common(m, w, c, bias_coefficient(c, false), log_term, false);
}

RadiusTable anytime_radii(const SimilarityModel& m, const Eigen::VectorXd& w, const BoundConfig& c,
                          long round) {
  check_config(c);
  if (round < 1) throw std::invalid_argument("round counter starts at one");
  double t = static_cast<double>(round);
  double pi2 = std::numbers::pi * std::numbers::pi;
  double log_term = std::log(2.0 * m.size() * pi2 * t * t / (3.0 * c.delta));
  return radii_common(m, w, c, bias_coefficient(c, true), log_term, true);
}

std::pair<double, double> path_bounds(const Path& p, const Eigen::VectorXd& mu_hat,
                                      const RadiusTable& r) {
  if (mu_hat.size() != r.radius.size()) throw std::invalid_argument("edge dimension mismatch");
  double mid = 0.0, spread = 0.0;
  for (EdgeId e : p.edges) {
    if (e < 0 || e >= mu_hat.size()) throw std::invalid_argument("path edge out of range");
    if (!std::isfinite(r.radius(e)))
      throw std::invalid_argument("path bounds need finite radii on every path edge");
    mid += mu_hat(e);
    spread += r.radius(e);
  }
  return {mid - spread, mid + spread};
}

CertificateBound suboptimality_certificate(const Path& p_hat, const Path& p_star,
                                           const RadiusTable& r, int l_max) {
  if (l_max < std::max(p_hat.length(), p_star.length()))
    throw std::invalid_argument("l_max below the certified paths' lengths");
  double total = 0.0;
  for (EdgeId e : p_star.edges) total += r.radius(e);
  for (EdgeId e : p_hat.edges) total += r.radius(e);
  CertificateBound b;
  b.pathwise = total;
  b.uniform = 2.0 * r.radius_max_finite * static_cast<double>(l_max);
  return b;
}

}  // namespace laproute
