#include "laproute/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "laproute/rng.hpp"

namespace laproute {

namespace {

double draw_normal(std::mt19937_64& eng) {
  // fresh distribution per draw: no cached spare, so per-edge streams stay
  // independent of call interleaving
  std::normal_distribution<double> n(0.0, 1.0);
  return n(eng);
}

}  // namespace

Eigen::VectorXd smooth_bias_field(const SimilarityModel& m, double rho, double B,
                                  std::uint64_t seed) {
  if (rho < 0.0) throw std::invalid_argument("smooth_bias_field: rho must be nonnegative");
  if (B < 0.0) throw std::invalid_argument("smooth_bias_field: B must be nonnegative");
  const int n = m.size();
  std::mt19937_64 eng(seed);

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + rho * m.laplacian;
  Eigen::LDLT<Eigen::MatrixXd> solver(A);

  const int max_tries = 32;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = draw_normal(eng);
    if (B == 0.0) return Eigen::VectorXd::Zero(n);
    Eigen::VectorXd b = solver.solve(xi);
    double s = b.dot(m.laplacian * b);
    if (s > 1e-14 * b.squaredNorm()) return b * (B / std::sqrt(s));
    // seminorm vanished (e.g. the draw landed in the Laplacian null space);
    // try a fresh draw
  }
  throw std::runtime_error("smooth_bias_field: could not reach the target seminorm");
}

Instance make_instance(const Graph& g, const SimilarityModel& m, const SyntheticSpec& spec) {
  const int n = g.edge_count();
  if (m.size() != n) throw std::invalid_argument("make_instance: similarity size mismatch");
  if (spec.unobservable_fraction < 0.0 || spec.unobservable_fraction > 1.0)
    throw std::invalid_argument("make_instance: unobservable_fraction out of [0, 1]");
  if (spec.real_samples_per_edge < 0 || spec.synth_samples_per_edge < 0)
    throw std::invalid_argument("make_instance: negative sample count");
  if (spec.mu_sd < 0.0 || spec.real_noise_sd < 0.0 || spec.synth_noise_sd < 0.0)
    throw std::invalid_argument("make_instance: negative standard deviation");

  Instance inst{GroundTruth{}, EdgeData(n)};
  GroundTruth& t = inst.truth;

  std::mt19937_64 mu_eng = make_stream(spec.seed, "mu");
  t.mu.resize(n);
  for (int e = 0; e < n; ++e) t.mu[e] = spec.mu_mean + spec.mu_sd * draw_normal(mu_eng);

  t.bias = smooth_bias_field(m, spec.bias_smoothness, spec.bias_seminorm,
                             stream_seed(spec.seed, "bias"));
  t.mu_sim = t.mu - t.bias;
  t.sigma2 = Eigen::VectorXd::Constant(n, spec.real_noise_sd * spec.real_noise_sd);

  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 mask_eng = make_stream(spec.seed, "mask");
  std::shuffle(ids.begin(), ids.end(), mask_eng);
  const long hidden = std::lround(spec.unobservable_fraction * n);
  std::vector<bool> observable(static_cast<std::size_t>(n), true);
  for (long i = 0; i < hidden; ++i) observable[static_cast<std::size_t>(ids[i])] = false;

  const std::uint64_t sample_root = stream_seed(spec.seed, "samples");
  for (int e = 0; e < n; ++e) {
    std::mt19937_64 eng(indexed_seed(sample_root, static_cast<std::uint64_t>(e)));
    if (observable[static_cast<std::size_t>(e)]) {
      for (int k = 0; k < spec.real_samples_per_edge; ++k)
        inst.data.add_real(e, t.mu[e] + spec.real_noise_sd * draw_normal(eng));
    }
    if (spec.synth_samples_per_edge == 0) {
      inst.data.set_exact_synth_mean(e, t.mu_sim[e]);
    } else {
      for (int k = 0; k < spec.synth_samples_per_edge; ++k)
        inst.data.add_synth(e, t.mu_sim[e] + spec.synth_noise_sd * draw_normal(eng));
    }
  }
  return inst;
}

GaussianOracle::GaussianOracle(Eigen::VectorXd means, Eigen::VectorXd sds, std::uint64_t seed)
    : means_(std::move(means)), sds_(std::move(sds)), seed_(seed) {
  if (means_.size() != sds_.size())
    throw std::invalid_argument("GaussianOracle: size mismatch");
  for (Eigen::Index i = 0; i < sds_.size(); ++i)
    if (sds_[i] < 0.0) throw std::invalid_argument("GaussianOracle: negative sd");
  engines_.resize(static_cast<std::size_t>(means_.size()));
}

double GaussianOracle::sample(EdgeId e) {
  if (e < 0 || e >= means_.size()) throw std::out_of_range("GaussianOracle: edge out of range");
  auto& slot = engines_[static_cast<std::size_t>(e)];
  if (!slot) slot.emplace(indexed_seed(seed_, static_cast<std::uint64_t>(e)));
  return means_[e] + sds_[e] * draw_normal(*slot);
}

Graph make_grid_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("make_grid_graph: empty grid");
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph(rows * cols, edges);
}

Graph make_ladder_graph(int cols) { return make_grid_graph(2, cols); }

}  // namespace laproute
