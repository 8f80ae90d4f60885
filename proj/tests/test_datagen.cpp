#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "laproute/datagen.hpp"
#include "laproute/similarity.hpp"

using namespace laproute;

namespace {

double seminorm(const SimilarityModel& m, const Eigen::VectorXd& b) {
  return std::sqrt(std::max(0.0, b.dot(m.laplacian * b)));
}

}  // namespace

TEST_CASE("grid and ladder shapes") {
  Graph g = make_grid_graph(3, 4);
  CHECK(g.node_count() == 12);
  CHECK(g.edge_count() == 3 * 3 + 2 * 4);  // right + down
  CHECK(g.find_edge(0, 1).has_value());
  CHECK(g.find_edge(0, 4).has_value());
  CHECK(!g.find_edge(0, 5).has_value());
  CHECK(!g.find_edge(3, 4).has_value());  // no wraparound

  Graph l = make_ladder_graph(5);
  CHECK(l.node_count() == 10);
  CHECK(l.edge_count() == 4 + 4 + 5);

  CHECK_THROWS_AS(make_grid_graph(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_ladder_graph(0), std::invalid_argument);
  CHECK(make_ladder_graph(1).edge_count() == 1);
}

TEST_CASE("smooth bias field hits the requested seminorm") {
  Graph g = make_ladder_graph(8);
  SimilarityModel m = one_hop_similarity(g);
  for (int seed = 0; seed < 100; ++seed) {
    Eigen::VectorXd b = smooth_bias_field(m, 1.0, 3.0, seed);
    CHECK(std::abs(seminorm(m, b) - 3.0) <= 1e-9);
  }

  // B = 0 gives the zero field
  CHECK(smooth_bias_field(m, 1.0, 0.0, 5).isZero(0.0));

  // reproducible
  Eigen::VectorXd b1 = smooth_bias_field(m, 2.0, 1.0, 77);
  Eigen::VectorXd b2 = smooth_bias_field(m, 2.0, 1.0, 77);
  CHECK(b1 == b2);
  CHECK(smooth_bias_field(m, 2.0, 1.0, 78) != b1);
}

TEST_CASE("smoothness knob low-passes the field") {
  // at equal seminorm, a heavily smoothed field concentrates its energy in
  // low line-graph frequencies: compare Rayleigh quotients b'Lb / b'b
  Graph g = make_ladder_graph(12);
  SimilarityModel m = one_hop_similarity(g);
  double rough_sum = 0.0, smooth_sum = 0.0;
  const int reps = 60;
  for (int seed = 0; seed < reps; ++seed) {
    Eigen::VectorXd rough = smooth_bias_field(m, 0.01, 1.0, seed);
    Eigen::VectorXd smooth = smooth_bias_field(m, 10.0, 1.0, seed);
    rough_sum += 1.0 / rough.squaredNorm();   // seminorm fixed at 1
    smooth_sum += 1.0 / smooth.squaredNorm();
  }
  CHECK(smooth_sum < rough_sum);
}

TEST_CASE("make_instance assembles consistent data") {
  Graph g = make_grid_graph(3, 3);
  SimilarityModel m = one_hop_similarity(g);
  SyntheticSpec spec;
  spec.seed = 11;
  spec.bias_seminorm = 2.0;
  spec.real_samples_per_edge = 6;
  Instance inst = make_instance(g, m, spec);

  const int me = g.edge_count();
  CHECK(inst.truth.mu.size() == me);
  CHECK((inst.truth.mu - inst.truth.bias - inst.truth.mu_sim).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(std::abs(seminorm(m, inst.truth.bias) - 2.0) <= 1e-9);
  CHECK(inst.truth.sigma2 == Eigen::VectorXd::Constant(me, 30.0 * 30.0));

  // default unobservable fraction: lround(0.25 * me) edges carry no samples
  long unobserved = 0;
  for (EdgeId e = 0; e < me; ++e) {
    if (inst.data.real_count(e) == 0)
      ++unobserved;
    else
      CHECK(inst.data.real_count(e) == 6);
    CHECK(inst.data.synth_exact(e));
    CHECK(inst.data.synth_mean(e) == inst.truth.mu_sim[e]);
  }
  CHECK(unobserved == std::lround(0.25 * me));

  // reproducible per seed
  Instance again = make_instance(g, m, spec);
  CHECK(again.truth.mu == inst.truth.mu);
  CHECK(again.truth.bias == inst.truth.bias);
  for (EdgeId e = 0; e < me; ++e)
    CHECK(again.data.real_samples(e) == inst.data.real_samples(e));

  // sample means concentrate near the true means on observed edges
  SyntheticSpec tight = spec;
  tight.real_noise_sd = 0.01;
  Instance t = make_instance(g, m, tight);
  for (EdgeId e = 0; e < me; ++e)
    if (t.data.real_count(e) > 0)
      CHECK(std::abs(t.data.real_mean(e) - t.truth.mu[e]) < 0.05);
}

TEST_CASE("unobservable fraction limits") {
  Graph g = make_ladder_graph(6);
  SimilarityModel m = one_hop_similarity(g);
  SyntheticSpec spec;
  spec.seed = 3;

  spec.unobservable_fraction = 1.0;
  Instance all_hidden = make_instance(g, m, spec);
  for (EdgeId e = 0; e < g.edge_count(); ++e) CHECK(all_hidden.data.real_count(e) == 0);

  spec.unobservable_fraction = 0.0;
  Instance all_seen = make_instance(g, m, spec);
  for (EdgeId e = 0; e < g.edge_count(); ++e) CHECK(all_seen.data.real_count(e) == 20);
}

TEST_CASE("sampled simulator mode") {
  Graph g = make_ladder_graph(4);
  SimilarityModel m = one_hop_similarity(g);
  SyntheticSpec spec;
  spec.seed = 9;
  spec.synth_samples_per_edge = 5;
  spec.synth_noise_sd = 0.5;
  Instance inst = make_instance(g, m, spec);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    CHECK(!inst.data.synth_exact(e));
    CHECK(inst.data.synth_count(e) == 5);
    CHECK(std::abs(inst.data.synth_mean(e) - inst.truth.mu_sim[e]) < 2.0);
  }
}

TEST_CASE("changing one knob leaves unrelated streams untouched") {
  Graph g = make_ladder_graph(6);
  SimilarityModel m = one_hop_similarity(g);
  SyntheticSpec a;
  a.seed = 21;
  SyntheticSpec b = a;
  b.real_noise_sd = 1.0;  // only the sample stream scale changes

  Instance ia = make_instance(g, m, a);
  Instance ib = make_instance(g, m, b);
  CHECK(ia.truth.mu == ib.truth.mu);
  CHECK(ia.truth.bias == ib.truth.bias);
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    CHECK((ia.data.real_count(e) == 0) == (ib.data.real_count(e) == 0));

  // a different bias seminorm rescales the field without redrawing it
  SyntheticSpec c = a;
  c.bias_seminorm = 2.0;
  Instance ic = make_instance(g, m, c);
  CHECK(ia.truth.mu == ic.truth.mu);
  Eigen::VectorXd ratio = ic.truth.bias.cwiseQuotient(ia.truth.bias);
  for (EdgeId e = 0; e < g.edge_count(); ++e) CHECK(ratio[e] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("gaussian oracle") {
  Eigen::VectorXd means(2);
  means << 1.0, 10.0;
  Eigen::VectorXd sds(2);
  sds << 0.5, 0.0;

  GaussianOracle a(means, sds, 4242);
  GaussianOracle b(means, sds, 4242);

  // per-edge streams are independent of interleaving
  double a0 = a.sample(0);
  double a1 = a.sample(1);
  double a0b = a.sample(0);
  CHECK(b.sample(1) == a1);
  CHECK(b.sample(0) == a0);
  CHECK(b.sample(0) == a0b);

  // zero-sd edge returns the mean exactly
  CHECK(a1 == 10.0);

  // long-run mean approaches the target
  GaussianOracle c(means, sds, 7);
  double sum = 0.0;
  for (int i = 0; i < 4000; ++i) sum += c.sample(0);
  CHECK(sum / 4000.0 == doctest::Approx(1.0).epsilon(0.05));
}
