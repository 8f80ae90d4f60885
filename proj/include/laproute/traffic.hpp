#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "laproute/datagen.hpp"
#include "laproute/graph.hpp"

namespace laproute {

// Raw sensor dataset: a [timesteps x sensors] value matrix (NaN = missing)
// and a sensors x sensors adjacency weight matrix.
struct TrafficDataset {
  Eigen::MatrixXd values;
  Eigen::MatrixXd adjacency;

  int sensor_count() const { return static_cast<int>(values.cols()); }
  int timestep_count() const { return static_cast<int>(values.rows()); }
};

// CSV loader; tolerates a header line and a leading index column, maps empty
// or non-numeric cells to NaN, and warns when the sensor count matches
// neither published dataset shape.
TrafficDataset load_traffic_dataset(const std::string& values_csv, const std::string& adjacency_csv);

struct TrafficWindowConfig {
  int rows_per_hour = 12;  // 5-minute frequency
  int sim_start_hour = 6;  // morning window is the simulator
  int sim_end_hour = 9;
  int real_start_hour = 15;  // afternoon window is the real regime
  int real_end_hour = 18;
  int days = 7;
  int real_sample_cap = 20;
  double unobservable_fraction = 0.5;
  double adjacency_threshold = 0.01;
};

// Window statistics for the sensors with complete data in both windows.
struct TrafficWindows {
  std::vector<int> sensors;  // original column indices, ascending
  Eigen::VectorXd mu_real;
  Eigen::VectorXd var_real;
  Eigen::VectorXd mu_sim;
  Eigen::VectorXd var_sim;
};

// Empirical mean/variance of each sensor over the morning and afternoon
// windows of one week (7 days x 36 rows = 252 samples per window at the
// defaults). Sensors with missing values in either window are excluded with a
// warning.
TrafficWindows traffic_windows(const TrafficDataset& ds, int week_start_row,
                               const TrafficWindowConfig& cfg = {});

// Intersection-level graph with one edge per sensor: symmetrize the weights,
// drop entries below the threshold, wire 3-cliques as triangles, let the
// remaining adjacent pairs share one fresh node, and finish free endpoints
// with fresh nodes.
Graph reconstruct_topology(const Eigen::MatrixXd& adj, double threshold = 0.01);

struct TrafficInstance {
  Graph graph;
  Instance instance;
  std::vector<int> sensors;  // sensor column behind each edge id
};

// One calibration instance from real traffic: afternoon stats become the
// ground truth, morning means the synthetic costs, real samples are
// bootstrapped from the afternoon window (capped), and half the edges are
// masked unobservable.
TrafficInstance traffic_instance(const TrafficDataset& ds, int week_start_row, std::uint64_t seed,
                                 const TrafficWindowConfig& cfg = {});

}  // namespace laproute
