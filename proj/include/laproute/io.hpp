#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "laproute/active.hpp"
#include "laproute/bounds.hpp"
#include "laproute/datagen.hpp"
#include "laproute/estimator.hpp"
#include "laproute/graph.hpp"
#include "laproute/similarity.hpp"

namespace laproute {

// shortest round-tripping decimal form (%.17g trimmed); used everywhere a
// float is written so outputs are byte-deterministic
std::string fmt_double(double v);

// plain edge list, one "u v" pair per line, '#' comments; node count is the
// largest endpoint + 1
Graph load_edge_list(const std::string& path);

void save_graph_json(const std::string& path, const Graph& g);
Graph load_graph_json(const std::string& path);

// dense matrix, one row per line
void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// edge_id,c_sim,bias,mu_hat,w
void save_calibration_csv(const std::string& path, const Eigen::VectorXd& c_sim,
                          const CalibrationResult& r, const Eigen::VectorXd& w);

// lambda,score with the chosen value marked
void save_tuner_csv(const std::string& path, const TunerTrace& t);

// edge_id,w,alpha,beta,infinite
void save_radius_csv(const std::string& path, const Eigen::VectorXd& w, const RadiusTable& r);

void save_active_report_json(const std::string& path, const ActiveReport& rep);

// Instance bundle: graph.json, similarity.csv, truth.csv, samples.csv under
// one directory.
struct InstanceBundle {
  Graph graph;
  SimilarityModel similarity;
  Instance instance;
};

void save_instance_bundle(const std::string& dir, const Graph& g, const SimilarityModel& m,
                          const Instance& inst);
InstanceBundle load_instance_bundle(const std::string& dir);

}  // namespace laproute
