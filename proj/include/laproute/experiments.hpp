#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "laproute/active.hpp"
#include "laproute/datagen.hpp"

namespace laproute {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphSource {
  enum class Kind { ladder, grid, bundle };
  Kind kind = Kind::ladder;
  int rows = 2;
  int cols = 10;
  std::string path;  // bundle directory
};

struct KernelChoice {
  std::string name = "one_hop";  // one_hop | two_hop | heat
  double alpha = 0.5;
  double t = 0.5;
  double cutoff = 1e-6;
};

struct LambdaRule {
  std::string method = "fixed";  // fixed | sure | cv | discrepancy
  double fixed = 1.0;
  int folds = 5;
  double multiplier = 1.0;
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string scenario;  // estimate | paths | active
  GraphSource graph;
  KernelChoice kernel;
  std::vector<std::string> estimators = {"ours", "sim", "real", "const"};
  LambdaRule lambda_rule;
  SyntheticSpec base;
  std::vector<SweepAxis> axes;
  int seeds = 5;
  std::uint64_t root_seed = 0;
  std::string out_dir = "out";
  ActiveConfig active;
  bool active_auto_cap = true;  // seminorm cap from the generative B
  int min_routes = 0;           // 0 = scenario default (2 for paths, 10 for active)
};

// Parses and validates; throws ConfigError on unknown scenario, kernel,
// estimator, axis, or out-of-range axis values.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Resolved-config echo; the hash is FNV-1a over its canonical dump.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(std::string_view s);
std::string config_hash_hex(const ExperimentConfig& cfg);

struct ExperimentOutputs {
  std::string raw_csv;
  std::string aggregate_csv;
  std::string manifest_json;
};

// Runs the configured sweep: points x seeds jobs, optionally in parallel,
// with a deterministic row order independent of the job count.
ExperimentOutputs run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// raw.csv, aggregate.csv, manifest.json under cfg.out_dir
void write_experiment(const ExperimentConfig& cfg, const ExperimentOutputs& out);

// Human-readable resolved plan for --dry-run; performs no work.
std::string dry_run_plan(const ExperimentConfig& cfg);

}  // namespace laproute
