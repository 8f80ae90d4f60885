// laproute command-line runner: estimation/path/active sweeps, instance
// generation, and traffic ingestion.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "laproute/datagen.hpp"
#include "laproute/experiments.hpp"
#include "laproute/io.hpp"
#include "laproute/similarity.hpp"
#include "laproute/traffic.hpp"

namespace {

using laproute::ConfigError;
namespace fs = std::filesystem;

struct SweepArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool dry_run = false;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--config", a.config, "config JSON file")->required();
  cmd->add_option("--seed", a.seed, "override the root seed");
  cmd->add_option("--out", a.out, "override the output directory");
  cmd->add_option("--jobs", a.jobs, "parallel jobs")->check(CLI::PositiveNumber);
  cmd->add_flag("--dry-run", a.dry_run, "print the resolved plan and exit");
}

nlohmann::json parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

laproute::ExperimentConfig resolve_config(const SweepArgs& a, const std::string& verb) {
  nlohmann::json j = parse_config_file(a.config);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("scenario"))
    j["scenario"] = verb;
  else if (j.at("scenario").get<std::string>() != verb)
    throw ConfigError("config scenario '" + j.at("scenario").get<std::string>() +
                      "' does not match the '" + verb + "' command");
  laproute::ExperimentConfig cfg = laproute::config_from_json(j);
  if (a.seed) cfg.root_seed = *a.seed;
  if (!a.out.empty()) cfg.out_dir = a.out;
  return cfg;
}

int run_sweep(const SweepArgs& a, const std::string& verb) {
  laproute::ExperimentConfig cfg = resolve_config(a, verb);
  if (a.dry_run) {
    std::cout << laproute::dry_run_plan(cfg);
    return 0;
  }
  laproute::ExperimentOutputs out = laproute::run_experiment(cfg, a.jobs);
  laproute::write_experiment(cfg, out);
  std::cout << cfg.out_dir << "/raw.csv\n"
            << cfg.out_dir << "/aggregate.csv\n"
            << cfg.out_dir << "/manifest.json\n";
  return 0;
}

laproute::SimilarityModel build_kernel(const laproute::Graph& g, const std::string& name,
                                       double alpha, double t, double cutoff) {
  if (name == "one_hop") return laproute::one_hop_similarity(g);
  if (name == "two_hop") return laproute::two_hop_similarity(g, alpha);
  if (name == "heat") return laproute::heat_kernel_similarity(g, t, cutoff);
  throw ConfigError("unknown kernel '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biased-simulator edge-cost calibration and certified routing"};
  app.require_subcommand(1);

  SweepArgs est_args, path_args, act_args;
  CLI::App* est = app.add_subcommand("estimate", "RMSE sweep over the configured axes");
  add_sweep_options(est, est_args);
  CLI::App* pth = app.add_subcommand("paths", "path-gap sweep per estimator");
  add_sweep_options(pth, path_args);
  CLI::App* act = app.add_subcommand("active", "paired A-ESP vs random query sweep");
  add_sweep_options(act, act_args);

  SweepArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-instance", "write one synthetic instance bundle");
  gen->add_option("--config", gen_args.config, "config JSON file (graph/kernel/base)")->required();
  gen->add_option("--seed", gen_args.seed, "instance seed");
  gen->add_option("--out", gen_args.out, "bundle directory")->required();
  gen->add_flag("--dry-run", gen_args.dry_run, "print the resolved plan and exit");

  std::string tr_values, tr_adjacency, tr_out, tr_kernel = "one_hop";
  int tr_week_start = 0, tr_cap = 20;
  std::uint64_t tr_seed = 0;
  double tr_unobservable = 0.5, tr_threshold = 0.01, tr_alpha = 0.5, tr_t = 0.5,
         tr_cutoff = 1e-6;
  CLI::App* ing = app.add_subcommand("ingest-traffic",
                                     "build an instance bundle from sensor CSVs");
  ing->add_option("--values", tr_values, "timesteps x sensors value CSV")->required();
  ing->add_option("--adjacency", tr_adjacency, "sensor adjacency CSV")->required();
  ing->add_option("--out", tr_out, "bundle directory")->required();
  ing->add_option("--week-start", tr_week_start, "first row of the selected week");
  ing->add_option("--seed", tr_seed, "mask/bootstrap seed");
  ing->add_option("--kernel", tr_kernel, "similarity kernel (one_hop|two_hop|heat)");
  ing->add_option("--alpha", tr_alpha, "two-hop decay");
  ing->add_option("--t", tr_t, "heat-kernel time");
  ing->add_option("--cutoff", tr_cutoff, "heat-kernel cutoff");
  ing->add_option("--cap", tr_cap, "real samples per edge")->check(CLI::NonNegativeNumber);
  ing->add_option("--unobservable", tr_unobservable, "unobservable edge fraction");
  ing->add_option("--threshold", tr_threshold, "adjacency threshold");

  try {
    app.parse(argc, argv);

    if (*est) return run_sweep(est_args, "estimate");
    if (*pth) return run_sweep(path_args, "paths");
    if (*act) return run_sweep(act_args, "active");

    if (*gen) {
      nlohmann::json j = parse_config_file(gen_args.config);
      if (!j.is_object()) throw ConfigError("config must be a JSON object");
      if (!j.contains("scenario")) j["scenario"] = "estimate";
      laproute::ExperimentConfig cfg = laproute::config_from_json(j);
      if (cfg.graph.kind == laproute::GraphSource::Kind::bundle)
        throw ConfigError("gen-instance needs a generative graph source");
      if (gen_args.seed) cfg.root_seed = *gen_args.seed;
      laproute::Graph g = cfg.graph.kind == laproute::GraphSource::Kind::ladder
                              ? laproute::make_ladder_graph(cfg.graph.cols)
                              : laproute::make_grid_graph(cfg.graph.rows, cfg.graph.cols);
      laproute::SimilarityModel m =
          build_kernel(g, cfg.kernel.name, cfg.kernel.alpha, cfg.kernel.t, cfg.kernel.cutoff);
      if (gen_args.dry_run) {
        std::cout << "gen-instance: nodes=" << g.node_count() << " edges=" << g.edge_count()
                  << " kernel=" << cfg.kernel.name << " seed=" << cfg.root_seed << " out="
                  << gen_args.out << "\n";
        return 0;
      }
      laproute::SyntheticSpec spec = cfg.base;
      spec.seed = cfg.root_seed;
      laproute::Instance inst = laproute::make_instance(g, m, spec);
      laproute::save_instance_bundle(gen_args.out, g, m, inst);
      std::cout << gen_args.out << "\n";
      return 0;
    }

    if (*ing) {
      if (tr_unobservable < 0.0 || tr_unobservable > 1.0)
        throw ConfigError("--unobservable must lie in [0, 1]");
      laproute::TrafficDataset ds = laproute::load_traffic_dataset(tr_values, tr_adjacency);
      laproute::TrafficWindowConfig wc;
      wc.real_sample_cap = tr_cap;
      wc.unobservable_fraction = tr_unobservable;
      wc.adjacency_threshold = tr_threshold;
      laproute::TrafficInstance ti =
          laproute::traffic_instance(ds, tr_week_start, tr_seed, wc);
      laproute::SimilarityModel m =
          build_kernel(ti.graph, tr_kernel, tr_alpha, tr_t, tr_cutoff);
      laproute::save_instance_bundle(tr_out, ti.graph, m, ti.instance);
      {
        std::ofstream sensors(fs::path(tr_out) / "sensors.csv");
        sensors << "edge_id,sensor\n";
        for (std::size_t e = 0; e < ti.sensors.size(); ++e)
          sensors << e << ',' << ti.sensors[e] << '\n';
      }
      std::cout << tr_out << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
