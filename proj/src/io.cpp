#include "laproute/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace laproute {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

double parse_double(const std::string& tok, const std::string& where) {
  const char* b = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(b, &end);
  if (end == b || *end != '\0')
    throw std::runtime_error(where + ": bad number '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId max_node = -1;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    NodeId u, v;
    if (!(ls >> u >> v)) continue;
    edges.emplace_back(u, v);
    max_node = std::max({max_node, u, v});
  }
  if (edges.empty()) throw std::runtime_error(path + ": no edges");
  return Graph(max_node + 1, edges);
}

void save_graph_json(const std::string& path, const Graph& g) {
  json j;
  j["node_count"] = g.node_count();
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  j["edges"] = std::move(edges);
  open_out(path) << j.dump(2) << "\n";
}

Graph load_graph_json(const std::string& path) {
  json j = json::parse(open_in(path));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  return Graph(j.at("node_count").get<int>(), edges);
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << fmt_double(m(r, c));
    }
    out << '\n';
  }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> toks = split(line, ',');
    std::vector<double> row;
    row.reserve(toks.size());
    for (const std::string& t : toks) row.push_back(parse_double(t, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ": ragged row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void save_calibration_csv(const std::string& path, const Eigen::VectorXd& c_sim,
                          const CalibrationResult& r, const Eigen::VectorXd& w) {
  std::ofstream out = open_out(path);
  out << "edge_id,c_sim,bias,mu_hat,w\n";
  for (Eigen::Index e = 0; e < r.bias.size(); ++e)
    out << e << ',' << fmt_double(c_sim[e]) << ',' << fmt_double(r.bias[e]) << ','
        << fmt_double(r.mu_hat[e]) << ',' << fmt_double(w[e]) << '\n';
}

void save_tuner_csv(const std::string& path, const TunerTrace& t) {
  std::ofstream out = open_out(path);
  out << "lambda,score,chosen\n";
  for (std::size_t i = 0; i < t.lambdas.size(); ++i)
    out << fmt_double(t.lambdas[i]) << ',' << fmt_double(t.scores[i]) << ','
        << (t.lambdas[i] == t.chosen ? 1 : 0) << '\n';
}

void save_radius_csv(const std::string& path, const Eigen::VectorXd& w, const RadiusTable& r) {
  std::ofstream out = open_out(path);
  out << "edge_id,w,alpha,beta,infinite\n";
  for (Eigen::Index e = 0; e < r.radius.size(); ++e)
    out << e << ',' << fmt_double(w[e]) << ',' << fmt_double(r.leverage[e]) << ','
        << fmt_double(r.radius[e]) << ',' << (r.infinite[static_cast<std::size_t>(e)] ? 1 : 0)
        << '\n';
}

void save_active_report_json(const std::string& path, const ActiveReport& rep) {
  json j;
  j["certified"] = rep.certified;
  j["path"] = rep.path.nodes;
  j["rounds"] = rep.rounds;
  j["total_queries"] = rep.total_queries;
  j["counts"] = rep.counts;
  json trace = json::array();
  for (const GapTraceRow& row : rep.trace) {
    trace.push_back({{"round", row.round},
                     {"gap", row.gap},
                     {"ucb_best", row.ucb_best},
                     {"lcb_challenger", row.lcb_challenger},
                     {"best_cost", row.best_cost},
                     {"queried", row.queried},
                     {"best", row.best},
                     {"challenger", row.challenger}});
  }
  j["trace"] = std::move(trace);
  open_out(path) << j.dump(2) << "\n";
}

void save_instance_bundle(const std::string& dir, const Graph& g, const SimilarityModel& m,
                          const Instance& inst) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_graph_json((fs::path(dir) / "graph.json").string(), g);
  save_matrix_csv((fs::path(dir) / "similarity.csv").string(), m.weights);

  {
    std::ofstream out = open_out((fs::path(dir) / "truth.csv").string());
    out << "edge_id,mu,mu_sim,bias,sigma2\n";
    const GroundTruth& t = inst.truth;
    for (Eigen::Index e = 0; e < t.mu.size(); ++e)
      out << e << ',' << fmt_double(t.mu[e]) << ',' << fmt_double(t.mu_sim[e]) << ','
          << fmt_double(t.bias[e]) << ',' << fmt_double(t.sigma2[e]) << '\n';
  }
  {
    std::ofstream out = open_out((fs::path(dir) / "samples.csv").string());
    out << "edge_id,kind,value\n";
    for (EdgeId e = 0; e < inst.data.edge_count(); ++e) {
      for (double v : inst.data.real_samples(e)) out << e << ",real," << fmt_double(v) << '\n';
      if (inst.data.synth_exact(e))
        out << e << ",synth_exact," << fmt_double(inst.data.synth_mean(e)) << '\n';
      else
        for (double v : inst.data.synth_samples(e)) out << e << ",synth," << fmt_double(v) << '\n';
    }
  }
}

InstanceBundle load_instance_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  Graph g = load_graph_json((fs::path(dir) / "graph.json").string());
  SimilarityModel m =
      similarity_from_weights(load_matrix_csv((fs::path(dir) / "similarity.csv").string()));
  if (m.size() != g.edge_count())
    throw std::runtime_error(dir + ": similarity size does not match the edge count");

  const int n = g.edge_count();
  InstanceBundle b{std::move(g), std::move(m), Instance{GroundTruth{}, EdgeData(n)}};
  GroundTruth& t = b.instance.truth;
  t.mu.resize(n);
  t.mu_sim.resize(n);
  t.bias.resize(n);
  t.sigma2.resize(n);

  {
    std::ifstream in = open_in((fs::path(dir) / "truth.csv").string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> toks = split(line, ',');
      if (toks.size() != 5) throw std::runtime_error(dir + "/truth.csv: bad row");
      int e = static_cast<int>(parse_double(toks[0], "truth.csv"));
      if (e < 0 || e >= n) throw std::runtime_error(dir + "/truth.csv: edge id out of range");
      t.mu[e] = parse_double(toks[1], "truth.csv");
      t.mu_sim[e] = parse_double(toks[2], "truth.csv");
      t.bias[e] = parse_double(toks[3], "truth.csv");
      t.sigma2[e] = parse_double(toks[4], "truth.csv");
      seen[static_cast<std::size_t>(e)] = true;
    }
    for (bool s : seen)
      if (!s) throw std::runtime_error(dir + "/truth.csv: missing edge row");
  }
  {
    std::ifstream in = open_in((fs::path(dir) / "samples.csv").string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> toks = split(line, ',');
      if (toks.size() != 3) throw std::runtime_error(dir + "/samples.csv: bad row");
      int e = static_cast<int>(parse_double(toks[0], "samples.csv"));
      double v = parse_double(toks[2], "samples.csv");
      if (toks[1] == "real")
        b.instance.data.add_real(e, v);
      else if (toks[1] == "synth")
        b.instance.data.add_synth(e, v);
      else if (toks[1] == "synth_exact")
        b.instance.data.set_exact_synth_mean(e, v);
      else
        throw std::runtime_error(dir + "/samples.csv: unknown kind '" + toks[1] + "'");
    }
  }
  return b;
}

}  // namespace laproute
