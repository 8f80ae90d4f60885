#include "laproute/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "laproute/rng.hpp"
#include "laproute/warn.hpp"

namespace laproute {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool parse_cell(const std::string& tok, double& out) {
  const char* b = tok.c_str();
  char* end = nullptr;
  out = std::strtod(b, &end);
  if (end == b) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Parses a CSV into a dense matrix. A first line with any non-numeric cell is
// treated as a header; a first column that never parses as a number is
// treated as a row index. Empty or unparseable data cells become NaN.
Eigen::MatrixXd load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty file");

  std::size_t start_row = 0;
  double v;
  bool header = false;
  for (const std::string& tok : rows[0])
    if (!tok.empty() && !parse_cell(tok, v)) header = true;
  if (header && rows.size() > 1) start_row = 1;

  bool index_col = true;
  for (std::size_t r = start_row; r < rows.size(); ++r)
    if (rows[r][0].empty() || parse_cell(rows[r][0], v)) {
      index_col = false;
      break;
    }

  const std::size_t col0 = index_col ? 1 : 0;
  const std::size_t width = rows[start_row].size();
  if (width <= col0) throw std::runtime_error(path + ": no data columns");
  for (std::size_t r = start_row; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw std::runtime_error(path + ": ragged row " + std::to_string(r + 1));

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size() - start_row),
                    static_cast<Eigen::Index>(width - col0));
  for (std::size_t r = start_row; r < rows.size(); ++r)
    for (std::size_t c = col0; c < width; ++c) {
      const std::string& tok = rows[r][c];
      m(static_cast<Eigen::Index>(r - start_row), static_cast<Eigen::Index>(c - col0)) =
          (!tok.empty() && parse_cell(tok, v)) ? v : kNaN;
    }
  return m;
}

struct Stats {
  double mean = 0.0;
  double var = 0.0;
  bool valid = false;
};

Stats window_stats(const Eigen::MatrixXd& values, int sensor, const std::vector<int>& rows) {
  Stats st;
  double sum = 0.0;
  for (int r : rows) {
    double v = values(r, sensor);
    if (!std::isfinite(v)) return st;
    sum += v;
  }
  const double n = static_cast<double>(rows.size());
  st.mean = sum / n;
  double ss = 0.0;
  for (int r : rows) {
    double d = values(r, sensor) - st.mean;
    ss += d * d;
  }
  st.var = rows.size() > 1 ? ss / (n - 1.0) : 0.0;
  st.valid = true;
  return st;
}

}  // namespace

TrafficDataset load_traffic_dataset(const std::string& values_csv,
                                    const std::string& adjacency_csv) {
  TrafficDataset ds;
  ds.values = load_csv_matrix(values_csv);
  ds.adjacency = load_csv_matrix(adjacency_csv);
  if (ds.adjacency.rows() != ds.adjacency.cols())
    throw std::runtime_error("adjacency matrix is not square");
  if (ds.adjacency.rows() != ds.values.cols())
    throw std::runtime_error("adjacency size does not match the sensor count");
  const int s = ds.sensor_count();
  if (s != 207 && s != 325)
    warn("sensor count " + std::to_string(s) + " matches neither published dataset shape");
  return ds;
}

TrafficWindows traffic_windows(const TrafficDataset& ds, int week_start_row,
                               const TrafficWindowConfig& cfg) {
  if (cfg.rows_per_hour < 1 || cfg.days < 1)
    throw std::invalid_argument("traffic_windows: bad window config");
  if (!(0 <= cfg.sim_start_hour && cfg.sim_start_hour < cfg.sim_end_hour && cfg.sim_end_hour <= 24))
    throw std::invalid_argument("traffic_windows: bad simulator window");
  if (!(0 <= cfg.real_start_hour && cfg.real_start_hour < cfg.real_end_hour &&
        cfg.real_end_hour <= 24))
    throw std::invalid_argument("traffic_windows: bad real window");
  const int day = 24 * cfg.rows_per_hour;
  if (week_start_row < 0 || week_start_row + cfg.days * day > ds.timestep_count())
    throw std::invalid_argument("traffic_windows: window does not fit the value matrix");

  std::vector<int> sim_rows;
  std::vector<int> real_rows;
  for (int d = 0; d < cfg.days; ++d) {
    const int base = week_start_row + d * day;
    for (int r = cfg.sim_start_hour * cfg.rows_per_hour; r < cfg.sim_end_hour * cfg.rows_per_hour;
         ++r)
      sim_rows.push_back(base + r);
    for (int r = cfg.real_start_hour * cfg.rows_per_hour;
         r < cfg.real_end_hour * cfg.rows_per_hour; ++r)
      real_rows.push_back(base + r);
  }

  TrafficWindows w;
  std::vector<double> mr, vr, ms, vs;
  for (int s = 0; s < ds.sensor_count(); ++s) {
    Stats real = window_stats(ds.values, s, real_rows);
    Stats sim = window_stats(ds.values, s, sim_rows);
    if (!real.valid || !sim.valid) {
      warn("sensor " + std::to_string(s) + " has missing values in a window, excluded");
      continue;
    }
    w.sensors.push_back(s);
    mr.push_back(real.mean);
    vr.push_back(real.var);
    ms.push_back(sim.mean);
    vs.push_back(sim.var);
  }
  const Eigen::Index k = static_cast<Eigen::Index>(w.sensors.size());
  w.mu_real = Eigen::Map<Eigen::VectorXd>(mr.data(), k);
  w.var_real = Eigen::Map<Eigen::VectorXd>(vr.data(), k);
  w.mu_sim = Eigen::Map<Eigen::VectorXd>(ms.data(), k);
  w.var_sim = Eigen::Map<Eigen::VectorXd>(vs.data(), k);
  return w;
}

Graph reconstruct_topology(const Eigen::MatrixXd& adj, double threshold) {
  if (adj.rows() != adj.cols()) throw std::invalid_argument("reconstruct_topology: not square");
  const int m = static_cast<int>(adj.rows());

  Eigen::MatrixXd sym = 0.5 * (adj + adj.transpose());
  auto adjacent = [&](int i, int j) { return i != j && sym(i, j) >= threshold; };

  // endpoints[s] = the up-to-two intersection nodes assigned to sensor s
  std::vector<std::vector<NodeId>> endpoints(static_cast<std::size_t>(m));
  NodeId next_node = 0;
  auto fresh = [&next_node]() { return next_node++; };
  auto share = [&](int a, int b) {
    NodeId n = fresh();
    endpoints[static_cast<std::size_t>(a)].push_back(n);
    endpoints[static_cast<std::size_t>(b)].push_back(n);
  };
  auto wired = [&](int s) { return endpoints[static_cast<std::size_t>(s)].size() >= 2; };

  // triangular loops, in sorted triple order; a clique touching an already
  // wired sensor is skipped whole
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (!adjacent(i, j)) continue;
      for (int k = j + 1; k < m; ++k) {
        if (!adjacent(i, k) || !adjacent(j, k)) continue;
        if (wired(i) || wired(j) || wired(k)) continue;
        share(i, j);
        share(i, k);
        share(j, k);
      }
    }

  // remaining adjacent pairs share one fresh node while both have a free slot
  auto shares_node = [&](int a, int b) {
    for (NodeId x : endpoints[static_cast<std::size_t>(a)])
      for (NodeId y : endpoints[static_cast<std::size_t>(b)])
        if (x == y) return true;
    return false;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (!adjacent(i, j) || wired(i) || wired(j)) continue;
      if (shares_node(i, j)) continue;
      share(i, j);
    }

  // completion: every sensor ends with exactly two endpoints
  for (int s = 0; s < m; ++s)
    while (endpoints[static_cast<std::size_t>(s)].size() < 2)
      endpoints[static_cast<std::size_t>(s)].push_back(fresh());

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s)
    edges.emplace_back(endpoints[static_cast<std::size_t>(s)][0],
                       endpoints[static_cast<std::size_t>(s)][1]);
  return Graph(std::max(next_node, 1), edges);
}

TrafficInstance traffic_instance(const TrafficDataset& ds, int week_start_row, std::uint64_t seed,
                                 const TrafficWindowConfig& cfg) {
  TrafficWindows w = traffic_windows(ds, week_start_row, cfg);
  const int m = static_cast<int>(w.sensors.size());
  if (m == 0) throw std::runtime_error("traffic_instance: no usable sensors");

  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = ds.adjacency(w.sensors[i], w.sensors[j]);

  TrafficInstance out{reconstruct_topology(sub, cfg.adjacency_threshold),
                      Instance{GroundTruth{}, EdgeData(m)}, w.sensors};
  GroundTruth& t = out.instance.truth;
  t.mu = w.mu_real;
  t.mu_sim = w.mu_sim;
  t.bias = t.mu - t.mu_sim;
  t.sigma2 = w.var_real.cwiseMax(1e-8);

  std::vector<int> ids(static_cast<std::size_t>(m));
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 mask_eng = make_stream(seed, "mask");
  std::shuffle(ids.begin(), ids.end(), mask_eng);
  const long hidden = std::lround(cfg.unobservable_fraction * m);
  std::vector<bool> observable(static_cast<std::size_t>(m), true);
  for (long i = 0; i < hidden; ++i) observable[static_cast<std::size_t>(ids[i])] = false;

  // bootstrap real samples from the afternoon window values
  const int day = 24 * cfg.rows_per_hour;
  const std::uint64_t sample_root = stream_seed(seed, "samples");
  for (int e = 0; e < m; ++e) {
    out.instance.data.set_exact_synth_mean(e, t.mu_sim[e]);
    if (!observable[static_cast<std::size_t>(e)]) continue;
    std::vector<double> pool;
    for (int d = 0; d < cfg.days; ++d) {
      const int base = week_start_row + d * day;
      for (int r = cfg.real_start_hour * cfg.rows_per_hour;
           r < cfg.real_end_hour * cfg.rows_per_hour; ++r)
        pool.push_back(ds.values(base + r, w.sensors[static_cast<std::size_t>(e)]));
    }
    std::mt19937_64 eng(indexed_seed(sample_root, static_cast<std::uint64_t>(e)));
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const int draws = std::min<int>(cfg.real_sample_cap, static_cast<int>(pool.size()));
    for (int k = 0; k < draws; ++k) out.instance.data.add_real(e, pool[pick(eng)]);
  }
  return out;
}

}  // namespace laproute
