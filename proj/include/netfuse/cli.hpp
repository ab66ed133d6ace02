#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netfuse/csv.hpp"
#include "netfuse/draws_io.hpp"
#include "netfuse/errors.hpp"
#include "netfuse/fused_map.hpp"
#include "netfuse/mcmc.hpp"
#include "netfuse/network.hpp"
#include "netfuse/select_predict.hpp"
#include "netfuse/simulate.hpp"

// Command-line orchestration. Every subcommand reads its inputs, runs the
// corresponding library routines, and writes CSV/binary outputs plus a
// manifest.json recording the resolved flags, per-phase wall-clock, and a
// CRC-32 per artifact. All data outputs are byte-stable across reruns and
// worker counts; only the manifest's timing fields vary.

namespace netfuse {

// A condition the user can fix by changing the command line.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

namespace cli_detail {

using json = nlohmann::ordered_json;

inline int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::vector<double> parse_grid_spec(const std::string& s) {
  const std::size_t c1 = s.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos || s.find(':', c2 + 1) != std::string::npos) {
    throw UsageError("--grid expects lo:hi:count, got '" + s + "'");
  }
  double lo = 0.0, hi = 0.0;
  int count = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(s.substr(0, c1), &used);
    if (used != c1) throw std::invalid_argument("");
    const std::string mid = s.substr(c1 + 1, c2 - c1 - 1);
    hi = std::stod(mid, &used);
    if (used != mid.size()) throw std::invalid_argument("");
    const std::string last = s.substr(c2 + 1);
    count = std::stoi(last, &used);
    if (used != last.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw UsageError("--grid expects lo:hi:count, got '" + s + "'");
  }
  try {
    return make_grid(lo, hi, count);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
}

inline ThetaTriple parse_triple(const std::string& s, const std::string& flag) {
  ThetaTriple out;
  std::istringstream in(s);
  std::string part;
  double vals[3];
  for (int k = 0; k < 3; ++k) {
    if (!std::getline(in, part, ',')) throw UsageError(flag + " expects a,b,c");
    try {
      std::size_t used = 0;
      vals[k] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw UsageError(flag + " expects three comma-separated reals, got '" + s + "'");
    }
  }
  if (std::getline(in, part, ',')) throw UsageError(flag + " expects exactly three values");
  out.theta1 = vals[0];
  out.theta2 = vals[1];
  out.theta3 = vals[2];
  return out;
}

inline InitMode parse_init(const std::string& s) {
  if (s == "time-average") return InitMode::TimeAverage;
  if (s == "logit-margins") return InitMode::LogitMargins;
  if (s == "zeros") return InitMode::Zeros;
  throw UsageError("--init must be time-average, logit-margins or zeros");
}

struct PhaseClock {
  json phases = json::object();
  std::chrono::steady_clock::time_point mark = std::chrono::steady_clock::now();

  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    phases[name] = std::chrono::duration<double>(now - mark).count();
    mark = now;
  }
};

struct OutputWriter {
  std::string dir;
  json files = json::object();

  explicit OutputWriter(const std::string& out_dir) : dir(out_dir) {
    if (dir.empty()) throw UsageError("--out must not be empty");
    std::filesystem::create_directories(dir);
  }

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir + "/" + name, content);
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", crc32_of(content));
    files[name] = json{{"bytes", content.size()}, {"crc32", std::string(hex)}};
  }

  void finalize(const std::string& command, const json& flags, PhaseClock& clock) {
    json manifest = json::object();
    manifest["command"] = command;
    manifest["flags"] = flags;
    manifest["phases_seconds"] = clock.phases;
    manifest["outputs"] = files;
    write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  }
};

// ---- CSV emission -----------------------------------------------------

inline std::string paths_csv(const std::vector<DyadFit>& fits) {
  std::string out = "i,j,r,t,theta\n";
  for (const DyadFit& f : fits) {
    for (int r = 1; r <= 3; ++r) {
      const ThetaPath& p = f.paths[static_cast<std::size_t>(r) - 1];
      for (int t = 0; t <= p.T(); ++t) {
        out += fmt_int(f.i + 1);
        out += ',';
        out += fmt_int(f.j + 1);
        out += ',';
        out += fmt_int(r);
        out += ',';
        out += fmt_int(t);
        out += ',';
        out += fmt_double(p[t]);
        out += '\n';
      }
    }
  }
  return out;
}

inline std::string truth_csv(const SimResult& sim, int n) {
  std::string out = "i,j,r,t,theta\n";
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      for (int r = 1; r <= 3; ++r) {
        const auto& path = sim.truth[k][static_cast<std::size_t>(r) - 1];
        for (std::size_t t = 0; t < path.size(); ++t) {
          out += fmt_int(i + 1);
          out += ',';
          out += fmt_int(j + 1);
          out += ',';
          out += fmt_int(r);
          out += ',';
          out += fmt_int(static_cast<long long>(t));
          out += ',';
          out += fmt_double(path[t]);
          out += '\n';
        }
      }
    }
  }
  return out;
}

inline std::string diagnostics_csv(const std::vector<DyadFit>& fits) {
  std::string out = "i,j,iterations,converged,final_rel_change,kkt_residual,block_df\n";
  for (const DyadFit& f : fits) {
    out += fmt_int(f.i + 1);
    out += ',';
    out += fmt_int(f.j + 1);
    out += ',';
    out += fmt_int(f.iterations);
    out += ',';
    out += f.converged ? '1' : '0';
    out += ',';
    out += fmt_double(f.final_rel_change);
    out += ',';
    out += fmt_double(f.kkt_residual);
    out += ',';
    out += fmt_int(block_df(f.paths));
    out += '\n';
  }
  return out;
}

// Per-snapshot descriptive statistics: link count, fraction of links that
// are reciprocated, and the global clustering coefficient of the undirected
// union graph.
inline std::string series_stats_csv(const NetworkSeries& series) {
  std::string out = "t,links,reciprocated_fraction,clustering\n";
  const int n = series.n();
  for (int t = 0; t < series.T(); ++t) {
    int links = 0, mutual = 0;
    std::vector<std::uint8_t> u(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (series.get(t, i, j)) {
          ++links;
          if (series.get(t, j, i)) ++mutual;
          u[static_cast<std::size_t>(i) * n + j] = 1;
          u[static_cast<std::size_t>(j) * n + i] = 1;
        }
      }
    }
    long long closed = 0, triples = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i || u[static_cast<std::size_t>(i) * n + j] == 0) continue;
        for (int k = j + 1; k < n; ++k) {
          if (k == i || u[static_cast<std::size_t>(i) * n + k] == 0) continue;
          ++triples;  // path j - i - k
          if (u[static_cast<std::size_t>(j) * n + k] != 0) ++closed;
        }
      }
    }
    out += fmt_int(t + 1);
    out += ',';
    out += fmt_int(links);
    out += ',';
    out += fmt_double(links == 0 ? 0.0 : static_cast<double>(mutual) / links);
    out += ',';
    out += fmt_double(triples == 0 ? 0.0 : static_cast<double>(closed) / static_cast<double>(triples));
    out += '\n';
  }
  return out;
}

inline std::string prediction_csv(const PredictionMatrix& pm) {
  std::string out = "from,to,prob\n";
  for (int i = 0; i < pm.n; ++i) {
    for (int j = 0; j < pm.n; ++j) {
      if (i == j) continue;
      out += fmt_int(i + 1);
      out += ',';
      out += fmt_int(j + 1);
      out += ',';
      out += fmt_double(pm.at(i, j));
      out += '\n';
    }
  }
  return out;
}

inline std::string roc_csv(const RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const RocPoint& p : roc.points) {
    out += fmt_double(p.threshold);
    out += ',';
    out += fmt_double(p.fpr);
    out += ',';
    out += fmt_double(p.tpr);
    out += '\n';
  }
  return out;
}

inline std::string changepoints_csv(const std::vector<double>& frac) {
  std::string out = "t,fraction\n";
  for (std::size_t k = 0; k < frac.size(); ++k) {
    out += fmt_int(static_cast<long long>(k) + 2);
    out += ',';
    out += fmt_double(frac[k]);
    out += '\n';
  }
  return out;
}

inline std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : rows) {
    out += k;
    out += ',';
    out += v;
    out += '\n';
  }
  return out;
}

inline std::string theta_mean_csv(const PosteriorDraws& draws) {
  std::string out = "i,j,r,t,theta_mean\n";
  std::size_t k = 0;
  for (int i = 0; i < draws.n; ++i) {
    for (int j = i + 1; j < draws.n; ++j, ++k) {
      for (int r = 1; r <= 3; ++r) {
        const auto& path = draws.theta_mean[k][static_cast<std::size_t>(r) - 1];
        for (std::size_t t = 0; t < path.size(); ++t) {
          out += fmt_int(i + 1);
          out += ',';
          out += fmt_int(j + 1);
          out += ',';
          out += fmt_int(r);
          out += ',';
          out += fmt_int(static_cast<long long>(t));
          out += ',';
          out += fmt_double(path[t]);
          out += '\n';
        }
      }
    }
  }
  return out;
}

inline std::string ess_csv(const PosteriorDraws& draws) {
  std::string out = "param,i,j,r,t,ess\n";
  out += "lambda,,,,,";
  out += fmt_double(draws.lambda_ess);
  out += '\n';
  if (draws.record_monitor) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < draws.n; ++i) {
      for (int j = i + 1; j < draws.n; ++j) pairs.emplace_back(i, j);
    }
    for (const MonitorEss& m : draws.mon_ess) {
      out += "theta,";
      out += fmt_int(pairs[m.dyad].first + 1);
      out += ',';
      out += fmt_int(pairs[m.dyad].second + 1);
      out += ',';
      out += fmt_int(m.r);
      out += ',';
      out += fmt_int(m.t);
      out += ',';
      out += fmt_double(m.ess);
      out += '\n';
    }
  }
  return out;
}

// ---- CSV loading ------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline long long parse_ll(const std::string& s, int lineno, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(lineno, "bad " + what + " field '" + s + "'");
  }
}

inline double parse_real(const std::string& s, int lineno, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(lineno, "bad " + what + " field '" + s + "'");
  }
}

// Reads a paths CSV (i,j,r,t,theta) back into canonical-order fits.
inline std::pair<int, std::vector<DyadFit>> load_paths_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line != "i,j,r,t,theta") {
    throw ParseError(1, "expected header 'i,j,r,t,theta'");
  }
  lineno = 1;
  struct Row {
    int i, j, r, t;
    double theta;
  };
  std::vector<Row> rows;
  int n = 0, T = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 5) throw ParseError(lineno, "expected 5 fields");
    Row row{};
    row.i = static_cast<int>(parse_ll(f[0], lineno, "i"));
    row.j = static_cast<int>(parse_ll(f[1], lineno, "j"));
    row.r = static_cast<int>(parse_ll(f[2], lineno, "r"));
    row.t = static_cast<int>(parse_ll(f[3], lineno, "t"));
    row.theta = parse_real(f[4], lineno, "theta");
    if (row.i < 1 || row.j <= row.i) throw ParseError(lineno, "need 1 <= i < j");
    if (row.r < 1 || row.r > 3) throw ParseError(lineno, "need r in 1..3");
    if (row.t < 0) throw ParseError(lineno, "need t >= 0");
    n = std::max(n, row.j);
    T = std::max(T, row.t);
    rows.push_back(row);
  }
  if (rows.empty()) throw DataError("paths CSV has no data rows");
  if (T < 1) throw DataError("paths CSV has no t >= 1 rows");

  const std::size_t D = dyad_count(n);
  std::vector<DyadFit> fits(D);
  std::vector<std::array<std::vector<char>, 3>> seen(D);
  {
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++k) {
        fits[k].i = i;
        fits[k].j = j;
        for (int r = 0; r < 3; ++r) {
          fits[k].paths[r] = ThetaPath(T, 0.0);
          seen[k][r].assign(static_cast<std::size_t>(T) + 1, 0);
        }
      }
    }
  }
  auto dyad_index = [n](int i0, int j0) {
    return static_cast<std::size_t>(i0) * (2 * n - i0 - 1) / 2 + static_cast<std::size_t>(j0 - i0 - 1);
  };
  for (const Row& row : rows) {
    const std::size_t k = dyad_index(row.i - 1, row.j - 1);
    auto& p = fits[k].paths[static_cast<std::size_t>(row.r) - 1];
    if (row.t > T) throw DataError("paths CSV: inconsistent t range");
    if (seen[k][row.r - 1][static_cast<std::size_t>(row.t)]) {
      throw DataError("paths CSV: duplicate (i,j,r,t) row");
    }
    seen[k][row.r - 1][static_cast<std::size_t>(row.t)] = 1;
    if (row.t == 0) {
      const std::vector<double> old = p.values();
      p = ThetaPath(T, row.theta);
      for (int t = 1; t <= T; ++t) p.set(t, old[static_cast<std::size_t>(t)]);
    } else {
      p.set(row.t, row.theta);
    }
  }
  for (std::size_t k = 0; k < D; ++k) {
    for (int r = 0; r < 3; ++r) {
      for (int t = 0; t <= T; ++t) {
        if (!seen[k][r][static_cast<std::size_t>(t)]) {
          throw DataError("paths CSV: missing rows for some dyad/coordinate/time");
        }
      }
    }
  }
  return {n, std::move(fits)};
}

inline PredictionMatrix load_prediction_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "from,to,prob") {
    throw ParseError(1, "expected header 'from,to,prob'");
  }
  int lineno = 1;
  struct Row {
    int from, to;
    double prob;
  };
  std::vector<Row> rows;
  int n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 3) throw ParseError(lineno, "expected 3 fields");
    Row row{};
    row.from = static_cast<int>(parse_ll(f[0], lineno, "from"));
    row.to = static_cast<int>(parse_ll(f[1], lineno, "to"));
    row.prob = parse_real(f[2], lineno, "prob");
    if (row.from < 1 || row.to < 1 || row.from == row.to) {
      throw ParseError(lineno, "need distinct 1-based from/to");
    }
    if (!(row.prob >= 0.0 && row.prob <= 1.0)) throw ParseError(lineno, "prob outside [0,1]");
    n = std::max(n, std::max(row.from, row.to));
    rows.push_back(row);
  }
  if (n < 2) throw DataError("prediction CSV has no usable rows");
  PredictionMatrix pm(n);
  std::vector<char> seen(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (const Row& row : rows) {
    const std::size_t idx =
        static_cast<std::size_t>(row.from - 1) * static_cast<std::size_t>(n) +
        static_cast<std::size_t>(row.to - 1);
    if (seen[idx]) throw DataError("prediction CSV: duplicate cell");
    seen[idx] = 1;
    pm.at(row.from - 1, row.to - 1) = row.prob;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !seen[static_cast<std::size_t>(i) * n + j]) {
        throw DataError("prediction CSV: missing off-diagonal cell");
      }
    }
  }
  return pm;
}

}  // namespace cli_detail

// ---- subcommand option bags -------------------------------------------

namespace cli_detail {

struct SimulateOpts {
  std::string preset, out, theta0, shift;
  int n = 0, T = 0, break_time = -1, workers = 0;
  double lambda_true = -1.0;
  std::uint64_t seed = 1;
  bool n_set = false, T_set = false, lt_set = false, th_set = false, sh_set = false,
       bt_set = false;
};

struct FitMapOpts {
  std::string data, out, init = "time-average";
  double lambda = 0.0, mu = 1.0, tol = 1e-5;
  int max_iter = 2000, workers = 0;
};

struct FitMcmcOpts {
  std::string data, out, scheme = "ffbs", init = "time-average";
  int burnin = 2000, samples = 20000, thin = 1, workers = 0;
  double a = 1.0, b = 0.2;
  std::uint64_t seed = 1;
};

struct SelectOpts {
  std::string data, out, method, grid, init = "time-average";
  int cal_window = 10, workers = 0;
  double mu = 1.0, tol = 1e-5;
  int max_iter = 2000;
};

struct PredictOpts {
  std::string fit, draws, method, out;
  std::uint64_t seed = 1;
};

struct RocOpts {
  std::string pred, data, out;
  int t = 0;
};

struct FitDirOpts {
  std::string fit, out;
};

struct DrawsDirOpts {
  std::string draws, out;
};

// ---- runners ------------------------------------------------------------

inline void run_simulate(const SimulateOpts& o) {
  PhaseClock clock;
  SimSpec spec;
  if (!o.preset.empty()) {
    spec = o.preset == "sim1" ? sim1_spec(o.seed) : sim2_spec(o.seed);
  } else {
    if (!o.n_set || !o.T_set) {
      throw UsageError("simulate: provide --preset or both --n and --T");
    }
  }
  spec.seed = o.seed;
  if (o.n_set) spec.n = o.n;
  if (o.T_set) spec.T = o.T;
  if (o.lt_set) spec.lambda_true = o.lambda_true;
  if (o.th_set) spec.theta0 = parse_triple(o.theta0, "--theta0");
  if (o.sh_set) spec.theta_shift = parse_triple(o.shift, "--shift");
  if (o.bt_set) spec.break_time = o.break_time;
  spec.validate();

  WorkerPool pool(static_cast<std::size_t>(resolve_workers(o.workers)));
  clock.lap("setup");
  const SimResult sim =
      spec.break_time != 0 ? simulate_break(spec, &pool) : simulate_de_walk(spec, &pool);
  clock.lap("simulate");

  OutputWriter w(o.out);
  std::ostringstream net;
  write_series(sim.series, net);
  w.write("net.txt", net.str());
  w.write("truth.csv", truth_csv(sim, spec.n));
  w.write("sim_stats.csv", series_stats_csv(sim.series));
  clock.lap("write");

  json flags{{"preset", o.preset},
             {"n", spec.n},
             {"T", spec.T},
             {"lambda_true", spec.lambda_true},
             {"theta0", {spec.theta0.theta1, spec.theta0.theta2, spec.theta0.theta3}},
             {"break_time", spec.break_time},
             {"shift",
              {spec.theta_shift.theta1, spec.theta_shift.theta2, spec.theta_shift.theta3}},
             {"seed", spec.seed},
             {"workers", resolve_workers(o.workers)},
             {"out", o.out}};
  w.finalize("simulate", flags, clock);
}

inline void run_fit_map(const FitMapOpts& o) {
  PhaseClock clock;
  if (o.data.empty()) throw UsageError("fit-map: --data is required");
  if (!(o.lambda >= 0.0)) throw UsageError("fit-map: --lambda must be >= 0");
  const NetworkSeries series = read_series_file(o.data);
  clock.lap("load");

  const InitMode init = parse_init(o.init);
  const ThetaTriple theta0 = empirical_init(series, init);
  BregmanConfig cfg;
  cfg.lambda = o.lambda;
  cfg.mu = o.mu;
  cfg.tol = o.tol;
  cfg.max_iter = o.max_iter;
  WorkerPool pool(static_cast<std::size_t>(resolve_workers(o.workers)));
  const std::vector<DyadFit> fits = fit_map_all(series, theta0, cfg, &pool);
  clock.lap("fit");

  OutputWriter w(o.out);
  w.write("fit.csv", paths_csv(fits));
  w.write("diagnostics.csv", diagnostics_csv(fits));
  clock.lap("write");

  json flags{{"data", o.data},     {"lambda", o.lambda}, {"mu", o.mu},
             {"tol", o.tol},       {"max_iter", o.max_iter}, {"init", o.init},
             {"workers", resolve_workers(o.workers)}, {"out", o.out}};
  w.finalize("fit-map", flags, clock);
}

inline void run_fit_mcmc(const FitMcmcOpts& o) {
  PhaseClock clock;
  if (o.data.empty()) throw UsageError("fit-mcmc: --data is required");
  const NetworkSeries series = read_series_file(o.data);
  clock.lap("load");

  McmcConfig cfg;
  cfg.scheme = o.scheme == "direct" ? McmcScheme::Direct : McmcScheme::FFBS;
  cfg.burn_in = o.burnin;
  cfg.samples = o.samples;
  cfg.thin = o.thin;
  cfg.a = o.a;
  cfg.b = o.b;
  cfg.seed = o.seed;
  const ThetaTriple theta0 = empirical_init(series, parse_init(o.init));
  WorkerPool pool(static_cast<std::size_t>(resolve_workers(o.workers)));
  PosteriorDraws draws = run_mcmc(series, theta0, cfg, &pool);
  clock.lap("sample");
  const double sampling_seconds = draws.sampling_seconds;

  OutputWriter w(o.out);
  draws.sampling_seconds = 0.0;  // keep draws.bin byte-stable across reruns
  w.write("draws.bin", serialize_draws(draws));
  w.write("theta_mean.csv", theta_mean_csv(draws));
  w.write("mcmc_summary.csv",
          kv_csv({{"scheme", o.scheme},
                  {"burn_in", fmt_int(o.burnin)},
                  {"samples", fmt_int(o.samples)},
                  {"thin", fmt_int(o.thin)},
                  {"a", fmt_double(o.a)},
                  {"b", fmt_double(o.b)},
                  {"seed", fmt_int(static_cast<long long>(o.seed))},
                  {"lambda_mean", fmt_double(draws.lambda_mean)},
                  {"lambda_ess", fmt_double(draws.lambda_ess)}}));
  w.write("ess.csv", ess_csv(draws));
  clock.lap("write");

  json flags{{"data", o.data},   {"scheme", o.scheme}, {"burnin", o.burnin},
             {"samples", o.samples}, {"thin", o.thin},     {"a", o.a},
             {"b", o.b},         {"init", o.init},     {"seed", o.seed},
             {"workers", resolve_workers(o.workers)}, {"out", o.out}};
  clock.phases["sampling_seconds"] = sampling_seconds;
  w.finalize("fit-mcmc", flags, clock);
}

inline void run_select(const SelectOpts& o) {
  PhaseClock clock;
  if (o.data.empty()) throw UsageError("select: --data is required");
  if (o.method != "cv" && o.method != "bic") throw UsageError("select: --method must be cv or bic");
  const std::vector<double> grid = parse_grid_spec(o.grid);
  const NetworkSeries series = read_series_file(o.data);
  clock.lap("load");

  const InitMode init = parse_init(o.init);
  BregmanConfig cfg;
  cfg.mu = o.mu;
  cfg.tol = o.tol;
  cfg.max_iter = o.max_iter;
  WorkerPool pool(static_cast<std::size_t>(resolve_workers(o.workers)));

  OutputWriter w(o.out);
  double lambda_star = 0.0;
  if (o.method == "cv") {
    const CvResult res = cv_select_lambda(series, grid, o.cal_window, init, cfg, &pool);
    lambda_star = res.lambda_star;
    clock.lap("select");
    std::string table = "lambda,mean_auc\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      table += fmt_double(grid[g]);
      table += ',';
      table += fmt_double(res.mean_auc[g]);
      table += '\n';
    }
    w.write("auc_table.csv", table);
    std::string folds = "fold,fit_T,lambda,auc\n";
    for (std::size_t f = 0; f < res.fold_auc.size(); ++f) {
      for (std::size_t g = 0; g < grid.size(); ++g) {
        folds += fmt_int(static_cast<long long>(f));
        folds += ',';
        folds += fmt_int(res.fold_fit_T[f]);
        folds += ',';
        folds += fmt_double(grid[g]);
        folds += ',';
        folds += fmt_double(res.fold_auc[f][g]);
        folds += '\n';
      }
    }
    w.write("cv_folds.csv", folds);
  } else {
    const BicResult res = bic_select_lambda(series, grid, init, cfg, &pool);
    lambda_star = res.lambda_star;
    clock.lap("select");
    std::string table = "lambda,bic\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      table += fmt_double(grid[g]);
      table += ',';
      table += fmt_double(res.bic[g]);
      table += '\n';
    }
    w.write("bic_table.csv", table);
  }

  // Refit the full window at the selected penalty so downstream subcommands
  // (predict, changepoints) can consume this directory directly.
  BregmanConfig star = cfg;
  star.lambda = lambda_star;
  const ThetaTriple theta0 = empirical_init(series, init);
  const std::vector<DyadFit> fits = fit_map_all(series, theta0, star, &pool);
  w.write("fit.csv", paths_csv(fits));
  w.write("diagnostics.csv", diagnostics_csv(fits));
  w.write("selected.csv",
          kv_csv({{"method", o.method}, {"lambda_star", fmt_double(lambda_star)}}));
  clock.lap("refit");

  json flags{{"data", o.data},       {"method", o.method}, {"grid", o.grid},
             {"cal_window", o.cal_window}, {"init", o.init},     {"mu", o.mu},
             {"tol", o.tol},         {"max_iter", o.max_iter},
             {"workers", resolve_workers(o.workers)}, {"out", o.out},
             {"lambda_star", lambda_star}};
  w.finalize("select", flags, clock);
}

inline void run_predict(const PredictOpts& o) {
  PhaseClock clock;
  const bool have_fit = !o.fit.empty();
  const bool have_draws = !o.draws.empty();
  if (have_fit == have_draws) {
    throw UsageError("predict: provide exactly one of --fit DIR or --draws DIR");
  }
  std::string method = o.method;
  if (method.empty()) method = have_fit ? "map" : "mcmc";
  if ((method == "map") != have_fit) {
    throw UsageError("predict: --method " + method + " does not match the provided input");
  }

  PredictionMatrix pm;
  if (have_fit) {
    const auto [n, fits] = load_paths_csv(read_text_file(o.fit + "/fit.csv"));
    clock.lap("load");
    pm = predict_map(fits, n);
  } else {
    const PosteriorDraws draws = deserialize_draws(read_text_file(o.draws + "/draws.bin"));
    clock.lap("load");
    Rng rng = Rng::derive(o.seed, 0, 0);
    pm = predict_mcmc(draws, rng);
  }
  clock.lap("predict");

  OutputWriter w(o.out);
  w.write("prediction.csv", prediction_csv(pm));
  clock.lap("write");

  json flags{{"fit", o.fit}, {"draws", o.draws}, {"method", method},
             {"seed", o.seed}, {"out", o.out}};
  w.finalize("predict", flags, clock);
}

inline void run_roc(const RocOpts& o) {
  PhaseClock clock;
  if (o.pred.empty() || o.data.empty()) throw UsageError("roc: --pred and --data are required");
  const PredictionMatrix pm = load_prediction_csv(read_text_file(o.pred));
  const NetworkSeries series = read_series_file(o.data);
  if (pm.n != series.n()) throw DataError("roc: prediction and network disagree on n");
  const int t = o.t == 0 ? series.T() : o.t;
  if (t < 1 || t > series.T()) throw UsageError("roc: --t out of range");
  clock.lap("load");

  std::vector<double> scores;
  std::vector<int> labels;
  sp_detail::pool_cells(pm, series, t - 1, scores, labels);
  const RocCurve roc = roc_auc(scores, labels);
  clock.lap("score");

  OutputWriter w(o.out);
  w.write("roc.csv", roc_csv(roc));
  w.write("roc_summary.csv", kv_csv({{"t", fmt_int(t)}, {"auc", fmt_double(roc.auc)}}));
  clock.lap("write");

  json flags{{"pred", o.pred}, {"data", o.data}, {"t", t}, {"out", o.out}};
  w.finalize("roc", flags, clock);
}

inline void run_changepoints(const FitDirOpts& o) {
  PhaseClock clock;
  if (o.fit.empty()) throw UsageError("changepoints: --fit is required");
  const auto [n, fits] = load_paths_csv(read_text_file(o.fit + "/fit.csv"));
  (void)n;
  clock.lap("load");
  const std::vector<double> frac = changepoint_series(fits);
  clock.lap("compute");

  OutputWriter w(o.out);
  w.write("changepoints.csv", changepoints_csv(frac));
  clock.lap("write");

  json flags{{"fit", o.fit}, {"out", o.out}};
  w.finalize("changepoints", flags, clock);
}

inline void run_ess(const DrawsDirOpts& o) {
  PhaseClock clock;
  if (o.draws.empty()) throw UsageError("ess: --draws is required");
  const PosteriorDraws draws = deserialize_draws(read_text_file(o.draws + "/draws.bin"));
  clock.lap("load");

  OutputWriter w(o.out);
  w.write("ess.csv", ess_csv(draws));
  clock.lap("write");

  json flags{{"draws", o.draws}, {"out", o.out}};
  w.finalize("ess", flags, clock);
}

}  // namespace cli_detail

// Parses argv (program name excluded) and executes one subcommand.
// Exit codes: 0 success/help, 1 usage error, 2 data/parse error, 3 numerical
// or internal failure.
inline int cmd_dispatch(std::vector<std::string> args) {
  using namespace cli_detail;
  CLI::App app{"Fused-lasso dynamic network models: fitting, selection, prediction"};
  app.name("netfuse");
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Generate a synthetic network series");
  c_sim->add_option("--preset", sim.preset, "Scenario preset")
      ->check(CLI::IsMember({"sim1", "sim2"}));
  CLI::Option* sim_n = c_sim->add_option("--n", sim.n, "Node count");
  CLI::Option* sim_T = c_sim->add_option("--T", sim.T, "Series length");
  CLI::Option* sim_lt = c_sim->add_option("--lambda-true", sim.lambda_true, "Innovation rate");
  CLI::Option* sim_th = c_sim->add_option("--theta0", sim.theta0, "Initial levels a,b,c");
  CLI::Option* sim_sh = c_sim->add_option("--shift", sim.shift, "Break shift a,b,c");
  CLI::Option* sim_bt = c_sim->add_option("--break-time", sim.break_time, "Break time (1 < t <= T)");
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--workers", sim.workers, "Worker threads")->envname("NETFUSE_WORKERS");
  c_sim->add_option("--out", sim.out, "Output directory")->required();

  FitMapOpts fmap;
  CLI::App* c_fmap = app.add_subcommand("fit-map", "Penalized MAP fit of all dyad paths");
  c_fmap->add_option("--data", fmap.data, "Network series file")->required();
  c_fmap->add_option("--lambda", fmap.lambda, "Penalty value")->required();
  c_fmap->add_option("--mu", fmap.mu, "Splitting weight");
  c_fmap->add_option("--tol", fmap.tol, "Convergence tolerance");
  c_fmap->add_option("--max-iter", fmap.max_iter, "Iteration cap");
  c_fmap->add_option("--init", fmap.init, "Anchor initialization")
      ->check(CLI::IsMember({"time-average", "logit-margins", "zeros"}));
  c_fmap->add_option("--workers", fmap.workers, "Worker threads")->envname("NETFUSE_WORKERS");
  c_fmap->add_option("--out", fmap.out, "Output directory")->required();

  FitMcmcOpts fmc;
  CLI::App* c_fmc = app.add_subcommand("fit-mcmc", "Posterior sampling of all dyad paths");
  c_fmc->add_option("--data", fmc.data, "Network series file")->required();
  c_fmc->add_option("--scheme", fmc.scheme, "Path update scheme")
      ->check(CLI::IsMember({"ffbs", "direct"}));
  c_fmc->add_option("--burnin", fmc.burnin, "Burn-in cycles");
  c_fmc->add_option("--samples", fmc.samples, "Retained draws");
  c_fmc->add_option("--thin", fmc.thin, "Thinning stride");
  c_fmc->add_option("--a", fmc.a, "Penalty prior shape");
  c_fmc->add_option("--b", fmc.b, "Penalty prior rate");
  c_fmc->add_option("--init", fmc.init, "Anchor initialization")
      ->check(CLI::IsMember({"time-average", "logit-margins", "zeros"}));
  c_fmc->add_option("--seed", fmc.seed, "RNG seed");
  c_fmc->add_option("--workers", fmc.workers, "Worker threads")->envname("NETFUSE_WORKERS");
  c_fmc->add_option("--out", fmc.out, "Output directory")->required();

  SelectOpts sel;
  CLI::App* c_sel = app.add_subcommand("select", "Penalty selection over a grid");
  c_sel->add_option("--data", sel.data, "Network series file")->required();
  c_sel->add_option("--method", sel.method, "cv or bic")
      ->required()
      ->check(CLI::IsMember({"cv", "bic"}));
  c_sel->add_option("--grid", sel.grid, "lo:hi:count")->required();
  c_sel->add_option("--cal-window", sel.cal_window, "Held-out steps for cv");
  c_sel->add_option("--init", sel.init, "Anchor initialization")
      ->check(CLI::IsMember({"time-average", "logit-margins", "zeros"}));
  c_sel->add_option("--mu", sel.mu, "Splitting weight");
  c_sel->add_option("--tol", sel.tol, "Convergence tolerance");
  c_sel->add_option("--max-iter", sel.max_iter, "Iteration cap");
  c_sel->add_option("--workers", sel.workers, "Worker threads")->envname("NETFUSE_WORKERS");
  c_sel->add_option("--out", sel.out, "Output directory")->required();

  PredictOpts pre;
  CLI::App* c_pre = app.add_subcommand("predict", "One-step-ahead link probabilities");
  c_pre->add_option("--fit", pre.fit, "Directory holding fit.csv");
  c_pre->add_option("--draws", pre.draws, "Directory holding draws.bin");
  c_pre->add_option("--method", pre.method, "map or mcmc")
      ->check(CLI::IsMember({"map", "mcmc"}));
  c_pre->add_option("--seed", pre.seed, "RNG seed (mcmc propagation)");
  c_pre->add_option("--out", pre.out, "Output directory")->required();

  RocOpts roc;
  CLI::App* c_roc = app.add_subcommand("roc", "ROC of a prediction against a snapshot");
  c_roc->add_option("--pred", roc.pred, "prediction.csv path")->required();
  c_roc->add_option("--data", roc.data, "Network series file")->required();
  c_roc->add_option("--t", roc.t, "Snapshot to score against (default: last)");
  c_roc->add_option("--out", roc.out, "Output directory")->required();

  FitDirOpts cps;
  CLI::App* c_cps = app.add_subcommand("changepoints", "Fraction of dyads changing per step");
  c_cps->add_option("--fit", cps.fit, "Directory holding fit.csv")->required();
  c_cps->add_option("--out", cps.out, "Output directory")->required();

  DrawsDirOpts essd;
  CLI::App* c_ess = app.add_subcommand("ess", "Effective sample sizes of stored chains");
  c_ess->add_option("--draws", essd.draws, "Directory holding draws.bin")->required();
  c_ess->add_option("--out", essd.out, "Output directory")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    sim.n_set = sim_n->count() > 0;
    sim.T_set = sim_T->count() > 0;
    sim.lt_set = sim_lt->count() > 0;
    sim.th_set = sim_th->count() > 0;
    sim.sh_set = sim_sh->count() > 0;
    sim.bt_set = sim_bt->count() > 0;
    if (app.got_subcommand(c_sim)) {
      run_simulate(sim);
    } else if (app.got_subcommand(c_fmap)) {
      run_fit_map(fmap);
    } else if (app.got_subcommand(c_fmc)) {
      run_fit_mcmc(fmc);
    } else if (app.got_subcommand(c_sel)) {
      run_select(sel);
    } else if (app.got_subcommand(c_pre)) {
      run_predict(pre);
    } else if (app.got_subcommand(c_roc)) {
      run_roc(roc);
    } else if (app.got_subcommand(c_cps)) {
      run_changepoints(cps);
    } else if (app.got_subcommand(c_ess)) {
      run_ess(essd);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace netfuse
