#pragma once

// Monte-Carlo experiment driver: JSON config, seeded channel sweeps across
// the solvers and baselines, CSV emission, and aggregate summaries.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swipt/bench.hpp"
#include "swipt/channel.hpp"
#include "swipt/common.hpp"
#include "swipt/harvest.hpp"
#include "swipt/highsnr.hpp"
#include "swipt/regimes.hpp"
#include "swipt/solver.hpp"
#include "swipt/waterfill.hpp"

namespace swipt {

enum class Scheme {
  Op1,
  Op2,
  Op1HighSnr,
  Op2HighSnr,
  Ops,
  Otcm,
  Dps,
  Oracle,
};

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Op1: return "op1";
    case Scheme::Op2: return "op2";
    case Scheme::Op1HighSnr: return "op1_hisnr";
    case Scheme::Op2HighSnr: return "op2_hisnr";
    case Scheme::Ops: return "ops";
    case Scheme::Otcm: return "otcm";
    case Scheme::Dps: return "dps";
    case Scheme::Oracle: return "oracle";
  }
  return "unknown";
}

inline Scheme scheme_from_name(const std::string& name) {
  static const std::map<std::string, Scheme> table = {
      {"op1", Scheme::Op1},           {"op2", Scheme::Op2},
      {"op1_hisnr", Scheme::Op1HighSnr}, {"op2_hisnr", Scheme::Op2HighSnr},
      {"ops", Scheme::Ops},           {"otcm", Scheme::Otcm},
      {"dps", Scheme::Dps},           {"oracle", Scheme::Oracle},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown scheme: " + name);
  return it->second;
}

enum class InfeasiblePolicy { Exclude, Zero };

struct ExperimentConfig {
  int n = 2;
  double theta = 0.1;
  double sigma2_dbm = -100.0;
  double p_t_watts = 10.0;
  std::vector<double> rate_grid;      // bps/Hz, or fractions of R_max when normalized
  bool normalized_rates = false;
  int n_channels = 1;
  std::uint64_t seed = 1;
  double tol = 1e-4;
  std::vector<Scheme> schemes = {Scheme::Op1};
  EhCircuitModel eh_model = linear_model(1.0);
  InfeasiblePolicy infeasible_policy = InfeasiblePolicy::Exclude;
  int workers = 0;  // 0: hardware concurrency
  int dps_grid_points = 101;
  int oracle_grid_points = 401;

  double sigma2_watts() const { return dbm_to_watts(sigma2_dbm); }
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 1 || cfg.n > 8) throw std::invalid_argument("n must be in 1..8");
  if (!(cfg.theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (!(cfg.p_t_watts > 0.0)) throw std::invalid_argument("p_t_watts must be positive");
  if (cfg.rate_grid.empty()) throw std::invalid_argument("rate_grid must be nonempty");
  for (double r : cfg.rate_grid)
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("rate grid entries must be finite and nonnegative");
  if (cfg.n_channels < 1) throw std::invalid_argument("n_channels must be at least 1");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw std::invalid_argument("tol must be in (0,1)");
  if (cfg.schemes.empty()) throw std::invalid_argument("schemes must be nonempty");
  for (Scheme s : cfg.schemes) {
    if (s == Scheme::Oracle && cfg.n != 2)
      throw std::invalid_argument("oracle scheme requires n = 2");
    if (s == Scheme::Dps && cfg.n > 4)
      throw std::invalid_argument("dps scheme requires n <= 4");
  }
  if (cfg.workers < 0) throw std::invalid_argument("workers must be nonnegative");
  if (cfg.dps_grid_points < 11 || cfg.oracle_grid_points < 11)
    throw std::invalid_argument("grid point counts must be at least 11");
}

namespace detail {

inline EhCircuitModel parse_eh_model(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("eh_model must be an object");
  const std::string kind = j.at("kind").get<std::string>();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "kind" || k == "eta0" || k == "max_dc_w" || k == "steepness" || k == "center_w" ||
        k == "path")
      continue;
    throw std::invalid_argument("unknown eh_model key: " + k);
  }
  if (kind == "linear") return linear_model(j.value("eta0", 1.0));
  if (kind == "logistic") {
    EhCircuitModel base = sample_logistic_model();
    return logistic_model(j.value("max_dc_w", base.max_dc_w), j.value("steepness", base.steepness),
                          j.value("center_w", base.center_w));
  }
  if (kind == "table") {
    if (j.contains("path")) return load_table_csv(j.at("path").get<std::string>());
    return sample_rectifier_table();
  }
  throw std::invalid_argument("unknown eh_model kind: " + kind);
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const char* known[] = {"n",          "theta",   "sigma2_dbm",        "p_t_watts",
                                "rate_grid",  "n_channels", "seed",           "tol",
                                "schemes",    "eh_model",   "infeasible_policy", "workers",
                                "dps_grid_points", "oracle_grid_points"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }
  for (const char* k : {"n", "theta", "sigma2_dbm", "p_t_watts", "rate_grid", "n_channels", "seed"})
    if (!j.contains(k)) throw std::invalid_argument(std::string("missing config key: ") + k);

  ExperimentConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.theta = j.at("theta").get<double>();
  cfg.sigma2_dbm = j.at("sigma2_dbm").get<double>();
  cfg.p_t_watts = j.at("p_t_watts").get<double>();
  const auto& rg = j.at("rate_grid");
  if (rg.is_array()) {
    cfg.rate_grid = rg.get<std::vector<double>>();
  } else if (rg.is_object() && rg.contains("normalized") && rg.size() == 1) {
    cfg.normalized_rates = true;
    cfg.rate_grid = rg.at("normalized").get<std::vector<double>>();
    for (double f : cfg.rate_grid)
      if (!(f >= 0.0 && f <= 1.0))
        throw std::invalid_argument("normalized rate fractions must lie in [0,1]");
  } else {
    throw std::invalid_argument("rate_grid must be an array or {\"normalized\": [...]}");
  }
  cfg.n_channels = j.at("n_channels").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.tol = j.value("tol", 1e-4);
  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : j.at("schemes")) cfg.schemes.push_back(scheme_from_name(s.get<std::string>()));
  }
  if (j.contains("eh_model")) cfg.eh_model = detail::parse_eh_model(j.at("eh_model"));
  if (j.contains("infeasible_policy")) {
    const std::string p = j.at("infeasible_policy").get<std::string>();
    if (p == "exclude")
      cfg.infeasible_policy = InfeasiblePolicy::Exclude;
    else if (p == "zero")
      cfg.infeasible_policy = InfeasiblePolicy::Zero;
    else
      throw std::invalid_argument("infeasible_policy must be \"exclude\" or \"zero\"");
  }
  cfg.workers = j.value("workers", 0);
  cfg.dps_grid_points = j.value("dps_grid_points", 101);
  cfg.oracle_grid_points = j.value("oracle_grid_points", 401);
  validate(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

struct TradeoffRecord {
  std::string scheme;
  int channel_index = 0;
  double rate_req = 0.0;
  double p_re = 0.0;
  double p_h = 0.0;
  double rho = 0.0;
  std::string mode = "infeasible";
  int r_s = 0;
  int iterations = 0;
};

namespace detail {

inline JointSolution dispatch_scheme(Scheme scheme, const ChannelMatrix& h,
                                     const ChannelDecomposition& dec, const SystemParams& params,
                                     const ExperimentConfig& cfg) {
  switch (scheme) {
    case Scheme::Op1: return solve_op1(dec, params);
    case Scheme::Op2: return solve_op2(dec, params);
    case Scheme::Op1HighSnr: return solve_op1_highsnr(dec, params);
    case Scheme::Op2HighSnr: return solve_op2_highsnr(dec, params);
    case Scheme::Ops: return baseline_ops(dec, params);
    case Scheme::Otcm: return baseline_otcm(dec, params);
    case Scheme::Dps: return baseline_dps_grid(h, params, cfg.dps_grid_points);
    case Scheme::Oracle: return oracle_grid_2x2(h, params, cfg.oracle_grid_points);
  }
  throw std::logic_error("unreachable scheme");
}

inline int worker_count(const ExperimentConfig& cfg, int n_tasks) {
  int w = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  if (const char* env = std::getenv("SWIPT_OPT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0 && cap < w) w = cap;
  }
  return std::min(w, n_tasks);
}

}  // namespace detail

// One record per (channel, rate point, scheme), canonically ordered by
// (channel_index, rate_index, scheme name) regardless of thread scheduling.
// Infeasible points carry zeros and mode "infeasible"; solver failures are
// captured per record as mode "error" and never abort the sweep.
inline std::vector<TradeoffRecord> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<Scheme> schemes = cfg.schemes;
  std::sort(schemes.begin(), schemes.end(), [](Scheme a, Scheme b) {
    return std::strcmp(scheme_name(a), scheme_name(b)) < 0;
  });
  schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());

  const int n_rates = static_cast<int>(cfg.rate_grid.size());
  const int n_schemes = static_cast<int>(schemes.size());
  const double sigma2 = cfg.sigma2_watts();
  std::vector<TradeoffRecord> records(
      static_cast<std::size_t>(cfg.n_channels) * n_rates * n_schemes);

  auto solve_channel = [&](int ci) {
    const ChannelMatrix h = generate_channel(cfg.n, cfg.n, cfg.theta, cfg.seed + ci);
    const ChannelDecomposition dec = decompose(h);
    SystemParams params;
    params.p_t = cfg.p_t_watts;
    params.sigma2 = sigma2;
    params.tol = cfg.tol;
    double r_max = 0.0;
    if (cfg.normalized_rates) {
      params.rate_req = 0.0;
      r_max = max_rate(dec, params);
    }
    for (int ri = 0; ri < n_rates; ++ri) {
      params.rate_req = cfg.normalized_rates ? cfg.rate_grid[ri] * r_max : cfg.rate_grid[ri];
      for (int si = 0; si < n_schemes; ++si) {
        TradeoffRecord& rec =
            records[(static_cast<std::size_t>(ci) * n_rates + ri) * n_schemes + si];
        rec.scheme = scheme_name(schemes[si]);
        rec.channel_index = ci;
        rec.rate_req = params.rate_req;
        try {
          const JointSolution sol = detail::dispatch_scheme(schemes[si], h, dec, params, cfg);
          rec.mode = mode_name(sol.mode);
          if (sol.mode != Mode::Infeasible) {
            rec.p_re = sol.p_re;
            rec.p_h = harvested_power(sol.p_re, cfg.eh_model);
            rec.rho = sol.rho;
            rec.r_s = sol.r_s;
            rec.iterations = sol.iterations;
          }
        } catch (const infeasible_error&) {
          rec.mode = "infeasible";
        } catch (const std::exception&) {
          rec.mode = "error";
        }
      }
    }
  };

  const int workers = detail::worker_count(cfg, cfg.n_channels);
  if (workers <= 1) {
    for (int ci = 0; ci < cfg.n_channels; ++ci) solve_channel(ci);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int ci = next.fetch_add(1); ci < cfg.n_channels; ci = next.fetch_add(1))
          solve_channel(ci);
      });
    }
    for (auto& t : pool) t.join();
  }
  return records;
}

// Per-channel (R_max, R_th) for a config's seeded channel population.
inline std::vector<std::pair<double, double>> rate_stats(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<double, double>> out(cfg.n_channels);
  const double sigma2 = cfg.sigma2_watts();
  for (int ci = 0; ci < cfg.n_channels; ++ci) {
    const ChannelMatrix h = generate_channel(cfg.n, cfg.n, cfg.theta, cfg.seed + ci);
    const ChannelDecomposition dec = decompose(h);
    SystemParams params;
    params.p_t = cfg.p_t_watts;
    params.sigma2 = sigma2;
    const double r_max = max_rate(dec, params);
    double r_th = std::numeric_limits<double>::infinity();
    if (dec.rank >= 2) {
      const double l1 = dec.singvals[0] * dec.singvals[0];
      const double l2 = dec.singvals[1] * dec.singvals[1];
      r_th = rate_threshold_default(cfg.p_t_watts, l1, l2, sigma2);
    }
    out[ci] = {r_max, r_th};
  }
  return out;
}

struct SummaryRow {
  std::string scheme;
  int rate_index = 0;
  double rate_req_mean = 0.0;
  int n_used = 0;
  double p_re_mean = 0.0;
  double p_re_std = 0.0;
  double p_h_mean = 0.0;
  double p_h_std = 0.0;
  double rho_mean = 0.0;
  double rho_std = 0.0;
  // Percentage gain of op1's mean p_re over this row's scheme at the same
  // rate index, over channels where both are feasible. NaN when either
  // scheme is absent or no channel qualifies.
  double op1_gain_pct = std::numeric_limits<double>::quiet_NaN();
};

// Aggregates a canonical record stream back into per-(scheme, rate) rows.
// Needs the config to recover the grid layout; records must come from
// run_sweep (or a byte-faithful CSV round trip) with the same config.
inline std::vector<SummaryRow> summarize(const std::vector<TradeoffRecord>& records,
                                         const ExperimentConfig& cfg) {
  if (records.empty()) throw std::invalid_argument("no records to summarize");
  std::vector<Scheme> schemes = cfg.schemes;
  std::sort(schemes.begin(), schemes.end(), [](Scheme a, Scheme b) {
    return std::strcmp(scheme_name(a), scheme_name(b)) < 0;
  });
  schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
  const int n_rates = static_cast<int>(cfg.rate_grid.size());
  const int n_schemes = static_cast<int>(schemes.size());
  if (records.size() != static_cast<std::size_t>(cfg.n_channels) * n_rates * n_schemes)
    throw std::invalid_argument("record count does not match the config layout");

  auto at = [&](int ci, int ri, int si) -> const TradeoffRecord& {
    return records[(static_cast<std::size_t>(ci) * n_rates + ri) * n_schemes + si];
  };
  auto feasible = [](const TradeoffRecord& r) {
    return r.mode != "infeasible" && r.mode != "error";
  };

  int op1_si = -1;
  for (int si = 0; si < n_schemes; ++si)
    if (schemes[si] == Scheme::Op1) op1_si = si;

  std::vector<SummaryRow> rows;
  rows.reserve(static_cast<std::size_t>(n_rates) * n_schemes);
  for (int ri = 0; ri < n_rates; ++ri) {
    for (int si = 0; si < n_schemes; ++si) {
      SummaryRow row;
      row.scheme = scheme_name(schemes[si]);
      row.rate_index = ri;
      double sum_rate = 0.0, sum[3] = {0, 0, 0}, sumsq[3] = {0, 0, 0};
      int used = 0;
      for (int ci = 0; ci < cfg.n_channels; ++ci) {
        const TradeoffRecord& r = at(ci, ri, si);
        if (cfg.infeasible_policy == InfeasiblePolicy::Exclude && !feasible(r)) continue;
        const double vals[3] = {r.p_re, r.p_h, r.rho};
        for (int k = 0; k < 3; ++k) {
          sum[k] += vals[k];
          sumsq[k] += vals[k] * vals[k];
        }
        sum_rate += r.rate_req;
        ++used;
      }
      row.n_used = used;
      if (used > 0) {
        row.rate_req_mean = sum_rate / used;
        double* means[3] = {&row.p_re_mean, &row.p_h_mean, &row.rho_mean};
        double* stds[3] = {&row.p_re_std, &row.p_h_std, &row.rho_std};
        for (int k = 0; k < 3; ++k) {
          *means[k] = sum[k] / used;
          const double var =
              used > 1 ? std::max(0.0, (sumsq[k] - sum[k] * sum[k] / used) / (used - 1)) : 0.0;
          *stds[k] = std::sqrt(var);
        }
      }
      if (op1_si >= 0 && schemes[si] != Scheme::Op1) {
        double base = 0.0, top = 0.0;
        int both = 0;
        for (int ci = 0; ci < cfg.n_channels; ++ci) {
          const TradeoffRecord& rb = at(ci, ri, si);
          const TradeoffRecord& ro = at(ci, ri, op1_si);
          if (!feasible(rb) || !feasible(ro)) continue;
          base += rb.p_re;
          top += ro.p_re;
          ++both;
        }
        if (both > 0 && base > 0.0) row.op1_gain_pct = (top - base) / base * 100.0;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

}  // namespace detail

inline void emit_csv(const std::vector<TradeoffRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "scheme,channel_index,rate_req,p_re,p_h,rho,mode,r_s,iterations\n";
  for (const TradeoffRecord& r : records) {
    out << r.scheme << ',' << r.channel_index << ',' << detail::format_double(r.rate_req) << ','
        << detail::format_double(r.p_re) << ',' << detail::format_double(r.p_h) << ','
        << detail::format_double(r.rho) << ',' << r.mode << ',' << r.r_s << ',' << r.iterations
        << '\n';
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

inline void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "scheme,rate_index,rate_req_mean,n_used,p_re_mean,p_re_std,p_h_mean,p_h_std,"
         "rho_mean,rho_std,op1_gain_pct\n";
  for (const SummaryRow& r : rows) {
    out << r.scheme << ',' << r.rate_index << ',' << detail::format_double(r.rate_req_mean) << ','
        << r.n_used << ',' << detail::format_double(r.p_re_mean) << ','
        << detail::format_double(r.p_re_std) << ',' << detail::format_double(r.p_h_mean) << ','
        << detail::format_double(r.p_h_std) << ',' << detail::format_double(r.rho_mean) << ','
        << detail::format_double(r.rho_std) << ',';
    if (std::isnan(r.op1_gain_pct))
      out << '\n';
    else
      out << detail::format_double(r.op1_gain_pct) << '\n';
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

inline std::vector<TradeoffRecord> parse_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "scheme,channel_index,rate_req,p_re,p_h,rho,mode,r_s,iterations")
    throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<TradeoffRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        f.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (f.size() != 9) throw std::runtime_error("malformed CSV row in " + path + ": " + line);
    TradeoffRecord r;
    r.scheme = f[0];
    r.channel_index = std::stoi(f[1]);
    r.rate_req = std::stod(f[2]);
    r.p_re = std::stod(f[3]);
    r.p_h = std::stod(f[4]);
    r.rho = std::stod(f[5]);
    r.mode = f[6];
    r.r_s = std::stoi(f[7]);
    r.iterations = std::stoi(f[8]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace swipt
