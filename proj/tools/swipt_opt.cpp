// Command-line front end: seeded sweeps to CSV, single-instance solves as
// JSON, and the brute-force grid cross-check.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <swipt/swipt.hpp>

namespace {

using nlohmann::json;

json solution_to_json(const swipt::JointSolution& sol) {
  json j;
  j["mode"] = swipt::mode_name(sol.mode);
  j["rho"] = sol.rho;
  j["powers"] = sol.powers;
  j["mu"] = sol.mu;
  j["nu"] = sol.nu;
  j["p_re_watts"] = sol.p_re;
  j["rate_achieved"] = sol.rate_achieved;
  j["r_s"] = sol.r_s;
  j["iterations"] = sol.iterations;
  return j;
}

struct SolveArgs {
  int n = 2;
  double theta = 0.1;
  double sigma2_dbm = -100.0;
  double p_t = 10.0;
  double rate = 0.0;
  std::uint64_t seed = 1;
  double tol = 1e-4;
  std::string scheme = "op1";
  int dps_grid = 101;
  int oracle_grid = 401;
};

void add_instance_options(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("--n", a.n, "Antennas per side (square channel)")->check(CLI::Range(1, 8));
  cmd->add_option("--theta", a.theta, "Per-entry channel scale")->check(CLI::PositiveNumber);
  cmd->add_option("--sigma2-dbm", a.sigma2_dbm, "Noise power in dBm");
  cmd->add_option("--pt", a.p_t, "Transmit power budget in watts")->check(CLI::PositiveNumber);
  cmd->add_option("--rate", a.rate, "Minimum rate in bps/Hz")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "Channel seed");
  cmd->add_option("--tol", a.tol, "Search tolerance");
}

int run_instance(const SolveArgs& a, swipt::Scheme scheme, bool with_oracle) {
  const swipt::ChannelMatrix h = swipt::generate_channel(a.n, a.n, a.theta, a.seed);
  const swipt::ChannelDecomposition dec = swipt::decompose(h);
  swipt::SystemParams params;
  params.p_t = a.p_t;
  params.sigma2 = swipt::dbm_to_watts(a.sigma2_dbm);
  params.rate_req = a.rate;
  params.tol = a.tol;
  swipt::ExperimentConfig cfg;  // carries the grid sizes for dps/oracle dispatch
  cfg.n = a.n;
  cfg.rate_grid = {a.rate};
  cfg.dps_grid_points = a.dps_grid;
  cfg.oracle_grid_points = a.oracle_grid;

  json out;
  out["scheme"] = swipt::scheme_name(scheme);
  out["n"] = a.n;
  out["seed"] = a.seed;
  out["rate_req"] = a.rate;
  out["sigma2_watts"] = params.sigma2;
  const swipt::JointSolution sol = swipt::detail::dispatch_scheme(scheme, h, dec, params, cfg);
  out["solution"] = solution_to_json(sol);
  if (with_oracle) {
    const swipt::JointSolution ref = swipt::oracle_grid_2x2(h, params, a.oracle_grid);
    out["oracle"] = solution_to_json(ref);
    out["oracle_grid_points"] = a.oracle_grid;
    if (ref.mode != swipt::Mode::Infeasible && ref.p_re > 0.0)
      out["rel_diff"] = (sol.p_re - ref.p_re) / ref.p_re;
  }
  std::printf("%s\n", out.dump(2).c_str());
  return sol.mode == swipt::Mode::Infeasible ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint transmit-covariance and power-splitting optimizer"};
  app.require_subcommand(1);

  std::string config_path, out_path, summary_path;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a seeded Monte-Carlo sweep to CSV");
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  sweep->add_option("--out", out_path, "Output CSV for per-instance records")->required();
  sweep->add_option("--summary", summary_path, "Optional CSV for per-rate aggregates");

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Solve one seeded instance, print JSON");
  add_instance_options(solve, sa);
  solve->add_option("--scheme", sa.scheme, "One of op1 op2 op1_hisnr op2_hisnr ops otcm dps oracle");
  solve->add_option("--dps-grid", sa.dps_grid, "Grid points per split axis for dps")
      ->check(CLI::Range(11, 100000));
  solve->add_option("--oracle-grid", sa.oracle_grid, "Grid points per axis for oracle")
      ->check(CLI::Range(11, 100000));

  SolveArgs oa;
  CLI::App* oracle = app.add_subcommand("oracle", "Compare the joint solver with the 2x2 grid");
  add_instance_options(oracle, oa);
  oracle->add_option("--grid", oa.oracle_grid, "Grid points per axis")
      ->check(CLI::Range(11, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (sweep->parsed()) {
      const swipt::ExperimentConfig cfg = swipt::parse_config_file(config_path);
      const std::vector<swipt::TradeoffRecord> records = swipt::run_sweep(cfg);
      swipt::emit_csv(records, out_path);
      if (!summary_path.empty()) swipt::emit_csv(swipt::summarize(records, cfg), summary_path);
      std::fprintf(stderr, "wrote %zu records to %s\n", records.size(), out_path.c_str());
      return 0;
    }
    if (solve->parsed()) return run_instance(sa, swipt::scheme_from_name(sa.scheme), false);
    return run_instance(oa, swipt::Scheme::Op1, true);
  } catch (const swipt::infeasible_error& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 1;
  } catch (const swipt::numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return 3;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
