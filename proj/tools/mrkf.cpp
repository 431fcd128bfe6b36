// mrkf: design / verify / simulate / sweep front end.
//
// Exit codes:
//   0  success
//   1  usage / CLI error
//   2  config or gain-file parse error
//   3  dimension or model validation error
//   4  design infeasible
//   5  cyclic pair unobservable
//   6  solver numerical failure
//   7  verification checks failed
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrkf/design.hpp"
#include "mrkf/io.hpp"
#include "mrkf/riccati.hpp"
#include "mrkf/sim.hpp"

namespace {

using namespace mrkf;

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitDimension = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitUnobservable = 5;
constexpr int kExitNumerical = 6;
constexpr int kExitVerifyFailed = 7;

std::string design_label(const DesignSpec& spec) {
  std::string label = spec.Gamma.size() > 0 ? "weighted" : "optimal";
  if (spec.pole_radius) label += "+pole";
  if (spec.l2_bound) label += "+l2";
  return label;
}

int run_design(const std::string& config_path, const std::string& out_path) {
  ConfigFile cfg = load_config(config_path);
  CyclicSystem cs = build_cyclic(cfg.model);
  RankReport rr = cyclic_rank_report(cs);
  ObservabilityReport obs = observability_matrix(cs);
  std::printf("cyclic system: N=%d n=%d q=%d, rank(R_cyc)=%d/%d%s\n", cs.N,
              cs.n, cs.q, rr.rank_R, cs.nq(),
              rr.is_definite ? "" : " (semidefinite)");
  std::printf("observability: rank %d/%d, cond %s\n", obs.rank, cs.nn(),
              format6(obs.cond).c_str());

  FilterDesign fd = design(cfg.model, cfg.design);
  std::printf("status: optimal in %d iterations\n", fd.iterations);
  std::printf("trace(W) = %s\n", format6(fd.objective).c_str());
  std::printf("spectral radius = %s\n",
              format6(fd.verification.spectral_radius).c_str());
  std::printf("gain recovery residual = %s\n",
              format6(fd.verification.gain_recovery_residual).c_str());
  std::printf("LMI min eigenvalue = %s\n",
              format6(fd.verification.lmi_min_eig).c_str());
  if (fd.verification.pole_margin)
    std::printf("pole margin = %s\n",
                format6(*fd.verification.pole_margin).c_str());

  if (cfg.model.N() == 1) {
    DareResult dare = dare_fixed_point(cfg.model.sys.A, cs.Ccyc,
                                       cfg.model.noise.Q, cs.Rcyc());
    const double gap = (fd.gains.periodic[0] - dare.L_ss).norm();
    std::printf("stationary case: DARE gain gap = %s\n", format6(gap).c_str());
  }

  const std::string path = !out_path.empty() ? out_path : cfg.gains_path;
  if (!path.empty()) {
    save_gains(gain_file_from_design(fd, design_label(cfg.design)), path);
    std::printf("gains written to %s\n", path.c_str());
  }
  return 0;
}

int run_verify(const std::string& config_path, const std::string& gains_path) {
  ConfigFile cfg = load_config(config_path);
  GainFile gf = load_gains(gains_path);
  const MultirateModel& m = cfg.model;
  if (gf.n != m.n() || gf.q != m.q() || gf.N != m.N())
    throw DimensionMismatch("gain file dimensions do not match config");

  CyclicGain gains;
  gains.periodic = gf.gains;
  CyclicSystem cs = build_cyclic(m);
  gains.Lcyc = embed_periodic_gains(gains.periodic, cs.n, cs.q);

  bool all_ok = true;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%-28s %s  (%s)\n", name, ok ? "PASS" : "FAIL", detail.c_str());
    all_ok = all_ok && ok;
  };

  const double rho = spectral_radius(cs.Acyc - gains.Lcyc * cs.Ccyc);
  report("stability", rho < 1.0, "spectral radius " + format6(rho));

  const double ident = spectral_radius_identity_check(m, cs, gains);
  report("spectral identity", ident < 1e-8, "residual " + format6(ident));

  if (cfg.design.pole_radius) {
    const double rbar = *cfg.design.pole_radius;
    report("pole constraint", rho <= rbar + 1e-6,
           format6(rho) + " <= rbar " + format6(rbar));
  }

  if (cfg.design.l2_bound) {
    const Matrix cz =
        cfg.design.Cz.size() > 0 ? cfg.design.Cz : default_cz(m.n());
    const double achieved = verify_l2_norm(m, gains, cz, cfg.design.alpha);
    report("l2 constraint", achieved <= *cfg.design.l2_bound * (1 + 1e-3),
           "achieved " + format6(achieved) + " <= bound " +
               format6(*cfg.design.l2_bound));
  }

  RiccatiTrace oracle = periodic_riccati(m, Matrix::Identity(m.n(), m.n()));
  double max_gap = 0.0;
  for (int k = 0; k < m.N(); ++k)
    max_gap = std::max(max_gap, (gains.periodic[k] - oracle.gains[k]).norm());
  report("oracle gain gap", max_gap < 1e-4, "max gap " + format6(max_gap));

  return all_ok ? 0 : kExitVerifyFailed;
}

int run_simulate(const std::string& config_path, const std::string& gains_path,
                 const std::string& out_path, std::uint64_t seed, int runs) {
  ConfigFile cfg = load_config(config_path);
  GainFile gf = load_gains(gains_path);
  const MultirateModel& m = cfg.model;
  if (gf.n != m.n() || gf.q != m.q() || gf.N != m.N())
    throw DimensionMismatch("gain file dimensions do not match config");

  CyclicGain gains;
  gains.periodic = gf.gains;
  ScenarioConfig scenario = cfg.scenario;
  if (seed != 0) scenario.seed = seed;
  const int warmup = std::min(2 * m.N(), scenario.horizon - 1);

  Vector mean_rmse = Vector::Zero(m.n());
  SimulationRun first;
  std::uint64_t sm = scenario.seed;
  for (int r = 0; r < runs; ++r) {
    ScenarioConfig sc = scenario;
    sc.seed = runs == 1 ? scenario.seed : detail::splitmix64(sm);
    SimulationRun run = simulate(m, gains, sc);
    if (r == 0) first = run;
    mean_rmse += rmse(run, warmup);
  }
  mean_rmse /= runs;
  std::printf("runs = %d, horizon = %d, warmup = %d\n", runs,
              scenario.horizon, warmup);
  for (int i = 0; i < m.n(); ++i)
    std::printf("RMSE[%d] = %s\n", i + 1, format6(mean_rmse(i)).c_str());

  const std::string path = !out_path.empty() ? out_path : cfg.timeseries_path;
  if (!path.empty()) {
    write_timeseries_csv(first, path);
    std::printf("time series written to %s\n", path.c_str());
  }
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& param,
              const std::vector<double>& grid, const std::string& out_path) {
  ConfigFile cfg = load_config(config_path);
  if (param != "pole_radius" && param != "l2_bound")
    throw ConfigParseError("--param must be pole_radius or l2_bound");

  std::ostringstream csv;
  csv << param << ",trace,spectral_radius,status\r\n";
  for (double value : grid) {
    DesignSpec spec = cfg.design;
    if (param == "pole_radius")
      spec.pole_radius = value;
    else
      spec.l2_bound = value;
    std::string status = "optimal";
    double trace = 0.0, rho = 0.0;
    try {
      FilterDesign fd = design(cfg.model, spec);
      trace = fd.objective;
      rho = fd.verification.spectral_radius;
    } catch (const Infeasible&) {
      status = "infeasible";
    } catch (const std::exception&) {
      status = "failed";
    }
    csv << format6(value) << ',';
    if (status == "optimal")
      csv << format6(trace) << ',' << format6(rho);
    else
      csv << ',';
    csv << ',' << status << "\r\n";
    std::printf("%s=%s  %s  trace=%s  rho=%s\n", param.c_str(),
                format6(value).c_str(), status.c_str(),
                format6(trace).c_str(), format6(rho).c_str());
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigParseError("cannot write CSV \"" + out_path + "\"");
    out << csv.str();
    std::printf("sweep written to %s\n", out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multirate steady-state Kalman filter design toolkit"};
  app.require_subcommand(1);

  std::string config_path, gains_path, out_path, param;
  std::vector<double> grid;
  std::uint64_t seed = 0;
  int runs = 1;

  CLI::App* cmd_design = app.add_subcommand("design", "Solve the LMI design");
  cmd_design->add_option("--config", config_path, "Config file")->required();
  cmd_design->add_option("--out", out_path, "Gain file output path");

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "Verify a gain file against a config");
  cmd_verify->add_option("--config", config_path, "Config file")->required();
  cmd_verify->add_option("--gains", gains_path, "Gain file")->required();

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Simulate the estimator");
  cmd_simulate->add_option("--config", config_path, "Config file")->required();
  cmd_simulate->add_option("--gains", gains_path, "Gain file")->required();
  cmd_simulate->add_option("--out", out_path, "Time-series CSV path");
  cmd_simulate->add_option("--seed", seed, "Master seed override");
  cmd_simulate->add_option("--runs", runs, "Monte-Carlo run count")
      ->check(CLI::PositiveNumber);

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Parameter sweep");
  cmd_sweep->add_option("--config", config_path, "Config file")->required();
  cmd_sweep->add_option("--param", param, "pole_radius or l2_bound")
      ->required();
  cmd_sweep->add_option("--grid", grid, "Grid values")
      ->required()
      ->delimiter(',');
  cmd_sweep->add_option("--out", out_path, "Sweep CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_design->parsed()) return run_design(config_path, out_path);
    if (cmd_verify->parsed()) return run_verify(config_path, gains_path);
    if (cmd_simulate->parsed())
      return run_simulate(config_path, gains_path, out_path, seed, runs);
    if (cmd_sweep->parsed())
      return run_sweep(config_path, param, grid, out_path);
  } catch (const ConfigParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const Unobservable& e) {
    std::fprintf(stderr, "unobservable: %s\n", e.what());
    return kExitUnobservable;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDimension;
  }
  return 1;
}
