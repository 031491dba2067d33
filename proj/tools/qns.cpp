// qns: config-driven pseudo-spectral runs of the barotropic quantum
// Navier-Stokes system with cold pressure, plus the verification harnesses.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure (vacuum,
// NaN), 3 check-threshold failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "qns/io.hpp"

namespace fs = std::filesystem;
using namespace qns;

namespace {

template <class T>
std::vector<T> parse_list(const std::string& csv, const char* what) {
  std::vector<T> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      if constexpr (std::is_same_v<T, int>)
        out.push_back(std::stoi(item));
      else
        out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
  return out;
}

int cmd_run(const std::string& config_path) {
  ConfigFile cfg = parse_config(config_path);
  Trajectory traj = simulate(cfg.run);
  fs::create_directories(cfg.output.directory);
  NormExponents exps = NormExponents::from_k(cfg.run.physics.cold_k);
  if (cfg.output.csv)
    write_diagnostics_csv(cfg.output.directory + "/diagnostics.csv", traj.records, exps);
  if (cfg.output.json) {
    nlohmann::json j;
    j["kind"] = "run";
    j["failed"] = traj.failed;
    if (traj.failed) j["failure_reason"] = traj.failure_reason;
    j["events"] = traj.events;
    j["initial_mass"] = traj.initial_mass;
    j["final_time"] = traj.records.back().time;
    j["bochner_norms"] = traj.bochner;
    if (cfg.run.formulation == SystemForm::eqw && cfg.run.physics.eps0() < 0.0)
      j["regime"] = "construction";  // eps < nu: signed eps0 retained
    write_json(cfg.output.directory + "/run.json", j);
  }
  if (cfg.output.snapshots) {
    const SimState& last = traj.snapshots.back();
    if (last.n.grid().dim() == 1)
      write_snapshot_csv(cfg.output.directory + "/final_state.csv", last);
    else
      write_snapshot_binary(cfg.output.directory + "/final_state.bin", last);
  }
  for (const auto& e : traj.events) std::cerr << "event: " << e << "\n";
  if (traj.failed) {
    std::cerr << "run failed: " << traj.failure_reason << "\n";
    return 2;
  }
  std::cout << "run complete: t=" << format_double(traj.records.back().time)
            << " energy=" << format_double(traj.records.back().energy)
            << " records=" << traj.records.size() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& eps_csv,
              const std::string& galerkin_csv, const std::string& delta_csv) {
  const int given = int(!eps_csv.empty()) + int(!galerkin_csv.empty()) + int(!delta_csv.empty());
  if (given != 1)
    throw ValidationError("sweep: pass exactly one of --eps, --galerkin, --delta");
  ConfigFile cfg = parse_config(config_path);
  fs::create_directories(cfg.output.directory);
  if (!eps_csv.empty()) {
    auto eps = parse_list<double>(eps_csv, "--eps");
    GridPtr g = make_grid(cfg.run.grid.dim, cfg.run.grid.points, cfg.run.grid.length);
    SweepReport report =
        epsilon_sweep(cfg.run, eps, default_test_function(g, cfg.run.final_time));
    write_json(cfg.output.directory + "/report.json", to_json(report));
    write_sweep_csv(cfg.output.directory + "/table.csv", report);
    std::cout << "sweep complete: slope_all=" << format_double(report.slope_all)
              << " slope_tail=" << format_double(report.slope_tail) << "\n";
  } else if (!galerkin_csv.empty()) {
    RefinementReport report = galerkin_study(cfg.run, parse_list<int>(galerkin_csv, "--galerkin"));
    write_json(cfg.output.directory + "/report.json", to_json(report));
    write_refinement_csv(cfg.output.directory + "/table.csv", report);
    std::cout << "galerkin study complete: " << report.levels.size() << " levels\n";
  } else {
    RefinementReport report = delta_study(cfg.run, parse_list<double>(delta_csv, "--delta"));
    write_json(cfg.output.directory + "/report.json", to_json(report));
    write_refinement_csv(cfg.output.directory + "/table.csv", report);
    std::cout << "delta study complete: " << report.levels.size() << " levels\n";
  }
  return 0;
}

int cmd_check(int resolution) {
  bool ok = true;
  auto verdict = [&](const char* what, bool pass, double value, double bound) {
    std::printf("%-28s %s  (%.3e vs %.1e)\n", what, pass ? "pass" : "FAIL", value, bound);
    ok = ok && pass;
  };

  std::vector<int> ms = {32, 64};
  if (resolution != 32 && resolution != 64) ms.push_back(resolution);
  std::vector<IdentityReport> reports;
  for (int m : ms) reports.push_back(identity_battery(m));
  const IdentityReport& fine = reports.back();
  verdict("bohm identity", fine.max_bohm <= 1e-8, fine.max_bohm, 1e-8);
  bool decreasing = true;
  for (std::size_t i = 1; i < reports.size(); ++i)
    decreasing = decreasing && reports[i].max_bohm < reports[i - 1].max_bohm;
  verdict("bohm refinement", decreasing, fine.max_bohm, reports.front().max_bohm);
  verdict("weak/strong pairing", fine.max_weak_vs_strong <= 1e-8, fine.max_weak_vs_strong, 1e-8);
  verdict("entropy decomposition", fine.max_entropy_identity <= 1e-10,
          fine.max_entropy_identity, 1e-10);

  RunConfig cfg;
  cfg.grid = {1, 64, 1.0};
  cfg.physics.nu = 0.1;
  cfg.physics.eps = 0.05;
  cfg.initial = {"cosine_bump", 2.0, 0.5, 0.3, 0.1, 4, 1};
  cfg.final_time = 0.02;
  cfg.dt = 2e-4;
  BalanceRefinement bal = balance_refinement(cfg, 3);
  const double e_rate = bal.energy_residuals.front() / bal.energy_residuals.back();
  const double b_rate = bal.bd_residuals.front() / bal.bd_residuals.back();
  verdict("energy balance refinement", e_rate >= 9.0, e_rate, 9.0);
  verdict("bd balance refinement", b_rate >= 9.0, b_rate, 9.0);
  std::printf("identified energy dissipation prefactor: %s\n",
              bal.identified_kappa > 1.5 * cfg.physics.nu ? "2*nu" : "nu");
  return ok ? 0 : 3;
}

int cmd_norms(const std::string& config_path) {
  ConfigFile cfg = parse_config(config_path);
  RunConfig run = cfg.run;
  run.final_time = 0.0;
  Trajectory traj = simulate(run);
  NormExponents exps = NormExponents::from_k(run.physics.cold_k);
  const auto header = diagnostics_header(exps);
  const DiagnosticsRecord& r = traj.records.front();
  std::vector<double> values = {r.time,       r.mass,           r.energy,
                                r.energy_dissipation, r.energy_residual, r.bd_entropy,
                                r.bd_dissipation,     r.bd_residual,     r.min_n,
                                r.max_n};
  for (const auto& col : dashboard_columns(exps)) values.push_back(r.*(col.member));
  for (std::size_t i = 0; i < header.size(); ++i)
    std::printf("%-24s %s\n", header[i].c_str(), format_double(values[i]).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral quantum Navier-Stokes laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one simulation from a config file");
  run->add_option("config", config_path, "config file")->required();

  std::string sweep_config, eps_csv, galerkin_csv, delta_csv;
  auto* sweep = app.add_subcommand("sweep", "parameter sweep (one of --eps/--galerkin/--delta)");
  sweep->add_option("config", sweep_config, "config file")->required();
  sweep->add_option("--eps", eps_csv, "descending comma list of eps values");
  sweep->add_option("--galerkin", galerkin_csv, "increasing comma list of mode caps");
  sweep->add_option("--delta", delta_csv, "descending comma list of delta values");

  int resolution = 128;
  auto* check = app.add_subcommand("check", "identity battery and balance audit");
  check->add_option("--resolution", resolution, "finest grid resolution (default 128)");

  std::string norms_config;
  auto* norms = app.add_subcommand("norms", "print the dashboard for the initial condition");
  norms->add_option("config", norms_config, "config file")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path);
    if (sweep->parsed()) return cmd_sweep(sweep_config, eps_csv, galerkin_csv, delta_csv);
    if (check->parsed()) return cmd_check(resolution);
    if (norms->parsed()) return cmd_norms(norms_config);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
