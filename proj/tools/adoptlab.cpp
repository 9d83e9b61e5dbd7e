// adoptlab command line: one config file per run, CSV outputs plus a
// manifest that reproduces the run. Exit codes: 0 success, 1 validation
// error, 2 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "adoptlab/adoptlab.hpp"

namespace fs = std::filesystem;
using namespace adoptlab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

FullState resolve_initial(const RunConfig& cfg) {
  if (cfg.initialState) return *cfg.initialState;
  return initial_state({0.1, 0.8, 0.1}, cfg.params);
}

IntegrateOptions resolve_options(const RunConfig& cfg) {
  IntegrateOptions opt;
  opt.trustEnabled = cfg.flags.trustEnabled;
  opt.beliefTarget =
      optimal_reneging(cfg.trust, cfg.params.B).alphaActual;
  opt.coordEnabled = cfg.flags.coordEnabled;
  opt.seedFromROnly = cfg.flags.seedFromROnly;
  return opt;
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  Trajectory tr = integrate(resolve_initial(cfg), cfg.params,
                            cfg.integration, resolve_options(cfg));
  std::ofstream f(out / "trajectory.csv", std::ios::binary);
  write_trajectory_csv(f, tr, cfg.params);
  std::cout << "simulate: " << to_string(tr.classification) << ", corner "
            << static_cast<int>(tr.convergedCorner) << ", final xG "
            << format_double(tr.finalState.x.xG) << ", c "
            << format_double(tr.finalState.c) << ", "
            << tr.samples.size() << " samples -> trajectory.csv\n";
}

void cmd_equilibria(const RunConfig& cfg, const fs::path& out) {
  auto reports = all_equilibria(cfg.params, cfg.params.c0);
  std::ofstream f(out / "equilibria.csv", std::ios::binary);
  f << "kind,xG,xP,xR,eig1,eig2,stability,conditions\n";
  for (const auto& r : reports) {
    f << to_string(r.kind) << ',' << format_double(r.location.xG) << ','
      << format_double(r.location.xP) << ',' << format_double(r.location.xR)
      << ',' << format_double(r.eigenvalues[0]) << ','
      << format_double(r.eigenvalues[1]) << ',' << to_string(r.stability)
      << ',';
    for (size_t i = 0; i < r.conditionChecks.size(); ++i)
      f << (i ? ";" : "") << r.conditionChecks[i].first << '='
        << (r.conditionChecks[i].second ? 1 : 0);
    f << '\n';
  }
  std::cout << "equilibria: " << reports.size() << " rows -> equilibria.csv\n";
}

void write_basin_csv(const fs::path& path, const BasinMap& map) {
  std::ofstream f(path, std::ios::binary);
  f << "xG,xP,label,timeToConverge\n";
  for (const auto& cell : map.cells)
    f << format_double(cell.xG) << ',' << format_double(cell.xP) << ','
      << to_string(cell.label) << ',' << format_double(cell.timeToConverge)
      << '\n';
}

SweepVariable sweep_variable(const std::string& name) {
  if (name == "psiDev") return SweepVariable::PsiDev;
  if (name == "psiG") return SweepVariable::PsiG;
  if (name == "psiP") return SweepVariable::PsiP;
  if (name == "alpha") return SweepVariable::Alpha;
  if (name == "B") return SweepVariable::B;
  throw ValidationError("unknown basin sweep variable '" + name +
                        "' (expected psiDev, psiG, psiP, alpha or B)");
}

void cmd_basins(const RunConfig& cfg, const fs::path& out) {
  if (cfg.sweep) {
    BasinSweepResult sweep =
        basin_measure_sweep(cfg.params, sweep_variable(cfg.sweep->variable),
                            cfg.sweep->values, cfg.basinsResolution,
                            cfg.integration);
    std::ofstream f(out / "basin_sweep.csv", std::ios::binary);
    f << "variable,value,measureG,measureP,measureUnclassified,"
         "meanTimeToG,meanTimeToP\n";
    for (const auto& row : sweep.rows)
      f << to_string(sweep.variable) << ',' << format_double(row.value) << ','
        << format_double(row.map.measureG) << ','
        << format_double(row.map.measureP) << ','
        << format_double(row.map.measureUnclassified) << ','
        << format_double(row.meanTimeToG) << ','
        << format_double(row.meanTimeToP) << '\n';
    std::cout << "basins: " << sweep.rows.size()
              << " sweep rows -> basin_sweep.csv\n";
    return;
  }

  BasinMap map = map_basins(cfg.params, cfg.params.c0, cfg.basinsResolution,
                            cfg.integration);
  write_basin_csv(out / "basins.csv", map);
  std::ofstream f(out / "separatrix.csv", std::ios::binary);
  f << "xG,xP\n";
  for (const auto& pt : map.separatrix)
    f << format_double(pt[0]) << ',' << format_double(pt[1]) << '\n';
  std::cout << "basins: measureG " << format_double(map.measureG)
            << ", measureP " << format_double(map.measureP)
            << ", unclassified " << format_double(map.measureUnclassified)
            << " -> basins.csv, separatrix.csv\n";
}

void cmd_sweep_rho(const RunConfig& cfg, const fs::path& out) {
  RhoCritical rc = rho_critical(cfg.params, 0.005);
  {
    std::ofstream f(out / "rho_critical.csv", std::ios::binary);
    f << "closedForm,swept,agrees\n";
    f << format_double(rc.closedForm) << ','
      << (rc.swept ? format_double(*rc.swept) : std::string("")) << ','
      << (rc.agrees ? 1 : 0) << '\n';
  }
  {
    std::ofstream f(out / "rho_stability.csv", std::ios::binary);
    f << "rho,eigTowardGAtP,pStable\n";
    for (double rho = 0.0; rho <= 1.0 + 1e-12; rho += 0.005) {
      ModelParams withRho = cfg.params;
      withRho.rho = std::min(rho, 1.0);
      ModelParams q = apply_rho(withRho);
      double towardG = (-q.c0 + q.alpha * systemic_benefit(q.gamma, q) +
                        q.bG - q.psiDev) -
                       (q.bP - q.cP);
      f << format_double(std::min(rho, 1.0)) << ',' << format_double(towardG)
        << ',' << (towardG < 0.0 ? 1 : 0) << '\n';
    }
  }
  std::vector<double> grid;
  if (cfg.sweep && cfg.sweep->variable == "rho") {
    grid = cfg.sweep->values;
  } else {
    for (double r = 0.0; r <= 1.0 + 1e-12; r += 0.05)
      grid.push_back(std::min(r, 1.0));
  }
  ValueAdoptionCurve curve =
      value_adoption_curve(cfg.params, grid, cfg.integration);
  {
    std::ofstream f(out / "value_adoption.csv", std::ios::binary);
    f << "rho,systemicValue,eFinal,rawAdoption,deltaW,totalLoss,trapped,"
         "realisedLoss\n";
    for (const auto& row : curve.rows)
      f << format_double(row.rho) << ',' << format_double(row.systemicValue)
        << ',' << format_double(row.eFinal) << ','
        << format_double(row.rawAdoption) << ',' << format_double(row.deltaW)
        << ',' << format_double(row.totalLoss) << ',' << (row.trapped ? 1 : 0)
        << ',' << format_double(row.realisedLoss) << '\n';
  }
  std::cout << "sweep-rho: rho_c closed form "
            << format_double(rc.closedForm) << ", swept "
            << (rc.swept ? format_double(*rc.swept) : std::string("none"))
            << ", value curve correlation "
            << format_double(curve.valueAdoptionCorrelation)
            << " -> rho_critical.csv, rho_stability.csv, value_adoption.csv\n";
}

void write_trust_txt(const fs::path& path, const TrustReport& r,
                     bool trapDetected, bool trapEvaluated) {
  std::ofstream f(path, std::ios::binary);
  f << "deltaOpt=" << format_double(r.deltaOpt) << '\n';
  f << "alphaActual=" << format_double(r.alphaActual) << '\n';
  f << "betaStar=" << format_double(r.betaStar) << '\n';
  f << "willDefect=" << (r.willDefect ? 1 : 0) << '\n';
  f << "thetaStar=" << format_double(r.thetaStar) << '\n';
  f << "ratchetBeneficial=" << (r.ratchetBeneficial ? 1 : 0) << '\n';
  if (trapEvaluated) f << "trustTrap=" << (trapDetected ? 1 : 0) << '\n';
}

void cmd_trust(const RunConfig& cfg, const fs::path& out) {
  TrustReport report = trust_report(cfg.params, cfg.trust, cfg.params.c0);
  bool trap = detect_trust_trap(resolve_initial(cfg), cfg.params, cfg.trust,
                                cfg.integration);
  write_trust_txt(out / "trust.txt", report, trap, true);
  std::cout << "trust: beta* " << format_double(report.betaStar)
            << ", theta* " << format_double(report.thetaStar)
            << ", trap " << (trap ? "yes" : "no") << " -> trust.txt\n";
}

void cmd_policy(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.scenario)
    throw ValidationError("policy command requires a scenario section");
  PolicyScenario sc;
  sc.schedule = cfg.scenario->interventions;
  sc.initial = resolve_initial(cfg);
  sc.params = cfg.params;
  sc.tp = cfg.trust;
  sc.trustEnabled = cfg.scenario->trustEnabled;
  sc.seedFromROnly = cfg.flags.seedFromROnly;
  ScenarioResult r = run_scenario(sc, cfg.integration);

  {
    std::ofstream f(out / "trajectory.csv", std::ios::binary);
    write_trajectory_csv(f, r.trajectory, cfg.params);
  }
  {
    std::ofstream f(out / "welfare.txt", std::ios::binary);
    f << "deltaW=" << format_double(r.welfare.deltaW) << '\n';
    f << "totalLoss=" << format_double(r.welfare.totalLoss) << '\n';
    f << "effectiveAdoption=" << format_double(r.welfare.effectiveAdoption)
      << '\n';
    f << "rawAdoptionRate=" << format_double(r.welfare.rawAdoptionRate)
      << '\n';
    f << "premiseHolds=" << (r.welfare.premiseHolds ? 1 : 0) << '\n';
  }
  write_trust_txt(out / "trust.txt", r.trust, false, false);
  std::cout << "policy: " << to_string(r.trajectory.classification)
            << ", final xG "
            << format_double(r.trajectory.finalState.x.xG)
            << " -> trajectory.csv, welfare.txt, trust.txt\n";
}

int cmd_verify_all(const fs::path& out) {
  auto results = run_all_criteria();
  std::ofstream f(out / "criteria.csv", std::ios::binary);
  f << "id,name,pass,seconds,detail\n";
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id << ": "
              << r.name << " (" << format_double(r.seconds) << "s)"
              << (r.pass ? "" : " -- " + r.detail) << '\n';
    f << r.id << ',' << r.name << ',' << (r.pass ? 1 : 0) << ','
      << format_double(r.seconds) << ",\"" << r.detail << "\"\n";
    if (!r.pass) ++failures;
  }
  std::cout << (results.size() - failures) << '/' << results.size()
            << " criteria passed -> criteria.csv\n";
  return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"adoptlab: three-strategy adoption dynamics toolkit"};
  app.require_subcommand(1);

  const std::vector<std::string> names = {"simulate",  "basins", "equilibria",
                                          "sweep-rho", "trust",  "policy",
                                          "verify-all"};
  std::string configPath;
  std::string outOverride;
  for (const auto& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    auto* c = sub->add_option("--config", configPath, "run configuration (JSON)");
    if (name != "verify-all") c->required();
    sub->add_option("--out", outOverride, "output directory override");
  }

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig cfg;
    if (!configPath.empty()) cfg = parse_config(read_file(configPath));
    if (!outOverride.empty()) cfg.outputDir = outOverride;
    fs::path out(cfg.outputDir);
    fs::create_directories(out);

    int code = 0;
    if (command == "simulate") cmd_simulate(cfg, out);
    else if (command == "equilibria") cmd_equilibria(cfg, out);
    else if (command == "basins") cmd_basins(cfg, out);
    else if (command == "sweep-rho") cmd_sweep_rho(cfg, out);
    else if (command == "trust") cmd_trust(cfg, out);
    else if (command == "policy") cmd_policy(cfg, out);
    else code = cmd_verify_all(out);

    double wall = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    write_file((out / "manifest.json").string(),
               make_manifest(cfg, command, wall));
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "{\"error\": \"validation\", \"message\": \"" << e.what()
              << "\"}\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "{\"error\": \"numerical\", \"message\": \"" << e.what()
              << "\"}\n";
    return 2;
  }
}
