#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "dirfdr/commands.hpp"

int main(int argc, char** argv) {
  using namespace dirfdr::cli;
  CLI::App app{"Directional FDR procedures: analysis, simulation, lambda selection, reports"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  std::vector<double> an_grid;
  auto* analyze = app.add_subcommand("analyze", "Run one procedure on a CSV of z-values");
  analyze->add_option("input", an.input, "CSV with columns id,z[,family,sigma,nu,alpha,beta]")->required();
  analyze->add_option("--method", an.method,
                      "bh-dir | gr | storey-dir | astorey-dir | zdirect | ash | lfsr-oracle")
      ->capture_default_str();
  analyze->add_option("--q", an.q, "Target FDR_dir level")->capture_default_str();
  analyze->add_option("--lambda", an.lambda, "Storey tuning parameter")->capture_default_str();
  analyze->add_option("--B", an.bootstraps, "Bootstrap samples for astorey-dir")->capture_default_str();
  analyze->add_option("--lambda-grid", an_grid, "Comma-separated lambda grid for astorey-dir")->delimiter(',');
  analyze->add_option("--seed", an.seed, "Bootstrap seed")->capture_default_str();
  analyze->add_option("--prior", an.prior, "w,xi,v of the generating prior (lfsr-oracle)");
  analyze->add_option("--out", an.out, "Output CSV (default stdout)");

  SimulateArgs sim;
  std::string sim_config;
  std::string sim_methods;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run the simulation study");
  simulate->add_option("config", sim_config, "key=value configuration file");
  simulate->add_flag("--desk-scale", sim.desk_scale, "Start from the reduced preset (m=200, reps=400)");
  auto* sim_methods_opt = simulate->add_option("--methods", sim_methods, "Comma-separated method list");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();

  SelectLambdaArgs sl;
  std::vector<double> sl_grid;
  auto* select = app.add_subcommand("select-lambda", "Bootstrap choice of the Storey lambda");
  select->add_option("input", sl.input, "CSV with columns id,z[,...]")->required();
  select->add_option("--B", sl.bootstraps, "Bootstrap samples")->capture_default_str();
  select->add_option("--lambda-grid", sl_grid, "Comma-separated lambda grid")->delimiter(',');
  select->add_option("--seed", sl.seed, "Bootstrap seed")->capture_default_str();

  ReportArgs rep;
  double rep_q = 0.1;
  auto* report = app.add_subcommand("report", "Render FDR_dir and TPR panel grids as SVG");
  report->add_option("input", rep.input, "Aggregate CSV written by simulate")->required();
  auto* rep_q_opt = report->add_option("--q", rep_q, "Target level drawn on the FDR_dir panels");
  report->add_option("--out", rep.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*analyze) {
    if (!an_grid.empty()) an.lambda_grid = an_grid;
    return cmd_analyze(an, std::cout, std::cerr);
  }
  if (*simulate) {
    if (!sim_config.empty()) sim.config = sim_config;
    if (*sim_methods_opt) sim.methods = sim_methods;
    if (*sim_seed_opt) sim.seed = sim_seed;
    return cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*select) {
    if (!sl_grid.empty()) sl.lambda_grid = sl_grid;
    return cmd_select_lambda(sl, std::cout, std::cerr);
  }
  if (*report) {
    if (*rep_q_opt) rep.q = rep_q;
    return cmd_report(rep, std::cout, std::cerr);
  }
  return kInputError;
}
