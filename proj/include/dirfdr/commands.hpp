#pragma once

// Command implementations behind the dirfdr executable. Each returns the
// process exit code: 0 ok, 1 input error, 2 internal error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dirfdr/errors.hpp"
#include "dirfdr/io.hpp"
#include "dirfdr/report.hpp"
#include "dirfdr/simulation.hpp"

namespace dirfdr::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kInternalError = 2 };

inline int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const std::invalid_argument& e) {  // InputError and its subclasses
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

// Writes through `fn` to `path`, or to `fallback` when path is empty.
inline void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  fn(out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline SimPrior parse_prior(const std::string& spec) {
  const auto v = io::parse_number_list(spec, "prior");
  if (v.size() != 3) throw InputError("--prior expects w,xi,v");
  SimPrior p{v[0], v[1], v[2]};
  p.validate();
  return p;
}

struct AnalyzeArgs {
  std::string input;
  std::string method = "bh-dir";
  double q = 0.1;
  double lambda = 0.5;
  std::size_t bootstraps = 1000;
  std::optional<std::vector<double>> lambda_grid;
  std::uint64_t seed = 20240101;
  std::optional<std::string> prior;
  std::string out;  // empty: stdout
};

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Method method = parse_method(a.method);
    std::optional<SimPrior> prior;
    if (a.prior) prior = parse_prior(*a.prior);
    auto in = open_input(a.input);
    const io::AnalysisInput data = io::read_analysis_input(in);
    MethodOptions opt;
    opt.storey_lambda = a.lambda;
    opt.bootstraps = a.bootstraps;
    if (a.lambda_grid) opt.lambda_grid = *a.lambda_grid;
    const DecisionSet d = run_method(method, data.sample, a.q, opt, prior, a.seed);
    with_output(a.out, out, [&](std::ostream& os) { io::write_decisions(os, data, d, a.method, a.q); });
  });
}

struct SimulateArgs {
  std::optional<std::string> config;
  bool desk_scale = false;
  std::optional<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::string out = ".";  // directory for reps.csv and summary.csv
};

inline SimConfig simulation_config(const SimulateArgs& a) {
  SimConfig cfg = a.desk_scale ? SimConfig::desk_scale() : SimConfig::full();
  if (a.config) {
    auto in = open_input(*a.config);
    io::apply_config(cfg, io::read_key_values(in));
  }
  if (a.methods) cfg.methods = io::parse_method_list(*a.methods);
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SimConfig cfg = simulation_config(a);
    std::filesystem::create_directories(a.out);
    const SimResult res = run_study(cfg);
    const auto dir = std::filesystem::path(a.out);
    with_output((dir / "reps.csv").string(), out, [&](std::ostream& os) { io::write_rep_csv(os, res); });
    with_output((dir / "summary.csv").string(), out, [&](std::ostream& os) { io::write_summary_csv(os, res); });
    out << "wrote " << res.reps.size() << " replication rows and " << res.summary.size() << " summary rows to "
        << a.out << '\n';
  });
}

struct SelectLambdaArgs {
  std::string input;
  std::size_t bootstraps = 1000;
  std::optional<std::vector<double>> lambda_grid;
  std::uint64_t seed = 20240101;
};

inline int cmd_select_lambda(const SelectLambdaArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto in = open_input(a.input);
    const io::AnalysisInput data = io::read_analysis_input(in);
    AutoLambdaConfig cfg;
    cfg.bootstraps = a.bootstraps;
    if (a.lambda_grid) cfg.grid = *a.lambda_grid;
    cfg.seed = a.seed;
    const auto p = data.sample.pvalues();
    const LambdaSelection sel = select_lambda(p, cfg);
    out << "lambda_hat=" << io::format_number(sel.lambda) << '\n';
    out << "lambda,pi_hat,mse\n";
    for (std::size_t j = 0; j < sel.grid.size(); ++j)
      out << io::format_number(sel.grid[j]) << ',' << io::format_number(sel.pi_hat[j]) << ','
          << io::format_number(sel.mse[j]) << '\n';
  });
}

struct ReportArgs {
  std::string input;
  std::optional<double> q;  // default: the table's q column, else 0.1
  std::string out = ".";
};

inline int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto in = open_input(a.input);
    const auto agg = report::parse_aggregate(io::read_csv(in));
    const double q = a.q.value_or(agg.q.value_or(0.1));
    std::filesystem::create_directories(a.out);
    const auto dir = std::filesystem::path(a.out);
    for (auto [metric, name] : {std::pair{report::PlotMetric::FdrDir, "fdr_dir.svg"},
                                std::pair{report::PlotMetric::Tpr, "tpr.svg"}}) {
      const std::string svg = report::render_svg(agg, metric, q);
      with_output((dir / name).string(), out, [&](std::ostream& os) { os << svg; });
    }
    out << "wrote fdr_dir.svg and tpr.svg to " << a.out << '\n';
  });
}

}  // namespace dirfdr::cli
