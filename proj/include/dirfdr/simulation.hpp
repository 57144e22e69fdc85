#pragma once

// Monte-Carlo harness: draws effects from the two-normal-plus-null prior,
// runs every requested procedure on the same data per replication and
// aggregates directional FDP and true-positive proportions.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dirfdr/classical.hpp"
#include "dirfdr/decision.hpp"
#include "dirfdr/errors.hpp"
#include "dirfdr/oracle.hpp"
#include "dirfdr/rng.hpp"
#include "dirfdr/zdirect.hpp"

namespace dirfdr {

enum class Method { BhDir, Gr, StoreyDir, AStoreyDir, ZDirect, Ash, LfsrOracle };

inline constexpr Method kAllMethods[] = {Method::BhDir,   Method::Gr,  Method::StoreyDir, Method::AStoreyDir,
                                         Method::ZDirect, Method::Ash, Method::LfsrOracle};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::BhDir: return "bh-dir";
    case Method::Gr: return "gr";
    case Method::StoreyDir: return "storey-dir";
    case Method::AStoreyDir: return "astorey-dir";
    case Method::ZDirect: return "zdirect";
    case Method::Ash: return "ash";
    case Method::LfsrOracle: return "lfsr-oracle";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (method_name(m) == name) return m;
  throw InputError("unknown method '" + std::string(name) + "'");
}

struct MethodOptions {
  double storey_lambda = 0.5;
  std::size_t bootstraps = 1000;
  std::vector<double> lambda_grid = default_lambda_grid();
  ZDirectConfig zdirect;
  AshConfig ash;
};

// Runs one procedure. `prior` is required by the oracle only; `seed` feeds
// the bootstrap of astorey-dir.
inline DecisionSet run_method(Method method, const ZSample& sample, double q, const MethodOptions& opt,
                              const std::optional<SimPrior>& prior = std::nullopt, std::uint64_t seed = 0) {
  switch (method) {
    case Method::BhDir: return bh_dir(sample, q);
    case Method::Gr: return gr_procedure(sample, q);
    case Method::StoreyDir: return storey_dir(sample, StoreyConfig{opt.storey_lambda, q});
    case Method::AStoreyDir: return astorey_dir(sample, q, AutoLambdaConfig{opt.bootstraps, opt.lambda_grid, seed});
    case Method::ZDirect: return zdirect(sample, q, opt.zdirect);
    case Method::Ash: return ash_procedure(sample, q, opt.ash);
    case Method::LfsrOracle:
      if (!prior) throw InputError("lfsr-oracle requires the generating prior");
      return lfsr_oracle(sample, *prior, q);
  }
  throw InputError("unknown method");
}

// ---------------------------------------------------------------------------
// Data generation and scoring
// ---------------------------------------------------------------------------

struct CellData {
  std::vector<double> thetas;
  ZSample sample;
};

// theta_i = 0 w.p. w, else N(+xi, 1) w.p. v and N(-xi, 1) otherwise;
// z_i = theta_i + N(0, 1).
inline CellData sample_cell(const SimPrior& prior, std::size_t m, Rng& rng) {
  prior.validate();
  if (m == 0) throw InputError("m must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> theta(m), z(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (unif(rng) < prior.w) {
      theta[i] = 0.0;
    } else {
      const double centre = unif(rng) < prior.v ? prior.xi : -prior.xi;
      theta[i] = centre + gauss(rng);
    }
    z[i] = theta[i] + gauss(rng);
  }
  return CellData{std::move(theta), ZSample::standard(std::move(z))};
}

struct Evaluation {
  double fdp_dir = 0.0;
  double tpp = 0.0;
  std::size_t n_true = 0;
  std::size_t n_rejected = 0;
  std::size_t n_nonnull = 0;  // #{theta_i != 0}, for sensitivity-style power
};

// A declaration is false iff sgn(theta_i) differs from the declared sign;
// any sign declared for theta_i = 0 is false.
inline Evaluation evaluate(const DecisionSet& decisions, std::span<const double> thetas) {
  Evaluation e;
  e.n_rejected = decisions.size();
  e.n_nonnull = static_cast<std::size_t>(std::count_if(thetas.begin(), thetas.end(), [](double t) { return t != 0.0; }));
  std::size_t n_false = 0;
  for (const auto& d : decisions.items()) {
    if (d.index >= thetas.size()) throw InputError("rejected index out of range of the effect vector");
    const double t = thetas[d.index];
    const bool correct = (t > 0.0 && d.sign == Sign::Positive) || (t < 0.0 && d.sign == Sign::Negative);
    if (correct) ++e.n_true; else ++n_false;
  }
  const double denom = static_cast<double>(std::max<std::size_t>(e.n_rejected, 1));
  e.fdp_dir = static_cast<double>(n_false) / denom;
  e.tpp = static_cast<double>(e.n_true) / denom;
  return e;
}

// ---------------------------------------------------------------------------
// Study configuration and results
// ---------------------------------------------------------------------------

struct SimConfig {
  std::size_t m = 1000;
  double q = 0.1;
  std::size_t reps = 1000;
  std::vector<double> w_values{0.8, 0.5, 0.2, 0.0};
  std::vector<double> xi_values{0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> v_values{0.5, 0.75, 1.0};
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::uint64_t seed = 20240101;
  MethodOptions options;
  std::size_t threads = 0;  // 0: DIRFDR_THREADS or hardware concurrency

  static SimConfig full() { return SimConfig{}; }

  static SimConfig desk_scale() {
    SimConfig c;
    c.m = 200;
    c.reps = 400;
    c.w_values = {0.8, 0.2, 0.0};
    c.xi_values = {1.0, 2.0, 2.5};
    c.v_values = {0.5, 1.0};
    return c;
  }

  void validate() const {
    if (m == 0) throw InputError("m must be positive");
    if (reps == 0) throw InputError("reps must be positive");
    if (!(q > 0.0 && q < 1.0)) throw InputError("q must lie in (0, 1)");
    if (w_values.empty() || xi_values.empty() || v_values.empty()) throw InputError("parameter grid is empty");
    if (methods.empty()) throw InputError("no methods requested");
    for (double w : w_values)
      for (double xi : xi_values)
        for (double v : v_values) SimPrior{w, xi, v}.validate();
  }

  std::vector<SimPrior> cells() const {
    std::vector<SimPrior> out;
    for (double w : w_values)
      for (double xi : xi_values)
        for (double v : v_values) out.push_back({w, xi, v});
    return out;
  }
};

// Substream key of a cell, derived from its parameter values so that a cell
// draws the same data whatever grid it is part of.
inline std::uint64_t cell_key(const SimPrior& p) {
  return stream_key(std::bit_cast<std::uint64_t>(p.w),
                    {std::bit_cast<std::uint64_t>(p.xi), std::bit_cast<std::uint64_t>(p.v)});
}

struct RepRecord {
  SimPrior cell;
  Method method;
  std::size_t rep;
  Evaluation eval;
  std::string error;  // nonempty when the method failed on this replication
};

struct CellSummary {
  SimPrior cell;
  Method method;
  double mean_fdr_dir = 0.0;
  double se_fdr_dir = 0.0;
  double mean_tpr = 0.0;
  double se_tpr = 0.0;
  double mean_rejected = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_errors = 0;
};

struct SimResult {
  double q = 0.1;
  std::vector<RepRecord> reps;        // ordered by cell, method, rep
  std::vector<CellSummary> summary;   // ordered by cell, method
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error sd / sqrt(n), sd with n - 1 denominator.
inline MeanSe mean_se(std::span<const double> x) {
  MeanSe r;
  r.n = x.size();
  if (x.empty()) return r;
  double s = 0.0;
  for (double v : x) s += v;
  r.mean = s / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(x.size() - 1)) / std::sqrt(static_cast<double>(x.size()));
  }
  return r;
}

inline std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  std::size_t n = std::max<unsigned>(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DIRFDR_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

inline std::vector<Evaluation> run_replication(const SimConfig& cfg, const SimPrior& cell, std::size_t rep,
                                               std::vector<std::string>& errors) {
  const std::uint64_t ck = cell_key(cell);
  Rng rng = substream(cfg.seed, {ck, rep, static_cast<std::uint64_t>(StreamRole::Data)});
  CellData data = sample_cell(cell, cfg.m, rng);
  const std::uint64_t boot_seed =
      stream_key(cfg.seed, {ck, rep, static_cast<std::uint64_t>(StreamRole::Bootstrap)});
  std::vector<Evaluation> out(cfg.methods.size());
  errors.assign(cfg.methods.size(), {});
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    try {
      out[k] = evaluate(run_method(cfg.methods[k], data.sample, cfg.q, cfg.options, cell, boot_seed), data.thetas);
    } catch (const std::exception& e) {
      errors[k] = e.what();
      if (errors[k].empty()) errors[k] = "method failed";
    }
  }
  return out;
}

// Replications run in parallel; results land in fixed slots and are
// aggregated in a fixed order, so output does not depend on thread count.
inline SimResult run_study(const SimConfig& cfg) {
  cfg.validate();
  const auto cells = cfg.cells();
  const std::size_t nm = cfg.methods.size();
  const std::size_t items = cells.size() * cfg.reps;
  std::vector<std::vector<Evaluation>> evals(items);
  std::vector<std::vector<std::string>> errors(items);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t it = next++; it < items; it = next++) {
      const std::size_t c = it / cfg.reps;
      const std::size_t r = it % cfg.reps;
      evals[it] = run_replication(cfg, cells[c], r, errors[it]);
    }
  };
  const std::size_t nthreads = std::min(worker_count(cfg.threads), items);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  SimResult res;
  res.q = cfg.q;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<double> fdp, tpp, nrej;
      CellSummary s{cells[c], cfg.methods[k]};
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        const std::size_t it = c * cfg.reps + r;
        RepRecord rec{cells[c], cfg.methods[k], r, evals[it][k], errors[it][k]};
        if (rec.error.empty()) {
          fdp.push_back(rec.eval.fdp_dir);
          tpp.push_back(rec.eval.tpp);
          nrej.push_back(static_cast<double>(rec.eval.n_rejected));
        } else {
          ++s.n_errors;
        }
        res.reps.push_back(std::move(rec));
      }
      const MeanSe f = mean_se(fdp), t = mean_se(tpp), n = mean_se(nrej);
      s.mean_fdr_dir = f.mean;
      s.se_fdr_dir = f.se;
      s.mean_tpr = t.mean;
      s.se_tpr = t.se;
      s.mean_rejected = n.mean;
      s.n_ok = f.n;
      res.summary.push_back(s);
    }
  }
  return res;
}

inline const CellSummary& find_summary(const SimResult& res, const SimPrior& cell, Method method) {
  for (const auto& s : res.summary)
    if (s.cell.w == cell.w && s.cell.xi == cell.xi && s.cell.v == cell.v && s.method == method) return s;
  throw InputError("no summary for the requested cell and method");
}

enum class Metric { FdpDir, Tpp, Sensitivity };

inline double metric_value(const Evaluation& e, Metric metric) {
  switch (metric) {
    case Metric::FdpDir: return e.fdp_dir;
    case Metric::Tpp: return e.tpp;
    case Metric::Sensitivity:
      return static_cast<double>(e.n_true) / static_cast<double>(std::max<std::size_t>(e.n_nonnull, 1));
  }
  return 0.0;
}

// Mean and standard error of the per-replication difference a - b, over
// replications where both methods succeeded.
inline MeanSe paired_difference(const SimResult& res, const SimPrior& cell, Method a, Method b, Metric metric) {
  auto pick = [&](Method m) {
    std::vector<std::optional<double>> v;
    for (const auto& r : res.reps)
      if (r.cell.w == cell.w && r.cell.xi == cell.xi && r.cell.v == cell.v && r.method == m) {
        if (r.rep >= v.size()) v.resize(r.rep + 1);
        if (r.error.empty()) v[r.rep] = metric_value(r.eval, metric);
      }
    return v;
  };
  const auto va = pick(a), vb = pick(b);
  std::vector<double> d;
  for (std::size_t r = 0; r < std::min(va.size(), vb.size()); ++r)
    if (va[r] && vb[r]) d.push_back(*va[r] - *vb[r]);
  return mean_se(d);
}

}  // namespace dirfdr
