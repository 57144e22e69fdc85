#pragma once

// p-value based directional procedures: BH_dir, GR, Storey_dir and its
// bootstrap-tuned variant. Every procedure declares sgn(z_i) on rejection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dirfdr/decision.hpp"
#include "dirfdr/errors.hpp"
#include "dirfdr/null_models.hpp"
#include "dirfdr/rng.hpp"

namespace dirfdr {

namespace detail {

inline void require_level(double q, const char* name) {
  if (!(q > 0.0 && q < 1.0)) throw InputError(std::string(name) + " must lie in (0, 1)");
}

inline void require_pvalues(std::span<const double> p) {
  if (p.empty()) throw InputError("no p-values supplied");
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("p-values must lie in [0, 1]");
}

// Indices ordered by (p, index).
inline std::vector<std::size_t> order_by_pvalue(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

// {i : p_i <= p_(k)} for sorted order `order`, as ascending indices.
inline std::vector<std::size_t> rejections_up_to(std::span<const double> p, const std::vector<std::size_t>& order,
                                                 std::size_t k) {
  if (k == 0) return {};
  const double cut = p[order[k - 1]];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] <= cut) out.push_back(i);
  return out;
}

}  // namespace detail

// Step-up BH at `level`: k* = max{k : p_(k) <= k level / m}.
inline std::vector<std::size_t> step_up_rejections(std::span<const double> p, double level) {
  detail::require_pvalues(p);
  const auto order = detail::order_by_pvalue(p);
  const double m = static_cast<double>(p.size());
  std::size_t k_star = 0;
  for (std::size_t k = p.size(); k >= 1; --k) {
    if (p[order[k - 1]] <= static_cast<double>(k) * level / m) {
      k_star = k;
      break;
    }
  }
  return detail::rejections_up_to(p, order, k_star);
}

inline DecisionSet bh_dir(const ZSample& sample, double q) {
  detail::require_level(q, "q");
  const auto p = sample.pvalues();
  return DecisionSet::from_signs_of(step_up_rejections(p, q), sample.values());
}

// Guo-Romano procedure 6: BH_dir run at level 2q. Only valid when no theta is zero.
inline DecisionSet gr_procedure(const ZSample& sample, double q) {
  if (!(q > 0.0 && q < 0.5)) throw InputError("GR requires q in (0, 0.5) so that 2q < 1");
  const auto p = sample.pvalues();
  return DecisionSet::from_signs_of(step_up_rejections(p, 2.0 * q), sample.values());
}

struct StoreyConfig {
  double lambda = 0.5;
  double q = 0.1;

  void validate() const {
    detail::require_level(lambda, "lambda");
    detail::require_level(q, "q");
  }
};

// (#{p_i > lambda} + 1) / ((1 - lambda) m). Deliberately not capped at 1.
inline double storey_pi_hat(std::span<const double> p, double lambda) {
  detail::require_level(lambda, "lambda");
  if (p.empty()) throw InputError("no p-values supplied");
  const auto above = std::count_if(p.begin(), p.end(), [&](double x) { return x > lambda; });
  return (static_cast<double>(above) + 1.0) / ((1.0 - lambda) * static_cast<double>(p.size()));
}

// R(t) at t = sup{t : FDRhat_lambda(t) <= q}. FDRhat rises between
// consecutive p-values, so the sup falls in the segment starting at
// p_(k*), k* = max{k : p_(k) <= lambda, pi_hat m p_(k) / k <= q}.
inline std::vector<std::size_t> storey_rejections(std::span<const double> p, const StoreyConfig& cfg) {
  cfg.validate();
  detail::require_pvalues(p);
  const double pi_hat = storey_pi_hat(p, cfg.lambda);
  const auto order = detail::order_by_pvalue(p);
  const double m = static_cast<double>(p.size());
  std::size_t k_star = 0;
  for (std::size_t k = p.size(); k >= 1; --k) {
    const double pk = p[order[k - 1]];
    if (pk <= cfg.lambda && pi_hat * m * pk / static_cast<double>(k) <= cfg.q) {
      k_star = k;
      break;
    }
  }
  return detail::rejections_up_to(p, order, k_star);
}

inline DecisionSet storey_dir(const ZSample& sample, const StoreyConfig& cfg) {
  const auto p = sample.pvalues();
  return DecisionSet::from_signs_of(storey_rejections(p, cfg), sample.values());
}

// ---------------------------------------------------------------------------
// Bootstrap choice of lambda
// ---------------------------------------------------------------------------

inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
  return grid;
}

struct AutoLambdaConfig {
  std::size_t bootstraps = 1000;
  std::vector<double> grid = default_lambda_grid();
  std::uint64_t seed = 0;
};

struct LambdaSelection {
  double lambda = 0.5;
  std::vector<double> grid;    // as supplied
  std::vector<double> pi_hat;  // on the data, per grid value
  std::vector<double> mse;     // bootstrap MSE against min pi_hat, per grid value
};

// Each bootstrap replicate resamples the p-values once and evaluates every
// grid value on that same resample. Replicate b draws from the substream
// keyed (seed, b), so replicates are order-independent.
inline LambdaSelection select_lambda(std::span<const double> p, const AutoLambdaConfig& cfg) {
  detail::require_pvalues(p);
  if (cfg.grid.empty()) throw InputError("lambda grid is empty");
  if (cfg.bootstraps < 1) throw InputError("number of bootstrap samples must be at least 1");
  for (double l : cfg.grid) detail::require_level(l, "lambda grid value");

  const std::size_t m = p.size();
  const std::size_t g = cfg.grid.size();

  // Grid positions sorted by lambda value; bucket[i] = #{grid values < p_i}.
  std::vector<std::size_t> by_value(g);
  std::iota(by_value.begin(), by_value.end(), std::size_t{0});
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.grid[a] < cfg.grid[b]; });
  std::vector<double> sorted_grid(g);
  for (std::size_t j = 0; j < g; ++j) sorted_grid[j] = cfg.grid[by_value[j]];
  std::vector<std::size_t> bucket(m);
  for (std::size_t i = 0; i < m; ++i)
    bucket[i] = static_cast<std::size_t>(std::lower_bound(sorted_grid.begin(), sorted_grid.end(), p[i]) -
                                         sorted_grid.begin());

  // counts[j] = #{p > sorted_grid[j]} from a bucket histogram.
  auto counts_above = [&](const std::vector<std::size_t>& hist) {
    std::vector<std::size_t> above(g, 0);
    std::size_t run = 0;
    for (std::size_t j = g; j-- > 0;) {
      run += hist[j + 1];
      above[j] = run;
    }
    return above;
  };
  auto pi_from_count = [&](std::size_t count, double lambda) {
    return (static_cast<double>(count) + 1.0) / ((1.0 - lambda) * static_cast<double>(m));
  };

  std::vector<std::size_t> hist(g + 1, 0);
  for (std::size_t i = 0; i < m; ++i) ++hist[bucket[i]];
  const auto above_data = counts_above(hist);
  std::vector<double> pi_sorted(g);
  for (std::size_t j = 0; j < g; ++j) pi_sorted[j] = pi_from_count(above_data[j], sorted_grid[j]);
  const double pi_min = *std::min_element(pi_sorted.begin(), pi_sorted.end());

  std::vector<double> sse(g, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  for (std::size_t b = 0; b < cfg.bootstraps; ++b) {
    Rng rng = substream(cfg.seed, {static_cast<std::uint64_t>(StreamRole::Bootstrap), b});
    std::fill(hist.begin(), hist.end(), 0);
    for (std::size_t draw = 0; draw < m; ++draw) ++hist[bucket[pick(rng)]];
    const auto above = counts_above(hist);
    for (std::size_t j = 0; j < g; ++j) {
      const double d = pi_from_count(above[j], sorted_grid[j]) - pi_min;
      sse[j] += d * d;
    }
  }

  LambdaSelection out;
  out.grid = cfg.grid;
  out.pi_hat.resize(g);
  out.mse.resize(g);
  std::size_t best = 0;
  for (std::size_t j = 0; j < g; ++j) {
    const double mse = sse[j] / static_cast<double>(cfg.bootstraps);
    out.pi_hat[by_value[j]] = pi_sorted[j];
    out.mse[by_value[j]] = mse;
    if (mse < sse[best] / static_cast<double>(cfg.bootstraps)) best = j;  // strict: ties keep smaller lambda
  }
  out.lambda = sorted_grid[best];
  return out;
}

inline double auto_lambda(std::span<const double> p, const AutoLambdaConfig& cfg) {
  return select_lambda(p, cfg).lambda;
}

// Storey_dir with the bootstrap-selected lambda. Carries no FDR_dir guarantee.
inline DecisionSet astorey_dir(const ZSample& sample, double q, const AutoLambdaConfig& cfg) {
  detail::require_level(q, "q");
  const auto p = sample.pvalues();
  const double lambda = auto_lambda(p, cfg);
  return DecisionSet::from_signs_of(storey_rejections(p, StoreyConfig{lambda, q}), sample.values());
}

}  // namespace dirfdr
