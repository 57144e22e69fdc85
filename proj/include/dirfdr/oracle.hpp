#pragma once

// Local-false-sign-rate procedures: the oracle that knows the generating
// prior, the matching sign rule, and the ASH-style variant that plugs in a
// unimodal prior fitted to the full, unmasked data.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "dirfdr/decision.hpp"
#include "dirfdr/errors.hpp"
#include "dirfdr/mixture.hpp"
#include "dirfdr/null_models.hpp"

namespace dirfdr {

// g(theta) = w delta_0 + (1 - w) [(1 - v) N(-xi, 1) + v N(xi, 1)]
struct SimPrior {
  double w = 0.5;
  double xi = 1.0;
  double v = 0.5;

  void validate() const {
    if (!(w >= 0.0 && w <= 1.0)) throw InputError("prior null mass w must lie in [0, 1]");
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("prior asymmetry v must lie in [0, 1]");
    if (!(xi > 0.0) || !std::isfinite(xi)) throw InputError("prior signal size xi must be positive");
  }
};

// Exact posterior sign probabilities for z ~ N(theta, 1) under SimPrior.
// In the N(+-xi, 1) components theta | z ~ N((z +- xi) / 2, 1/2).
inline SignPosterior true_sign_posterior(double z, const SimPrior& prior) {
  const double r2 = std::numbers::sqrt2;
  const double c0 = prior.w * normal_pdf(z);
  const double cn = (1.0 - prior.w) * (1.0 - prior.v) * normal_pdf((z + prior.xi) / r2) / r2;
  const double cp = (1.0 - prior.w) * prior.v * normal_pdf((z - prior.xi) / r2) / r2;
  // standardised posterior means of the two normal components
  const double sn = (z - prior.xi) / r2;
  const double sp = (z + prior.xi) / r2;
  const double neg = cn * normal_sf(sn) + cp * normal_sf(sp);
  const double pos = cn * normal_cdf(sn) + cp * normal_cdf(sp);
  const double total = c0 + cn + cp;
  if (!(total > 0.0)) throw DegenerateLikelihoodError("marginal density of z is zero under the prior");
  return {neg / total, c0 / total, pos / total};
}

inline double true_lfsr(double z, const SimPrior& prior) { return true_sign_posterior(z, prior).lfsr(); }

// Declare the sign with the larger posterior probability; ties declare +.
inline Sign odp_sign(double p_neg, double p_pos) { return p_pos < p_neg ? Sign::Negative : Sign::Positive; }

// Largest j with mean(lfsr_(1..j)) <= q; rejects {i : lfsr_i <= lfsr_(j)}.
inline std::vector<std::size_t> lfsr_threshold(std::span<const double> lfsrs, double q) {
  std::vector<std::size_t> order(lfsrs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lfsrs[a] < lfsrs[b]; });
  std::size_t j = 0;
  double running = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    running += lfsrs[order[k]];
    if (running / static_cast<double>(k + 1) <= q) j = k + 1;
  }
  if (j == 0) return {};
  const double cut = lfsrs[order[j - 1]];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lfsrs.size(); ++i)
    if (lfsrs[i] <= cut) out.push_back(i);
  return out;
}

namespace detail {

inline DecisionSet decide_from_posteriors(std::span<const SignPosterior> post, std::span<const double> z, double q,
                                          bool tie_follows_z) {
  std::vector<double> lfsr(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) lfsr[i] = post[i].lfsr();
  std::vector<Discovery> items;
  for (std::size_t i : lfsr_threshold(lfsr, q)) {
    Sign s = odp_sign(post[i].negative, post[i].positive);
    if (tie_follows_z && post[i].negative == post[i].positive) s = sign_of(z[i]);
    items.push_back({i, s});
  }
  return DecisionSet(std::move(items));
}

}  // namespace detail

// Oracle benchmark; needs the true prior and unit-variance normal noise.
inline DecisionSet lfsr_oracle(const ZSample& sample, const SimPrior& prior, double q) {
  prior.validate();
  if (!(q > 0.0 && q < 1.0)) throw InputError("q must lie in (0, 1)");
  std::vector<SignPosterior> post(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto* n = std::get_if<Normal>(&sample.family(i));
    if (n == nullptr || n->sigma != 1.0) throw InputError("the lfsr oracle assumes N(theta, 1) observations");
    post[i] = true_sign_posterior(sample.z(i), prior);
  }
  return detail::decide_from_posteriors(post, sample.values(), q, false);
}

struct AshConfig {
  double null_penalty = 10.0;  // lambda_0; all other lambda_k = 1
  double a1 = 0.1;
  double grid_factor = std::numbers::sqrt2;
  FitOptions fit;
};

// Grid from the unmasked z-values: equivalent of max |z| with per-index noise.
inline SupportGrid unmasked_grid(const ZSample& sample, double a1, double factor) {
  double max_excess = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const WorkingScale s = working_scale(sample.z(i), sample.family(i));
    max_excess = std::max(max_excess, s.x * s.x - s.sd * s.sd);
  }
  return build_grid(std::sqrt(max_excess + 1.0), a1, factor);
}

inline MixtureModel fit_unmasked_model(const ZSample& sample, const AshConfig& cfg = {}) {
  SupportGrid grid = unmasked_grid(sample, cfg.a1, cfg.grid_factor);
  LikelihoodMatrix lik(sample.size(), grid.columns());
  for (std::size_t i = 0; i < sample.size(); ++i) likelihood_row(sample.z(i), sample.family(i), grid, lik.row(i));
  FitResult fit = fit_weights(lik, PenaltyConfig::null_biased(grid.K(), cfg.null_penalty), cfg.fit);
  return MixtureModel{std::move(grid), std::move(fit.weights)};
}

// LFSR thresholding with posteriors from `model`; exact ties in the sign
// posterior fall back to sgn(z_i).
inline DecisionSet ash_decisions(const ZSample& sample, const MixtureModel& model, double q) {
  model.validate();
  if (!(q > 0.0 && q < 1.0)) throw InputError("q must lie in (0, 1)");
  std::vector<SignPosterior> post(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) post[i] = sign_posterior(sample.z(i), sample.family(i), model);
  return detail::decide_from_posteriors(post, sample.values(), q, true);
}

inline DecisionSet ash_procedure(const ZSample& sample, double q, const AshConfig& cfg = {}) {
  return ash_decisions(sample, fit_unmasked_model(sample, cfg), q);
}

}  // namespace dirfdr
