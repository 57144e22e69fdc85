#pragma once

// Unimodal working prior: a point mass at zero plus uniforms on [0, a_k]
// and [-a_k, 0], its component likelihoods (with the masked-pair form),
// Dirichlet-penalised weight fitting and posterior local false sign rates.
//
// Columns are laid out k = -K..K, so column c holds component k = c - K and
// column K is the point mass.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirfdr/errors.hpp"
#include "dirfdr/null_models.hpp"

namespace dirfdr {

class SupportGrid {
 public:
  explicit SupportGrid(std::vector<double> positive_endpoints) : a_(std::move(positive_endpoints)) {
    if (a_.empty()) throw InputError("support grid needs at least one endpoint");
    if (!(a_.front() > 0.0)) throw InputError("support grid endpoints must be positive");
    for (std::size_t k = 1; k < a_.size(); ++k)
      if (!(a_[k] > a_[k - 1])) throw InputError("support grid endpoints must be strictly increasing");
  }

  std::size_t K() const { return a_.size(); }
  std::size_t columns() const { return 2 * a_.size() + 1; }
  // a_k for k in 1..K
  double endpoint(std::size_t k) const { return a_[k - 1]; }
  const std::vector<double>& endpoints() const { return a_; }

  friend bool operator==(const SupportGrid&, const SupportGrid&) = default;

 private:
  std::vector<double> a_;
};

// a_1 = a1, a_{k+1} = factor * a_k while below a_K = 2 sqrt(max_abs^2 - 1);
// a_K itself closes the grid. Falls back to {a1} when a_K would not exceed a1.
inline SupportGrid build_grid(double max_abs, double a1 = 0.1, double factor = std::numbers::sqrt2) {
  if (!(a1 > 0.0)) throw InputError("a1 must be positive");
  if (!(factor > 1.0)) throw InputError("grid factor must exceed 1");
  const double excess = max_abs * max_abs - 1.0;
  if (!(excess > 0.25 * a1 * a1)) return SupportGrid({a1});
  const double a_max = 2.0 * std::sqrt(excess);
  std::vector<double> a{a1};
  while (a.back() * factor <= a_max) a.push_back(a.back() * factor);
  if (a_max - a.back() > 1e-12 * a_max) a.push_back(a_max);
  return SupportGrid(std::move(a));
}

struct MixtureModel {
  SupportGrid grid;
  std::vector<double> weights;  // length 2K+1, indexed k = -K..K

  double weight(int k) const { return weights.at(static_cast<std::size_t>(k + static_cast<int>(grid.K()))); }
  double null_weight() const { return weights[grid.K()]; }

  void validate() const {
    if (weights.size() != grid.columns()) throw InputError("mixture weights do not match the support grid");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InputError("mixture weights must be nonnegative");
      total += w;
    }
    if (std::fabs(total - 1.0) > 1e-10) throw InputError("mixture weights must sum to 1");
  }
};

// ---------------------------------------------------------------------------
// Component likelihoods
// ---------------------------------------------------------------------------

namespace detail {

// Integral of the working-scale Gaussian density against h_k.
inline double uniform_component(const WorkingScale& s, int k, const SupportGrid& grid) {
  if (k == 0) return normal_pdf(s.x / s.sd) / s.sd;
  const double a = grid.endpoint(static_cast<std::size_t>(std::abs(k)));
  if (k > 0) return normal_cdf_diff(s.x / s.sd, (s.x - a) / s.sd) / a;
  return normal_cdf_diff((s.x + a) / s.sd, s.x / s.sd) / a;
}

inline void require_component(int k, const SupportGrid& grid) {
  if (static_cast<std::size_t>(std::abs(k)) > grid.K())
    throw InputError("component index " + std::to_string(k) + " outside -K..K");
}

}  // namespace detail

// Likelihood of z under component k; masked adds the same term at z_check,
// which makes the value symmetric in (z, z_check).
inline double component_likelihood(double z, double z_check, bool masked, int k, const SupportGrid& grid,
                                   const NullFamily& family) {
  detail::require_component(k, grid);
  double l = detail::uniform_component(working_scale(z, family), k, grid);
  if (masked) l += detail::uniform_component(working_scale(z_check, family), k, grid);
  return l;
}

// All 2K+1 component likelihoods of one observation.
inline void likelihood_row(double z, const NullFamily& family, const SupportGrid& grid, std::span<double> out) {
  const WorkingScale s = working_scale(z, family);
  const int K = static_cast<int>(grid.K());
  for (int k = -K; k <= K; ++k) out[static_cast<std::size_t>(k + K)] = detail::uniform_component(s, k, grid);
}

inline void masked_likelihood_row(double z, double z_check, const NullFamily& family, const SupportGrid& grid,
                                  std::span<double> out) {
  const WorkingScale s = working_scale(z, family);
  const WorkingScale c = working_scale(z_check, family);
  const int K = static_cast<int>(grid.K());
  for (int k = -K; k <= K; ++k)
    out[static_cast<std::size_t>(k + K)] =
        detail::uniform_component(s, k, grid) + detail::uniform_component(c, k, grid);
}

// Dense row-major m x C matrix.
class LikelihoodMatrix {
 public:
  LikelihoodMatrix() = default;
  LikelihoodMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t c) const { return data_[i * cols_ + c]; }
  double& operator()(std::size_t i, std::size_t c) { return data_[i * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Penalised maximum likelihood
// ---------------------------------------------------------------------------

struct PenaltyConfig {
  std::vector<double> lambda_pen;  // Dirichlet parameters, one per column

  static PenaltyConfig constant(std::size_t columns, double value) {
    return PenaltyConfig{std::vector<double>(columns, value)};
  }

  // ashr-style default: lambda_0 = null_value, lambda_k = 1 otherwise.
  static PenaltyConfig null_biased(std::size_t K, double null_value = 10.0) {
    PenaltyConfig p{std::vector<double>(2 * K + 1, 1.0)};
    p.lambda_pen[K] = null_value;
    return p;
  }

  void validate(std::size_t columns) const {
    if (lambda_pen.size() != columns) throw InputError("penalty length does not match likelihood columns");
    for (double l : lambda_pen)
      if (!(l > 0.0)) throw InputError("Dirichlet penalty parameters must be positive");
  }
};

struct FitOptions {
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;
  double floor = 1e-12;
  std::optional<std::vector<double>> initial;  // uniform when empty
  bool keep_trace = false;
};

struct FitResult {
  std::vector<double> weights;
  double objective = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::vector<double> trace;  // objective per iterate, when requested
};

// Sum_i log(Sum_k w_k L_ik) + Sum_k (lambda_k - 1) log w_k.
inline double penalized_objective(const LikelihoodMatrix& lik, std::span<const double> w, const PenaltyConfig& pen) {
  double obj = 0.0;
  for (std::size_t i = 0; i < lik.rows(); ++i) {
    const auto r = lik.row(i);
    double s = 0.0;
    for (std::size_t c = 0; c < r.size(); ++c) s += w[c] * r[c];
    obj += std::log(s);
  }
  for (std::size_t c = 0; c < w.size(); ++c)
    if (pen.lambda_pen[c] != 1.0) obj += (pen.lambda_pen[c] - 1.0) * std::log(w[c]);
  return obj;
}

// Dirichlet-penalised EM: w_k proportional to Sum_i r_ik + lambda_k - 1, with
// values below the floor clamped before renormalising. Rows are scaled by
// their maxima, which shifts the objective by a constant only. Returns the
// best iterate seen.
inline FitResult fit_weights(const LikelihoodMatrix& lik, const PenaltyConfig& pen, const FitOptions& opt = {}) {
  const std::size_t m = lik.rows();
  const std::size_t C = lik.cols();
  if (C == 0) throw InputError("likelihood matrix has no columns");
  pen.validate(C);

  LikelihoodMatrix scaled(m, C);
  double log_scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto src = lik.row(i);
    double mx = 0.0;
    for (double v : src) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("likelihoods must be finite and nonnegative");
      mx = std::max(mx, v);
    }
    if (!(mx > 0.0)) throw DegenerateLikelihoodError("likelihood row " + std::to_string(i) + " is identically zero");
    auto dst = scaled.row(i);
    for (std::size_t c = 0; c < C; ++c) dst[c] = src[c] / mx;
    log_scale += std::log(mx);
  }

  std::vector<double> w(C, 1.0 / static_cast<double>(C));
  if (opt.initial) {
    if (opt.initial->size() != C) throw InputError("initial weights do not match likelihood columns");
    double t = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      w[c] = std::max((*opt.initial)[c], opt.floor);
      t += w[c];
    }
    for (double& x : w) x /= t;
  }

  FitResult best;
  std::vector<double> counts(C);
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0;; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double loglik = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = scaled.row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < C; ++c) s += w[c] * r[c];
      loglik += std::log(s);
      const double inv = 1.0 / s;
      for (std::size_t c = 0; c < C; ++c) counts[c] += r[c] * inv;
    }
    for (std::size_t c = 0; c < C; ++c) counts[c] *= w[c];
    double obj = loglik + log_scale;
    for (std::size_t c = 0; c < C; ++c)
      if (pen.lambda_pen[c] != 1.0) obj += (pen.lambda_pen[c] - 1.0) * std::log(w[c]);

    if (opt.keep_trace) best.trace.push_back(obj);
    if (obj > best.objective || best.weights.empty()) {
      best.objective = obj;
      best.weights = w;
    }
    best.iterations = it;
    if (it > 0 && obj - prev < opt.tolerance) break;
    if (it >= opt.max_iterations) break;
    prev = obj;

    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      w[c] = std::max(counts[c] + pen.lambda_pen[c] - 1.0, opt.floor);
      total += w[c];
    }
    for (double& x : w) x /= total;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Posterior sign probabilities
// ---------------------------------------------------------------------------

struct SignPosterior {
  double negative;  // P(theta < 0 | z)
  double zero;      // P(theta = 0 | z)
  double positive;  // P(theta > 0 | z)

  double lfsr() const { return std::min(negative + zero, positive + zero); }
};

inline SignPosterior sign_posterior(std::span<const double> row, std::span<const double> weights) {
  const std::size_t K = (row.size() - 1) / 2;
  double neg = 0.0, pos = 0.0;
  for (std::size_t c = 0; c < K; ++c) neg += weights[c] * row[c];
  for (std::size_t c = K + 1; c < row.size(); ++c) pos += weights[c] * row[c];
  const double null = weights[K] * row[K];
  const double total = neg + pos + null;
  if (!(total > 0.0)) throw DegenerateLikelihoodError("marginal likelihood is zero");
  return {neg / total, null / total, pos / total};
}

inline SignPosterior sign_posterior(double z, const NullFamily& family, const MixtureModel& model) {
  std::vector<double> row(model.grid.columns());
  likelihood_row(z, family, model.grid, row);
  return sign_posterior(row, model.weights);
}

// min(P(theta <= 0 | z), P(theta >= 0 | z)); the point mass counts on both sides.
inline double posterior_lfsr(double z, const NullFamily& family, const MixtureModel& model) {
  return sign_posterior(z, family, model).lfsr();
}

}  // namespace dirfdr
