#pragma once

// ZDIRECT: a data-masking procedure for directional FDR control.
//
// Every index starts with only its masked value u' visible. The engine
// keeps two strictly separated views:
//   * the visible view (u' for masked indices, u for unmasked ones), which
//     alone drives the grid, the mixture fit and the choice of index to
//     unmask;
//   * the hidden values u_i, read only to count the candidate acceptance
//     and rejection sets and to report the final signs.
// Flipping a masked u_i to its reflection therefore cannot change any
// unmasking decision, which is what makes the FDR_dir estimate valid.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "dirfdr/decision.hpp"
#include "dirfdr/errors.hpp"
#include "dirfdr/mixture.hpp"
#include "dirfdr/null_models.hpp"

namespace dirfdr {

struct ZDirectConfig {
  std::optional<std::size_t> refit_cadence;  // ceil(m / 200) when unset
  double dirichlet = 0.8;                    // lambda_k for every k, including k = 0
  double a1 = 0.1;
  double grid_factor = std::numbers::sqrt2;
  double initial_low = 0.2;  // M_1 = {u' <= initial_low or u' >= initial_high}
  double initial_high = 0.8;
  FitOptions fit;
};

inline std::size_t default_refit_cadence(std::size_t m) { return (m + 199) / 200; }

struct CandidateSets {
  std::vector<std::size_t> acceptance;  // masked, u in (0.25, 0.75)
  std::vector<std::size_t> rejection;   // masked, u in (0, 0.25] or [0.75, 1)
};

inline bool in_rejection_region(double u) { return u <= 0.25 || u >= 0.75; }

// (1 + |A|) / max(|R|, 1)
inline double fdr_dir_estimate(std::size_t acceptance_size, std::size_t rejection_size) {
  return (1.0 + static_cast<double>(acceptance_size)) / static_cast<double>(std::max<std::size_t>(rejection_size, 1));
}

inline CandidateSets candidate_sets(std::span<const double> u, std::span<const std::size_t> masked) {
  CandidateSets s;
  for (std::size_t i : masked) (in_rejection_region(u[i]) ? s.rejection : s.acceptance).push_back(i);
  return s;
}

// Snapshot of the engine at the current step.
struct MaskState {
  std::size_t step = 0;
  std::vector<std::size_t> masked;
  std::vector<double> visible_u;  // u~_{i,t}
  std::size_t refit_cadence = 1;
  std::optional<MixtureModel> model;
};

struct ZDirectRun {
  DecisionSet decisions;
  std::size_t stop_step = 0;               // unmask steps taken before stopping
  std::vector<std::size_t> unmask_order;   // indices in the order they were unmasked
  double fdr_estimate = 1.0;               // at the stopping step
};

class ZDirectEngine {
 public:
  explicit ZDirectEngine(const ZSample& sample, ZDirectConfig cfg = {})
      : families_(sample.families().begin(), sample.families().end()), cfg_(std::move(cfg)) {
    const std::size_t m = sample.size();
    hidden_u_.resize(m);
    hidden_z_.assign(sample.values().begin(), sample.values().end());
    for (std::size_t i = 0; i < m; ++i) hidden_u_[i] = u_transform(hidden_z_[i], families_[i]);
    initialise();
  }

  // Works directly on null probabilities; hidden z-values come from inverse_u.
  ZDirectEngine(std::span<const Pit> u, std::vector<NullFamily> families, ZDirectConfig cfg = {})
      : families_(std::move(families)), cfg_(std::move(cfg)) {
    if (u.empty()) throw InputError("sample must contain at least one value");
    if (u.size() != families_.size()) throw InputError("u-values and null families differ in length");
    hidden_u_.assign(u.begin(), u.end());
    hidden_z_.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      validate(families_[i]);
      if (!(hidden_u_[i].u > 0.0 && hidden_u_[i].tail > 0.0) || hidden_u_[i].u == 0.5)
        throw InputError("u-values must lie in (0, 1) and differ from 0.5");
      hidden_z_[i] = inverse_u(hidden_u_[i], families_[i]);
    }
    initialise();
  }

  std::size_t size() const { return hidden_u_.size(); }
  std::size_t steps_taken() const { return steps_; }
  std::size_t refit_cadence() const { return cadence_; }
  bool is_masked(std::size_t i) const { return masked_[i]; }
  std::size_t masked_count() const { return n_masked_; }
  std::size_t acceptance_count() const { return n_accept_; }
  std::size_t rejection_count() const { return n_masked_ - n_accept_; }
  double fdr_estimate() const { return fdr_dir_estimate(acceptance_count(), rejection_count()); }
  const SupportGrid& grid() const { return *grid_; }
  const std::vector<std::size_t>& unmask_order() const { return order_; }

  std::vector<std::size_t> masked_indices() const {
    std::vector<std::size_t> out;
    out.reserve(n_masked_);
    for (std::size_t i = 0; i < masked_.size(); ++i)
      if (masked_[i]) out.push_back(i);
    return out;
  }

  CandidateSets candidate_sets() const {
    std::vector<double> u(hidden_u_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = hidden_u_[i].u;
    const auto masked = masked_indices();
    return dirfdr::candidate_sets(u, masked);
  }

  // Fitted on the visible view as of the most recent scheduled refit.
  const MixtureModel& model() const {
    if (stale_) refit();
    return *model_;
  }

  // Estimated local false sign rate at z'_i for a masked index.
  double lfsr(std::size_t i) const {
    if (!masked_.at(i)) throw StateError("lfsr is only evaluated for masked indices");
    return sign_posterior(eval_rows_.row(i), model().weights).lfsr();
  }

  // argmax of the estimated lfsr over masked indices; ties go to the smallest index.
  std::size_t next_unmask_index() const {
    if (n_masked_ == 0) throw StateError("masked set is empty");
    const auto& w = model().weights;
    std::size_t best = masked_.size();
    double best_val = -1.0;
    for (std::size_t i = 0; i < masked_.size(); ++i) {
      if (!masked_[i]) continue;
      const double v = sign_posterior(eval_rows_.row(i), w).lfsr();
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    return best;
  }

  // Removes one index from M_t and refits on the scheduled cadence.
  std::size_t unmask_step() {
    const std::size_t i = next_unmask_index();
    unmask(i);
    ++steps_;
    order_.push_back(i);
    if (steps_ % cadence_ == 0) stale_ = true;
    return i;
  }

  // Swaps a masked hidden value with its reflection. The visible view is
  // untouched; used to audit that decisions do not depend on hidden values.
  void reflect_hidden(std::size_t i) {
    if (!masked_.at(i)) throw StateError("only masked values can be reflected");
    const bool was_reject = in_rejection_region(hidden_u_[i].u);
    hidden_u_[i] = reflect(hidden_u_[i]);
    hidden_z_[i] = inverse_u(hidden_u_[i], families_[i]);
    const bool now_reject = in_rejection_region(hidden_u_[i].u);
    if (was_reject && !now_reject) ++n_accept_;
    if (!was_reject && now_reject) --n_accept_;
  }

  // Drops the cached model so the next query refits from the current view.
  void discard_model() { stale_ = true; }

  MaskState state() const {
    MaskState s;
    s.step = steps_;
    s.masked = masked_indices();
    s.visible_u.resize(size());
    for (std::size_t i = 0; i < size(); ++i) s.visible_u[i] = masked_[i] ? visible_u_[i].u : hidden_u_[i].u;
    s.refit_cadence = cadence_;
    if (model_) s.model = *model_;
    return s;
  }

  ZDirectRun run(double q) {
    if (!(q > 0.0 && q < 1.0)) throw InputError("q must lie in (0, 1)");
    ZDirectRun out;
    for (;;) {
      const double fdr = fdr_estimate();
      if (fdr <= q) {
        out.fdr_estimate = fdr;
        out.decisions = current_rejections();
        break;
      }
      if (n_masked_ == 0) {
        out.fdr_estimate = fdr;
        break;
      }
      unmask_step();
    }
    out.stop_step = steps_;
    out.unmask_order = order_;
    return out;
  }

  DecisionSet current_rejections() const {
    std::vector<Discovery> items;
    for (std::size_t i = 0; i < masked_.size(); ++i)
      if (masked_[i] && in_rejection_region(hidden_u_[i].u)) items.push_back({i, sign_of(hidden_z_[i])});
    return DecisionSet(std::move(items));
  }

 private:
  void initialise() {
    const std::size_t m = hidden_u_.size();
    cadence_ = cfg_.refit_cadence.value_or(default_refit_cadence(m));
    if (cadence_ == 0) throw InputError("refit cadence must be positive");
    if (!(cfg_.dirichlet > 0.0)) throw InputError("Dirichlet penalty must be positive");

    visible_u_.resize(m);
    visible_z_.resize(m);
    partner_z_.resize(m);
    masked_.assign(m, false);
    double max_excess = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Pit mv = masked_value(hidden_u_[i]);
      visible_u_[i] = mv;
      visible_z_[i] = inverse_u(mv, families_[i]);
      partner_z_[i] = inverse_u(reflect(mv), families_[i]);
      masked_[i] = mv.u <= cfg_.initial_low || mv.u >= cfg_.initial_high;
      const WorkingScale s = working_scale(visible_z_[i], families_[i]);
      max_excess = std::max(max_excess, s.x * s.x - s.sd * s.sd);
    }
    n_masked_ = 0;
    n_accept_ = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!masked_[i]) continue;
      ++n_masked_;
      if (!in_rejection_region(hidden_u_[i].u)) ++n_accept_;
    }

    grid_ = build_grid(std::sqrt(max_excess + 1.0), cfg_.a1, cfg_.grid_factor);
    const std::size_t C = grid_->columns();
    lik_ = LikelihoodMatrix(m, C);
    eval_rows_ = LikelihoodMatrix(m, C);
    for (std::size_t i = 0; i < m; ++i) {
      if (masked_[i]) {
        masked_likelihood_row(visible_z_[i], partner_z_[i], families_[i], *grid_, lik_.row(i));
        likelihood_row(visible_z_[i], families_[i], *grid_, eval_rows_.row(i));
      } else {
        // Outside M_1 the value is revealed from the start.
        visible_u_[i] = hidden_u_[i];
        visible_z_[i] = hidden_z_[i];
        likelihood_row(visible_z_[i], families_[i], *grid_, lik_.row(i));
      }
    }
    penalty_ = PenaltyConfig::constant(C, cfg_.dirichlet);
    stale_ = true;
  }

  void unmask(std::size_t i) {
    masked_[i] = false;
    --n_masked_;
    if (!in_rejection_region(hidden_u_[i].u)) --n_accept_;
    visible_u_[i] = hidden_u_[i];
    visible_z_[i] = hidden_z_[i];
    likelihood_row(visible_z_[i], families_[i], *grid_, lik_.row(i));
  }

  void refit() const {
    FitResult fit = fit_weights(lik_, penalty_, cfg_.fit);
    model_ = MixtureModel{*grid_, std::move(fit.weights)};
    stale_ = false;
  }

  std::vector<NullFamily> families_;
  ZDirectConfig cfg_;

  // hidden
  std::vector<Pit> hidden_u_;
  std::vector<double> hidden_z_;

  // visible
  std::vector<Pit> visible_u_;
  std::vector<double> visible_z_;
  std::vector<double> partner_z_;
  std::vector<bool> masked_;
  std::optional<SupportGrid> grid_;
  LikelihoodMatrix lik_;
  LikelihoodMatrix eval_rows_;
  PenaltyConfig penalty_;

  std::size_t cadence_ = 1;
  std::size_t steps_ = 0;
  std::size_t n_masked_ = 0;
  std::size_t n_accept_ = 0;
  std::vector<std::size_t> order_;
  mutable std::optional<MixtureModel> model_;
  mutable bool stale_ = true;
};

inline ZDirectRun zdirect_run(const ZSample& sample, double q, const ZDirectConfig& cfg = {}) {
  ZDirectEngine engine(sample, cfg);
  return engine.run(q);
}

inline DecisionSet zdirect(const ZSample& sample, double q, const ZDirectConfig& cfg = {}) {
  return zdirect_run(sample, q, cfg).decisions;
}

}  // namespace dirfdr
