#pragma once

// Null-distribution families for z-values and the probability transforms
// built on them: two-sided p-values, the u = F0(z) transform, reflections
// and masked values.
//
// Probabilities are carried as a (u, tail) pair with tail = 1 - u so that
// upper-tail values keep full relative precision; inverse transforms pick
// whichever side is smaller.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "dirfdr/errors.hpp"

namespace dirfdr {

// ---------------------------------------------------------------------------
// Standard normal primitives
// ---------------------------------------------------------------------------

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Phi(x) through the C library erfc, which is accurate to a few ulp over the
// whole line, including the far lower tail.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// 1 - Phi(x) without cancellation.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Phi(x) - Phi(y) for x >= y, evaluated on whichever tail avoids cancellation.
inline double normal_cdf_diff(double x, double y) {
  if (y > 0.0) return normal_sf(y) - normal_sf(x);
  return normal_cdf(x) - normal_cdf(y);
}

// Lower-tail quantile: returns x with Phi(x) = p, for p in (0, 0.5].
inline double normal_quantile_lower(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

inline double normal_quantile(double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return p <= 0.5 ? normal_quantile_lower(p) : -normal_quantile_lower(1.0 - p);
}

// ---------------------------------------------------------------------------
// Null families
// ---------------------------------------------------------------------------

// N(theta, sigma^2) observations; the null is N(0, sigma^2).
struct Normal {
  double sigma = 1.0;
};

// Noncentral-t observations with nu degrees of freedom. The null is the
// central t_nu. Mixture likelihoods go through the variance-stabilising
// transform xi = alpha * asinh(beta * z), which is approximately N(gamma, 1).
struct NoncentralT {
  double nu = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  // alpha, beta from the exact first two moments of the noncentral t:
  // Var(t) = A + B * E[t]^2 with A = nu/(nu-2) and B = nu/((nu-2) c^2) - 1,
  // c = sqrt(nu/2) Gamma((nu-1)/2) / Gamma(nu/2). Stabilising that variance
  // gives alpha = 1/sqrt(B), beta = sqrt(B/A).
  static NoncentralT laubscher(double nu) {
    if (!(nu >= 4.0) || !std::isfinite(nu))
      throw UnsupportedFamilyError("noncentral-t requires nu >= 4, got " + std::to_string(nu));
    const double c = std::sqrt(nu / 2.0) * std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
    const double a = nu / (nu - 2.0);
    const double b = nu / ((nu - 2.0) * c * c) - 1.0;
    return NoncentralT{nu, 1.0 / std::sqrt(b), std::sqrt(b / a)};
  }

  // Multiplier mapping the noncentrality theta to E[t] / theta.
  double mean_factor() const {
    return std::sqrt(nu / 2.0) * std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
  }
};

using NullFamily = std::variant<Normal, NoncentralT>;

inline void validate(const NullFamily& family) {
  if (const auto* n = std::get_if<Normal>(&family)) {
    if (!(n->sigma > 0.0) || !std::isfinite(n->sigma))
      throw InputError("normal null requires sigma > 0, got " + std::to_string(n->sigma));
    return;
  }
  const auto& t = std::get<NoncentralT>(family);
  if (!(t.nu >= 4.0) || !std::isfinite(t.nu))
    throw UnsupportedFamilyError("noncentral-t requires nu >= 4, got " + std::to_string(t.nu));
  if (!(t.alpha > 0.0) || !(t.beta > 0.0) || !std::isfinite(t.alpha) || !std::isfinite(t.beta))
    throw InputError("noncentral-t requires alpha > 0 and beta > 0");
}

// A null probability u = F0(z) together with tail = 1 - F0(z).
struct Pit {
  double u = 0.5;
  double tail = 0.5;

  static Pit from_u(double u) { return Pit{u, 1.0 - u}; }
  friend bool operator==(const Pit&, const Pit&) = default;
};

namespace detail {

inline boost::math::students_t_distribution<double> central_t(const NoncentralT& t) {
  return boost::math::students_t_distribution<double>(t.nu);
}

inline void require_finite(double z) {
  if (!std::isfinite(z)) throw InputError("z-value must be finite");
}

inline void require_open_unit(double u) {
  if (!(u > 0.0 && u < 1.0)) throw InputError("u must lie in (0, 1), got " + std::to_string(u));
}

}  // namespace detail

inline Pit u_transform(double z, const NullFamily& family) {
  detail::require_finite(z);
  if (const auto* n = std::get_if<Normal>(&family)) {
    const double x = z / n->sigma;
    return Pit{normal_cdf(x), normal_sf(x)};
  }
  const auto dist = detail::central_t(std::get<NoncentralT>(family));
  return Pit{boost::math::cdf(dist, z), boost::math::cdf(boost::math::complement(dist, z))};
}

inline double null_density(double z, const NullFamily& family) {
  if (const auto* n = std::get_if<Normal>(&family)) return normal_pdf(z / n->sigma) / n->sigma;
  return boost::math::pdf(detail::central_t(std::get<NoncentralT>(family)), z);
}

// p = 2 F0(-|z|).
inline double two_sided_pvalue(double z, const NullFamily& family) {
  const Pit p = u_transform(z, family);
  return std::min(1.0, 2.0 * std::min(p.u, p.tail));
}

// Inverse of u_transform, evaluated on the smaller of the two tails.
inline double inverse_u(const Pit& p, const NullFamily& family) {
  const bool lower = p.u <= p.tail;
  const double small = lower ? p.u : p.tail;
  double z;
  if (const auto* n = std::get_if<Normal>(&family)) {
    z = n->sigma * normal_quantile_lower(small);
  } else if (small <= 0.0) {
    z = -std::numeric_limits<double>::infinity();
  } else {
    z = boost::math::quantile(detail::central_t(std::get<NoncentralT>(family)), small);
  }
  return lower ? z : -z;
}

inline double inverse_u(double u, const NullFamily& family) { return inverse_u(Pit::from_u(u), family); }

// Reflection about 0.25 on (0, 0.5] and about 0.75 on (0.5, 1).
inline double reflect(double u) {
  detail::require_open_unit(u);
  return u <= 0.5 ? 0.5 - u : 1.5 - u;
}

inline Pit reflect(const Pit& p) {
  if (!(p.u > 0.0 && p.tail > 0.0)) throw InputError("u must lie in (0, 1)");
  if (p.u <= 0.5) return Pit{0.5 - p.u, 0.5 + p.u};
  return Pit{0.5 + p.tail, 0.5 - p.tail};
}

// The member of {u, reflect(u)} nearer to an endpoint of the unit interval.
inline double masked_value(double u) {
  const double r = reflect(u);
  return u <= 0.5 ? std::min(u, r) : std::max(u, r);
}

inline Pit masked_value(const Pit& p) {
  const Pit r = reflect(p);
  if (p.u <= 0.5) return r.u < p.u ? r : p;
  return r.tail < p.tail ? r : p;
}

inline double laubscher_transform(double z, const NoncentralT& t) {
  if (!(t.nu >= 4.0)) throw UnsupportedFamilyError("noncentral-t requires nu >= 4");
  return t.alpha * std::asinh(t.beta * z);
}

// Coordinates in which the mixture likelihoods are Gaussian: the observation
// on its working scale and the noise standard deviation there.
struct WorkingScale {
  double x;
  double sd;
};

inline WorkingScale working_scale(double z, const NullFamily& family) {
  if (const auto* n = std::get_if<Normal>(&family)) return {z, n->sigma};
  return {laubscher_transform(z, std::get<NoncentralT>(family)), 1.0};
}

// ---------------------------------------------------------------------------
// Observed data
// ---------------------------------------------------------------------------

// z-values with a null family per index. z = 0 is rejected: its sign is
// undefined and its reflection leaves the unit interval.
class ZSample {
 public:
  ZSample(std::vector<double> z, std::vector<NullFamily> families)
      : z_(std::move(z)), families_(std::move(families)) {
    if (z_.empty()) throw InputError("sample must contain at least one z-value");
    if (z_.size() != families_.size())
      throw InputError("z-values and null families differ in length");
    for (std::size_t i = 0; i < z_.size(); ++i) {
      if (!std::isfinite(z_[i])) throw InputError("z-value at index " + std::to_string(i) + " is not finite");
      if (z_[i] == 0.0)
        throw InputError("z-value at index " + std::to_string(i) + " is exactly zero; its sign is undefined");
      validate(families_[i]);
    }
  }

  static ZSample standard(std::vector<double> z) {
    std::vector<NullFamily> fam(z.size(), Normal{1.0});
    return ZSample(std::move(z), std::move(fam));
  }

  std::size_t size() const { return z_.size(); }
  double z(std::size_t i) const { return z_[i]; }
  const NullFamily& family(std::size_t i) const { return families_[i]; }
  std::span<const double> values() const { return z_; }
  std::span<const NullFamily> families() const { return families_; }

  std::vector<double> pvalues() const {
    std::vector<double> p(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) p[i] = two_sided_pvalue(z_[i], families_[i]);
    return p;
  }

  std::vector<Pit> pits() const {
    std::vector<Pit> u(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) u[i] = u_transform(z_[i], families_[i]);
    return u;
  }

 private:
  std::vector<double> z_;
  std::vector<NullFamily> families_;
};

// u, its reflection and masked value for every index, plus their z-scale images.
struct MaskedValues {
  std::vector<double> u;
  std::vector<double> u_check;
  std::vector<double> u_prime;
  std::vector<double> z_prime;
  std::vector<double> z_check;

  static MaskedValues of(const ZSample& sample) {
    MaskedValues mv;
    const std::size_t m = sample.size();
    mv.u.resize(m);
    mv.u_check.resize(m);
    mv.u_prime.resize(m);
    mv.z_prime.resize(m);
    mv.z_check.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Pit p = u_transform(sample.z(i), sample.family(i));
      const Pit r = reflect(p);
      const Pit mp = masked_value(p);
      mv.u[i] = p.u;
      mv.u_check[i] = r.u;
      mv.u_prime[i] = mp.u;
      mv.z_prime[i] = inverse_u(mp, sample.family(i));
      mv.z_check[i] = inverse_u(r, sample.family(i));
    }
    return mv;
  }
};

}  // namespace dirfdr
