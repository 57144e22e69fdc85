#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirfdr/errors.hpp"

namespace dirfdr {

enum class Sign : int { Negative = -1, Positive = 1 };

inline int to_int(Sign s) { return static_cast<int>(s); }

inline Sign sign_of(double x) {
  if (x > 0.0) return Sign::Positive;
  if (x < 0.0) return Sign::Negative;
  throw InputError("sign of zero is undefined");
}

struct Discovery {
  std::size_t index;
  Sign sign;
  friend bool operator==(const Discovery&, const Discovery&) = default;
};

// Rejected indices, each with a nonzero declared sign. Kept sorted by index.
class DecisionSet {
 public:
  DecisionSet() = default;

  explicit DecisionSet(std::vector<Discovery> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end(), [](const Discovery& a, const Discovery& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < items_.size(); ++k)
      if (items_[k].index == items_[k - 1].index)
        throw InputError("duplicate rejected index " + std::to_string(items_[k].index));
    for (const auto& d : items_)
      if (d.sign != Sign::Positive && d.sign != Sign::Negative) throw InputError("declared sign must be +1 or -1");
  }

  // Declares sgn(z_i) for every index in `rejected`.
  static DecisionSet from_signs_of(std::span<const std::size_t> rejected, std::span<const double> z) {
    std::vector<Discovery> items;
    items.reserve(rejected.size());
    for (std::size_t i : rejected) items.push_back({i, sign_of(z[i])});
    return DecisionSet(std::move(items));
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<Discovery>& items() const { return items_; }

  std::optional<Sign> sign(std::size_t index) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), index,
                               [](const Discovery& d, std::size_t i) { return d.index < i; });
    if (it == items_.end() || it->index != index) return std::nullopt;
    return it->sign;
  }

  bool contains(std::size_t index) const { return sign(index).has_value(); }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(items_.size());
    for (const auto& d : items_) out.push_back(d.index);
    return out;
  }

  friend bool operator==(const DecisionSet&, const DecisionSet&) = default;

 private:
  std::vector<Discovery> items_;
};

}  // namespace dirfdr
