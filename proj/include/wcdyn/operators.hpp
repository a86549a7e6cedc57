#pragma once

// Weighted composition operators T f = w * (f o alpha) and their exact iterates.

#include <cstdint>
#include <map>

#include "wcdyn/domain.hpp"
#include "wcdyn/spaces.hpp"

namespace wcdyn {

/// A function stored as log-magnitude plus unit phase per support point, so that
/// iterates whose values leave double range stay representable.
class LogScaledFunction {
 public:
  struct Entry {
    double log_abs = 0.0;
    Complex phase{1.0, 0.0};
  };

  void set(const LatticePoint& x, Entry e) { entries_[x] = e; }
  const std::map<LatticePoint, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Exponentiates each entry; values beyond double range become infinite.
  SampleFunction to_sample() const;

 private:
  std::map<LatticePoint, Entry> entries_;
};

/// T_{alpha,w} with w and 1/w bounded on the bounds region.
class WeightedCompositionOperator {
 public:
  /// Computes M_w and m_w as the max and min of w over `bounds_region`.
  WeightedCompositionOperator(LatticeMap map, WeightSpec symbol, const CompactRegion& bounds_region);

  const LatticeMap& map() const { return map_; }
  const LatticeMap& inverse_map() const { return inverse_; }
  const WeightSpec& symbol() const { return symbol_; }
  double sup_symbol() const { return sup_; }  ///< M_w
  double inf_symbol() const { return inf_; }  ///< m_w

  /// (T f)(x) = w(x) f(alpha(x)).
  SampleFunction apply(const SampleFunction& f) const;
  /// (S f)(x) = f(alpha^{-1}(x)) / w(alpha^{-1}(x)).
  SampleFunction apply_inverse(const SampleFunction& f) const;

  /// T^n for n >= 0 and S^{-n} for n < 0, through the closed product formulas.
  SampleFunction iterate(std::int64_t n, const SampleFunction& f) const;
  LogScaledFunction iterate_log(std::int64_t n, const SampleFunction& f) const;

  /// sum_{j=0}^{n-1} log w(alpha^j x), for n >= 0.
  double log_forward_product(std::int64_t n, const LatticePoint& x) const;
  /// sum_{j=1}^{n} log w(alpha^{-j} x), for n >= 0.
  double log_backward_product(std::int64_t n, const LatticePoint& x) const;

 private:
  LatticeMap map_;
  LatticeMap inverse_;
  WeightSpec symbol_;
  std::optional<double> log_constant_;
  double sup_ = 0.0;
  double inf_ = 0.0;
};

/// M_w * K_alpha with K_alpha from validate_weight on `region`. Throws WeightError
/// when the weight fails validation.
double operator_norm_bound(const WeightedCompositionOperator& T, const WeightSpec& eta, const CompactRegion& region);

}  // namespace wcdyn
