#include "wcdyn/operators.hpp"

#include <cmath>

namespace wcdyn {

SampleFunction LogScaledFunction::to_sample() const {
  SampleFunction out;
  for (const auto& [x, e] : entries_) out.set(x, std::exp(e.log_abs) * e.phase);
  return out;
}

WeightedCompositionOperator::WeightedCompositionOperator(LatticeMap map, WeightSpec symbol,
                                                         const CompactRegion& bounds_region)
    : map_(std::move(map)), inverse_(map_.inverse()), symbol_(symbol.with_role(WeightRole::Symbol)) {
  if (bounds_region.dimension() != map_.dimension()) {
    throw InvalidArgument("operator bounds region dimension does not match its map");
  }
  const WeightBounds b = weight_bounds(symbol_, bounds_region);
  sup_ = b.sup;
  inf_ = b.inf;
  if (const auto c = symbol_.constant_value()) log_constant_ = std::log(*c);
}

SampleFunction WeightedCompositionOperator::apply(const SampleFunction& f) const {
  SampleFunction out;
  for (const auto& [y, v] : f) {
    const LatticePoint x = inverse_.apply(y);
    out.set(x, symbol_.value(x) * v);
  }
  return out;
}

SampleFunction WeightedCompositionOperator::apply_inverse(const SampleFunction& f) const {
  SampleFunction out;
  for (const auto& [y, v] : f) out.set(map_.apply(y), v / symbol_.value(y));
  return out;
}

double WeightedCompositionOperator::log_forward_product(std::int64_t n, const LatticePoint& x) const {
  if (n < 0) throw InvalidArgument("orbit product length must be non-negative");
  if (log_constant_) return static_cast<double>(n) * *log_constant_;
  double s = 0;
  LatticePoint p = x;
  for (std::int64_t j = 0; j < n; ++j) {
    s += symbol_.log_value(p);
    p = map_.apply(p);
  }
  return s;
}

double WeightedCompositionOperator::log_backward_product(std::int64_t n, const LatticePoint& x) const {
  if (n < 0) throw InvalidArgument("orbit product length must be non-negative");
  if (log_constant_) return static_cast<double>(n) * *log_constant_;
  double s = 0;
  LatticePoint p = x;
  for (std::int64_t j = 1; j <= n; ++j) {
    p = inverse_.apply(p);
    s += symbol_.log_value(p);
  }
  return s;
}

LogScaledFunction WeightedCompositionOperator::iterate_log(std::int64_t n, const SampleFunction& f) const {
  LogScaledFunction out;
  if (n == 0) {
    for (const auto& [y, v] : f) out.set(y, {std::log(std::abs(v)), v / std::abs(v)});
    return out;
  }
  if (n > 0) {
    // T^n f = prod_{j<n} (w o alpha^j) * (f o alpha^n); f(y) lands at alpha^{-n}(y).
    const LatticeMap back = map_.power(-n);
    for (const auto& [y, v] : f) {
      const LatticePoint x = back.apply(y);
      out.set(x, {log_forward_product(n, x) + std::log(std::abs(v)), v / std::abs(v)});
    }
    return out;
  }
  // S^m f = prod_{j=1}^{m} (w o alpha^{-j})^{-1} * (f o alpha^{-m}); f(y) lands at alpha^m(y).
  const std::int64_t m = -n;
  const LatticeMap fwd = map_.power(m);
  for (const auto& [y, v] : f) {
    const LatticePoint x = fwd.apply(y);
    out.set(x, {std::log(std::abs(v)) - log_backward_product(m, x), v / std::abs(v)});
  }
  return out;
}

SampleFunction WeightedCompositionOperator::iterate(std::int64_t n, const SampleFunction& f) const {
  return iterate_log(n, f).to_sample();
}

double operator_norm_bound(const WeightedCompositionOperator& T, const WeightSpec& eta, const CompactRegion& region) {
  const WeightValidation v = validate_weight(eta, T.map(), region);
  if (!v) throw WeightError("eta is not a weight on the region: " + v.message);
  return T.sup_symbol() * v.k_alpha;
}

}  // namespace wcdyn
