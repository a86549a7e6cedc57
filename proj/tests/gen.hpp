#pragma once

// Seeded random generators shared by the property tests.

#include <cmath>
#include <random>
#include <vector>

#include "wcdyn/spaces.hpp"

namespace gen {

using wcdyn::Complex;
using wcdyn::Coord;
using wcdyn::LatticePoint;
using wcdyn::NormSpec;
using wcdyn::SampleFunction;
using wcdyn::YoungFunction;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  LatticePoint point(std::size_t dim, Coord lo, Coord hi) {
    std::vector<Coord> c(dim);
    for (auto& v : c) v = integer(lo, hi);
    return LatticePoint(std::move(c));
  }

  Complex value() {
    const double mag = std::exp(real(-3.0, 3.0));
    if (coin()) return mag * (coin() ? 1.0 : -1.0);
    const double phase = real(0.0, 2.0 * M_PI);
    return std::polar(mag, phase);
  }

  SampleFunction function(std::size_t dim, std::size_t max_points, Coord spread) {
    SampleFunction f;
    const auto n = static_cast<std::size_t>(integer(1, static_cast<std::int64_t>(max_points)));
    for (std::size_t i = 0; i < n; ++i) f.set(point(dim, -spread, spread), value());
    return f;
  }

  /// g with |g| <= |f| pointwise and supp g inside supp f.
  SampleFunction dominated(const SampleFunction& f) {
    SampleFunction g;
    for (const auto& [x, v] : f) {
      if (integer(0, 4) == 0) continue;
      g.set(x, std::polar(std::abs(v) * real(0.0, 1.0), real(0.0, 2.0 * M_PI)));
    }
    return g;
  }

  std::vector<Coord> shift(std::size_t dim, Coord spread) {
    std::vector<Coord> s(dim);
    for (auto& v : s) v = integer(-spread, spread);
    return s;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// One of every norm kind, cycled by index.
inline NormSpec norm_kind(std::size_t i) {
  switch (i % 9) {
    case 0: return NormSpec::ell_p(1.0);
    case 1: return NormSpec::ell_p(2.0);
    case 2: return NormSpec::ell_p(3.5);
    case 3: return NormSpec::ell_inf();
    case 4: return NormSpec::orlicz(YoungFunction::power(3.0), 1e-14);
    case 5: return NormSpec::orlicz(YoungFunction::exponential(), 1e-14);
    case 6: return NormSpec::orlicz(YoungFunction::exp_square(), 1e-14);
    case 7: return NormSpec::orlicz(YoungFunction::t_log(), 1e-14);
    default: return NormSpec::morrey(3.0, 1.5, 6);
  }
}
inline constexpr std::size_t kNormKinds = 9;

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace gen
