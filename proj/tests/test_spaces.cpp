#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gen.hpp"
#include "wcdyn/spaces.hpp"

using namespace wcdyn;

namespace {

long double young(const YoungFunction& phi, long double t) {
  switch (phi.kind) {
    case YoungFunction::Kind::Power: return std::pow(t, static_cast<long double>(phi.exponent));
    case YoungFunction::Kind::Exponential: return std::expm1(t);
    case YoungFunction::Kind::ExpSquare: return std::expm1(t * t);
    case YoungFunction::Kind::TLog: return t * std::log1p(t);
  }
  return 0;
}

// Luxemburg norm by plain bisection over a wide bracket in extended precision.
double luxemburg_oracle(const YoungFunction& phi, const SampleFunction& f) {
  if (f.empty()) return 0.0;
  long double lo = 0, hi = 1;
  const auto modular = [&](long double lam) {
    long double s = 0;
    for (const auto& [x, v] : f) s += young(phi, std::abs(v) / lam);
    return s;
  };
  while (modular(hi) > 1) hi *= 2;
  for (int i = 0; i < 300; ++i) {
    const long double mid = (lo + hi) / 2;
    (modular(mid) <= 1 ? hi : lo) = mid;
  }
  return static_cast<double>(hi);
}

// Discrete Morrey norm over every l-infinity ball centred in the support box dilated by max_radius.
double morrey_oracle(double p, double q, int R, const SampleFunction& f) {
  if (f.empty()) return 0.0;
  const std::size_t d = f.begin()->first.dimension();
  std::vector<Coord> lo(d, std::numeric_limits<Coord>::max()), hi(d, std::numeric_limits<Coord>::min());
  for (const auto& [x, v] : f) {
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  }
  double best = 0;
  for (int r = 0; r <= R; ++r) {
    std::vector<Coord> c_lo(d), c_hi(d);
    for (std::size_t i = 0; i < d; ++i) {
      c_lo[i] = lo[i] - R;
      c_hi[i] = hi[i] + R;
    }
    for (const auto& c : CompactRegion::box(LatticePoint(c_lo), LatticePoint(c_hi))) {
      double s = 0;
      for (const auto& [x, v] : f) {
        bool in = true;
        for (std::size_t i = 0; i < d; ++i) in = in && std::abs(x[i] - c[i]) <= r;
        if (in) s += std::pow(std::abs(v), q);
      }
      const double vol = std::pow(2.0 * r + 1.0, static_cast<double>(d));
      best = std::max(best, std::pow(vol, 1.0 / p - 1.0 / q) * std::pow(s, 1.0 / q));
    }
  }
  return best;
}

SampleFunction translate(const SampleFunction& f, const std::vector<Coord>& s) {
  const LatticeMap t = LatticeMap::translation(s);
  SampleFunction g;
  for (const auto& [x, v] : f) g.set(t.apply(x), v);
  return g;
}

}  // namespace

TEST(SampleFunction, ZerosArePruned) {
  SampleFunction f = SampleFunction::delta({1}, 2.0);
  f.add({1}, -2.0);
  EXPECT_TRUE(f.empty());
  SampleFunction g = SampleFunction::indicator(CompactRegion::box({0}, {2}));
  g *= 0.0;
  EXPECT_TRUE(g.empty());
  EXPECT_EQ(SampleFunction::indicator(CompactRegion::box({0}, {2})).size(), 3u);
}

TEST(SampleFunction, Arithmetic) {
  const SampleFunction a = SampleFunction::delta({0}, 1.0) + SampleFunction::delta({1}, Complex(0, 2));
  const SampleFunction b = a - SampleFunction::delta({0}, 1.0);
  EXPECT_EQ(b.size(), 1u);
  EXPECT_EQ(b({1}), Complex(0, 2));
  EXPECT_DOUBLE_EQ(a.sup_abs(), 2.0);
  const std::vector<LatticePoint> keep{{1}, {7}};
  EXPECT_EQ(a.restricted_to(keep), b);
}

TEST(EllP, KnownValues) {
  SampleFunction f = SampleFunction::delta({0}, 3.0) + SampleFunction::delta({4}, Complex(0, -4));
  EXPECT_NEAR(norm(NormSpec::ell_p(1), f), 7.0, 1e-15);
  EXPECT_NEAR(norm(NormSpec::ell_p(2), f), 5.0, 1e-15);
  EXPECT_NEAR(norm(NormSpec::ell_inf(), f), 4.0, 1e-15);
  EXPECT_EQ(norm(NormSpec::ell_p(2), SampleFunction{}), 0.0);
  EXPECT_THROW(NormSpec::ell_p(0.5), InvalidArgument);
}

TEST(EllP, LargeValuesDoNotOverflow) {
  const SampleFunction f = SampleFunction::delta({0}, 1e300) + SampleFunction::delta({1}, 1e300);
  EXPECT_NEAR(norm(NormSpec::ell_p(2), f) / 1e300, std::sqrt(2.0), 1e-12);
}

TEST(Orlicz, PowerYoungIsEllP) {
  gen::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const SampleFunction f = rng.function(1, 8, 10);
    const double p = rng.real(1.0, 4.0);
    EXPECT_LT(gen::rel_diff(norm(NormSpec::orlicz(YoungFunction::power(p), 1e-13), f), norm(NormSpec::ell_p(p), f)),
              1e-11);
  }
}

TEST(Orlicz, SingleSpike) {
  const SampleFunction f = SampleFunction::delta({2}, 5.0);
  EXPECT_NEAR(norm(NormSpec::orlicz(YoungFunction::exponential(), 1e-14), f), 5.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(norm(NormSpec::orlicz(YoungFunction::exp_square(), 1e-14), f), 5.0 / std::sqrt(std::log(2.0)), 1e-12);
}

TEST(Orlicz, MatchesBisectionOracle) {
  gen::Rng rng(4);
  const YoungFunction kinds[] = {YoungFunction::exponential(), YoungFunction::exp_square(), YoungFunction::t_log(),
                                 YoungFunction::power(1.5)};
  for (int i = 0; i < 400; ++i) {
    const YoungFunction& phi = kinds[i % 4];
    const SampleFunction f = rng.function(2, 10, 4);
    EXPECT_LT(gen::rel_diff(norm(NormSpec::orlicz(phi, 1e-13), f), luxemburg_oracle(phi, f)), 1e-11)
        << phi.name();
  }
}

TEST(Orlicz, InverseAtOne) {
  for (const auto& phi : {YoungFunction::exponential(), YoungFunction::exp_square(), YoungFunction::t_log()}) {
    EXPECT_NEAR(phi(phi.inverse_at_one()), 1.0, 1e-14) << phi.name();
  }
  EXPECT_THROW(YoungFunction::power(0.9), InvalidArgument);
}

TEST(Morrey, MatchesBruteForceBalls) {
  gen::Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    const std::size_t d = static_cast<std::size_t>(rng.integer(1, 2));
    const SampleFunction f = rng.function(d, 7, 5);
    const double q = rng.real(1.0, 2.0);
    const double p = q + rng.real(0.1, 2.0);
    const int R = static_cast<int>(rng.integer(0, 4));
    EXPECT_LT(gen::rel_diff(norm(NormSpec::morrey(p, q, R), f), morrey_oracle(p, q, R, f)), 1e-12);
  }
}

TEST(Morrey, SpikeAndPair) {
  EXPECT_NEAR(norm(NormSpec::morrey(2, 1, 20), SampleFunction::delta({0}, 3.0)), 3.0, 1e-15);
  // Two unit values 2 apart: radius 1 gives 3^{-1/2} * 2.
  const SampleFunction f = SampleFunction::delta({0}) + SampleFunction::delta({2});
  EXPECT_NEAR(norm(NormSpec::morrey(2, 1, 20), f), 2.0 / std::sqrt(3.0), 1e-15);
}

TEST(Morrey, RequiresQBelowP) {
  EXPECT_THROW(NormSpec::morrey(1.0, 1.0, 3), InvalidArgument);
  EXPECT_THROW(NormSpec::morrey(2.0, 3.0, 3), InvalidArgument);
  EXPECT_THROW(NormSpec::morrey(2.0, 0.5, 3), InvalidArgument);
  EXPECT_THROW(NormSpec::morrey(2.0, 1.0, -1), InvalidArgument);
}

TEST(NormProperties, SolidityTranslationHomogeneityTriangle) {
  gen::Rng rng(7);
  for (std::size_t i = 0; i < 1000; ++i) {
    const NormSpec spec = gen::norm_kind(i);
    const std::size_t d = 1 + i % 2;
    const SampleFunction f = rng.function(d, 6, 6);
    const SampleFunction g = rng.dominated(f);
    const double nf = norm(spec, f);
    EXPECT_LE(norm(spec, g), nf * (1 + 1e-12)) << spec.describe();
    EXPECT_LT(gen::rel_diff(norm(spec, translate(f, rng.shift(d, 20))), nf), 1e-9) << spec.describe();
    const Complex c = rng.value();
    EXPECT_LT(gen::rel_diff(norm(spec, c * f), std::abs(c) * nf), 1e-9) << spec.describe();
    const SampleFunction h = rng.function(d, 6, 6);
    EXPECT_LE(norm(spec, f + h), (nf + norm(spec, h)) * (1 + 1e-12)) << spec.describe();
  }
}

TEST(Weights, FormulaValues) {
  const WeightSpec radial = WeightSpec::radial_decay(1.0);
  EXPECT_DOUBLE_EQ(radial({0}), 1.0);
  EXPECT_DOUBLE_EQ(radial({-1}), 1.0);
  EXPECT_DOUBLE_EQ(radial({4}), 0.25);
  EXPECT_DOUBLE_EQ(WeightSpec::radial_decay(2.0)({3, 4}), 1.0 / 25.0);
  EXPECT_DOUBLE_EQ(WeightSpec::radial_decay(1.0, 0.5)({4}), 0.5);

  const WeightSpec piece = WeightSpec::piecewise_power(2.0);
  EXPECT_DOUBLE_EQ(piece({3}), 9.0);
  EXPECT_DOUBLE_EQ(piece({1}), 1.0);
  EXPECT_DOUBLE_EQ(piece({-1}), 1.0);
  EXPECT_DOUBLE_EQ(piece({-2}), 0.25);
  EXPECT_THROW(piece.value({1, 1}), WeightError);

  EXPECT_DOUBLE_EQ(WeightSpec::polynomial(2.0)({3}), 16.0);
  EXPECT_NEAR(radial.log_value({10}), -std::log(10.0), 1e-15);
}

TEST(Weights, TablesProductsComposition) {
  const WeightSpec t = WeightSpec::table({{{0}, 2.0}, {{1}, 4.0}}, 1.0);
  EXPECT_DOUBLE_EQ(t({1}), 4.0);
  EXPECT_DOUBLE_EQ(t({9}), 1.0);
  EXPECT_THROW(WeightSpec::table({{{0}, 2.0}})({3}), WeightError);
  const WeightSpec p = WeightSpec::product({t, WeightSpec::constant(3.0)});
  EXPECT_DOUBLE_EQ(p({0}), 6.0);
  EXPECT_NEAR(p.log_value({0}), std::log(6.0), 1e-15);
  EXPECT_EQ(p.constant_value(), std::nullopt);
  EXPECT_EQ(WeightSpec::product({WeightSpec::constant(2), WeightSpec::constant(3)}).constant_value(), 6.0);
  const WeightSpec c = WeightSpec::composed(t, LatticeMap::translation({1}));
  EXPECT_DOUBLE_EQ(c({0}), 4.0);
  EXPECT_THROW(WeightSpec::constant(0.0), InvalidArgument);
  EXPECT_THROW(WeightSpec::table({}, std::nullopt), InvalidArgument);
}

TEST(Weights, WeightedNormAndFlatten) {
  const WeightSpec eta = WeightSpec::radial_decay(1.0);
  const SampleFunction f = SampleFunction::delta({4}, 8.0) + SampleFunction::delta({0}, 1.0);
  EXPECT_NEAR(weighted_norm(NormSpec::ell_p(1), eta, f), 3.0, 1e-15);
  EXPECT_NEAR(weighted_norm(NormSpec::ell_p(1), eta, divide(f, eta)), norm(NormSpec::ell_p(1), f), 1e-14);
}

TEST(Weights, ValidateRadialDecayAgainstShift) {
  const WeightSpec eta = WeightSpec::radial_decay(1.0);
  const LatticeMap shift = LatticeMap::translation({-1});
  const auto region = CompactRegion::box({-6}, {6});
  double oracle = 0;
  for (const auto& x : region) {
    oracle = std::max({oracle, eta(shift.apply(x)) / eta(x), eta(shift.inverse().apply(x)) / eta(x)});
  }
  const WeightValidation v = validate_weight(eta, shift, region);
  ASSERT_TRUE(v);
  EXPECT_DOUBLE_EQ(v.k_alpha, oracle);
  EXPECT_DOUBLE_EQ(v.k_alpha, 2.0);
}

TEST(Weights, ValidateReportsNonPositive) {
  const WeightSpec bad = WeightSpec::table({{{0}, 1.0}, {{1}, -1.0}}, 1.0);
  const WeightValidation v = validate_weight(bad, LatticeMap::translation({1}), CompactRegion::box({-2}, {2}));
  EXPECT_FALSE(v);
  EXPECT_EQ(v.attained, LatticePoint{1});
  EXPECT_FALSE(v.message.empty());
  const WeightValidation miss = validate_weight(WeightSpec::table({{{0}, 1.0}}), LatticeMap::translation({1}),
                                                CompactRegion(std::vector<LatticePoint>{LatticePoint{0}}));
  EXPECT_FALSE(miss);
}

TEST(Weights, SubmultiplicativeBoundsShiftRatio) {
  // eta(x + a) <= eta(a) eta(x), so the ratio scan never exceeds eta(+-a).
  const WeightSpec eta = WeightSpec::polynomial(1.5);
  const auto region = CompactRegion::box({-4, -4}, {4, 4});
  EXPECT_EQ(submultiplicative_violation(eta, region), std::nullopt);
  const LatticeMap shift = LatticeMap::translation({1, 2});
  const WeightValidation v = validate_weight(eta, shift, region);
  ASSERT_TRUE(v);
  EXPECT_LE(v.k_alpha, std::max(eta({1, 2}), eta({-1, -2})) * (1 + 1e-12));
}

TEST(Weights, SubmultiplicativeViolationFound) {
  const WeightSpec t = WeightSpec::table({{{0}, 1.0}, {{1}, 1.0}, {{2}, 5.0}}, 1.0);
  const auto violation = submultiplicative_violation(t, CompactRegion::box({0}, {2}));
  ASSERT_TRUE(violation);
  EXPECT_GT(t(LatticePoint{(*violation).first[0] + (*violation).second[0]}),
            t((*violation).first) * t((*violation).second));
}

TEST(Weights, BoundsAndInfimum) {
  const WeightSpec eta = WeightSpec::radial_decay(1.0);
  const auto K = CompactRegion::box({-5}, {5});
  EXPECT_DOUBLE_EQ(inf_weight_on(eta, K), 0.2);
  const WeightBounds b = weight_bounds(eta, K);
  EXPECT_DOUBLE_EQ(b.sup, 1.0);
  EXPECT_DOUBLE_EQ(b.inf, 0.2);
  EXPECT_THROW(weight_bounds(WeightSpec::table({{{0}, 0.0}}, 1.0), CompactRegion(std::vector<LatticePoint>{LatticePoint{0}})), WeightError);
}
