#include "wcdyn/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace wcdyn {

// ---------------------------------------------------------------------------
// SampleFunction

SampleFunction SampleFunction::indicator(std::span<const LatticePoint> points, Complex value) {
  SampleFunction f;
  for (const auto& p : points) f.set(p, value);
  return f;
}

SampleFunction SampleFunction::indicator(const CompactRegion& region, Complex value) {
  return indicator(std::span<const LatticePoint>(region.points()), value);
}

SampleFunction SampleFunction::delta(const LatticePoint& x, Complex value) {
  SampleFunction f;
  f.set(x, value);
  return f;
}

Complex SampleFunction::operator()(const LatticePoint& x) const {
  const auto it = values_.find(x);
  return it == values_.end() ? Complex{} : it->second;
}

void SampleFunction::set(const LatticePoint& x, Complex value) {
  if (value == Complex{}) {
    values_.erase(x);
  } else {
    values_[x] = value;
  }
}

void SampleFunction::add(const LatticePoint& x, Complex value) { set(x, (*this)(x) + value); }

std::vector<LatticePoint> SampleFunction::support() const {
  std::vector<LatticePoint> pts;
  pts.reserve(values_.size());
  for (const auto& [p, v] : values_) pts.push_back(p);
  return pts;
}

double SampleFunction::sup_abs() const {
  double m = 0;
  for (const auto& [p, v] : values_) m = std::max(m, std::abs(v));
  return m;
}

SampleFunction SampleFunction::restricted_to(std::span<const LatticePoint> keep) const {
  SampleFunction out;
  for (const auto& p : keep) {
    const auto it = values_.find(p);
    if (it != values_.end()) out.values_.insert(*it);
  }
  return out;
}

SampleFunction& SampleFunction::operator+=(const SampleFunction& other) {
  for (const auto& [p, v] : other.values_) add(p, v);
  return *this;
}

SampleFunction& SampleFunction::operator-=(const SampleFunction& other) {
  for (const auto& [p, v] : other.values_) add(p, -v);
  return *this;
}

SampleFunction& SampleFunction::operator*=(Complex scalar) {
  if (scalar == Complex{}) {
    values_.clear();
    return *this;
  }
  for (auto it = values_.begin(); it != values_.end();) {
    it->second *= scalar;
    if (it->second == Complex{}) {
      it = values_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

SampleFunction operator+(SampleFunction a, const SampleFunction& b) { return a += b; }
SampleFunction operator-(SampleFunction a, const SampleFunction& b) { return a -= b; }
SampleFunction operator*(Complex s, SampleFunction f) { return f *= s; }

// ---------------------------------------------------------------------------
// Young functions

YoungFunction YoungFunction::power(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("power Young function needs finite exponent >= 1");
  return {Kind::Power, p};
}

double YoungFunction::operator()(double t) const {
  switch (kind) {
    case Kind::Power:
      return std::pow(t, exponent);
    case Kind::Exponential:
      return std::expm1(t);
    case Kind::ExpSquare:
      return std::expm1(t * t);
    case Kind::TLog:
      return t * std::log1p(t);
  }
  return 0;
}

double YoungFunction::inverse_at_one() const {
  switch (kind) {
    case Kind::Power:
      return 1.0;
    case Kind::Exponential:
      return std::log(2.0);
    case Kind::ExpSquare:
      return std::sqrt(std::log(2.0));
    case Kind::TLog: {
      double lo = 1.0, hi = 2.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((*this)(mid) < 1.0 ? lo : hi) = mid;
      }
      return hi;
    }
  }
  return 1.0;
}

std::string YoungFunction::name() const {
  switch (kind) {
    case Kind::Power: {
      std::ostringstream os;
      os << "t^" << exponent;
      return os.str();
    }
    case Kind::Exponential:
      return "exp(t)-1";
    case Kind::ExpSquare:
      return "exp(t^2)-1";
    case Kind::TLog:
      return "t*log(1+t)";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// NormSpec

NormSpec NormSpec::ell_p(double p) {
  if (!(p >= 1.0)) throw InvalidArgument("ell_p norm needs p >= 1");
  return NormSpec(EllPNorm{p});
}

NormSpec NormSpec::ell_inf() { return NormSpec(EllPNorm{std::numeric_limits<double>::infinity()}); }

NormSpec NormSpec::orlicz(YoungFunction young, double tol) {
  if (young.kind == YoungFunction::Kind::Power) young = YoungFunction::power(young.exponent);
  if (!(tol > 0.0) || !(tol < 1.0)) throw InvalidArgument("orlicz tolerance must lie in (0, 1)");
  return NormSpec(OrliczNorm{young, tol});
}

NormSpec NormSpec::morrey(double p, double q, int max_radius) {
  if (!(q >= 1.0)) throw InvalidArgument("morrey norm needs q >= 1");
  if (!(q < p)) throw InvalidArgument("morrey norm needs q < p");
  if (!std::isfinite(p)) throw InvalidArgument("morrey norm needs finite p");
  if (max_radius < 0) throw InvalidArgument("morrey max_radius must be non-negative");
  return NormSpec(MorreyNorm{p, q, max_radius});
}

std::string NormSpec::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, EllPNorm>) {
          if (std::isinf(k.p)) {
            os << "ell_inf";
          } else {
            os << "ell_p(p=" << k.p << ")";
          }
        } else if constexpr (std::is_same_v<T, OrliczNorm>) {
          os << "orlicz(" << k.young.name() << ")";
        } else {
          os << "morrey(p=" << k.p << ",q=" << k.q << ",max_radius=" << k.max_radius << ")";
        }
      },
      kind_);
  return os.str();
}

namespace {

double ell_p_norm(const EllPNorm& spec, const SampleFunction& f) {
  const double scale = f.sup_abs();
  if (scale == 0.0) return 0.0;
  if (std::isinf(spec.p)) return scale;
  double sum = 0;
  for (const auto& [x, v] : f) sum += std::pow(std::abs(v) / scale, spec.p);
  return scale * std::pow(sum, 1.0 / spec.p);
}

double luxemburg_norm(const OrliczNorm& spec, const SampleFunction& f) {
  const double scale = f.sup_abs();
  if (scale == 0.0) return 0.0;
  std::vector<double> mags;
  mags.reserve(f.size());
  double l1 = 0;
  for (const auto& [x, v] : f) {
    mags.push_back(std::abs(v) / scale);
    l1 += mags.back();
  }
  const auto modular = [&](double lambda) {
    double s = 0;
    for (double m : mags) s += spec.young(m / lambda);
    return s;
  };
  const double root = spec.young.inverse_at_one();
  // The largest term alone reaches 1 at lo; convexity puts the modular below 1 at hi.
  double lo = 1.0 / root;
  double hi = l1 / root;
  if (modular(hi) > 1.0) {
    // Rounding in the l1 bound; widen until the modular is feasible.
    while (modular(hi) > 1.0) hi *= 1.0 + 1e-12;
  }
  while (hi - lo > spec.tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (modular(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return scale * hi;
}

double morrey_norm(const MorreyNorm& spec, const SampleFunction& f) {
  const double scale = f.sup_abs();
  if (scale == 0.0) return 0.0;
  const std::size_t d = f.begin()->first.dimension();
  std::vector<LatticePoint> pts;
  std::vector<double> mass;
  for (const auto& [x, v] : f) {
    pts.push_back(x);
    mass.push_back(std::pow(std::abs(v) / scale, spec.q));
  }
  // A ball can be slid, without losing any contained support point, until every
  // lower face touches a support coordinate. So lower corners drawn from support
  // coordinates realise the supremum.
  std::vector<std::vector<Coord>> corner_values(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::set<Coord> vals;
    for (const auto& p : pts) vals.insert(p[i]);
    corner_values[i].assign(vals.begin(), vals.end());
  }
  const double exponent = 1.0 / spec.p - 1.0 / spec.q;
  double best = 0;
  std::vector<std::size_t> idx(d);
  std::vector<Coord> lo(d);
  for (int r = 0; r <= spec.max_radius; ++r) {
    const Coord width = 2 * static_cast<Coord>(r);
    const double volume = std::pow(static_cast<double>(width + 1), static_cast<double>(d));
    const double factor = std::pow(volume, exponent);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < d; ++i) lo[i] = corner_values[i][idx[i]];
      double s = 0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        bool inside = true;
        for (std::size_t i = 0; i < d && inside; ++i) inside = pts[k][i] >= lo[i] && pts[k][i] <= lo[i] + width;
        if (inside) s += mass[k];
      }
      best = std::max(best, factor * std::pow(s, 1.0 / spec.q));
      std::size_t i = 0;
      for (; i < d; ++i) {
        if (++idx[i] < corner_values[i].size()) break;
        idx[i] = 0;
      }
      if (i == d) break;
    }
  }
  return scale * best;
}

}  // namespace

double norm(const NormSpec& spec, const SampleFunction& f) {
  return std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, EllPNorm>) {
          return ell_p_norm(k, f);
        } else if constexpr (std::is_same_v<T, OrliczNorm>) {
          return luxemburg_norm(k, f);
        } else {
          return morrey_norm(k, f);
        }
      },
      spec.kind());
}

// ---------------------------------------------------------------------------
// Weights

namespace {

double scaled_euclidean(const LatticePoint& x, double scale) {
  double s = 0;
  for (std::size_t i = 0; i < x.dimension(); ++i) {
    const double c = scale * static_cast<double>(x[i]);
    s += c * c;
  }
  return std::sqrt(s);
}

void require_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("weight scale must be positive and finite");
}

}  // namespace

WeightSpec::WeightSpec(Kind kind, WeightRole role) : kind_(std::move(kind)), role_(role) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          if (!(k.value > 0.0) || !std::isfinite(k.value)) throw InvalidArgument("constant weight must be positive");
        } else if constexpr (std::is_same_v<T, weight_kind::RadialDecay> ||
                             std::is_same_v<T, weight_kind::PiecewisePower> ||
                             std::is_same_v<T, weight_kind::Polynomial>) {
          require_scale(k.scale);
        } else if constexpr (std::is_same_v<T, weight_kind::Table>) {
          if (k.values.empty() && !k.fallback) throw InvalidArgument("weight table is empty");
          if (k.fallback && (!(*k.fallback > 0.0) || !std::isfinite(*k.fallback))) {
            throw InvalidArgument("weight table fallback must be positive");
          }
        } else if constexpr (std::is_same_v<T, weight_kind::Product>) {
          if (k.factors.empty()) throw InvalidArgument("product weight needs at least one factor");
        } else if constexpr (std::is_same_v<T, weight_kind::Composed>) {
          if (!k.weight || !k.map) throw InvalidArgument("composed weight needs a weight and a map");
        }
      },
      kind_);
}

WeightSpec WeightSpec::constant(double c, WeightRole role) { return WeightSpec(weight_kind::Constant{c}, role); }

WeightSpec WeightSpec::radial_decay(double p, double scale, WeightRole role) {
  return WeightSpec(weight_kind::RadialDecay{p, scale}, role);
}

WeightSpec WeightSpec::piecewise_power(double p, double scale, WeightRole role) {
  return WeightSpec(weight_kind::PiecewisePower{p, scale}, role);
}

WeightSpec WeightSpec::polynomial(double s, double scale, WeightRole role) {
  return WeightSpec(weight_kind::Polynomial{s, scale}, role);
}

WeightSpec WeightSpec::table(std::map<LatticePoint, double> values, std::optional<double> fallback, WeightRole role) {
  return WeightSpec(weight_kind::Table{std::move(values), fallback}, role);
}

WeightSpec WeightSpec::product(std::vector<WeightSpec> factors, WeightRole role) {
  return WeightSpec(weight_kind::Product{std::move(factors)}, role);
}

WeightSpec WeightSpec::composed(const WeightSpec& weight, const LatticeMap& map, WeightRole role) {
  return WeightSpec(
      weight_kind::Composed{std::make_shared<const WeightSpec>(weight), std::make_shared<const LatticeMap>(map)}, role);
}

WeightSpec WeightSpec::with_role(WeightRole role) const {
  WeightSpec copy = *this;
  copy.role_ = role;
  return copy;
}

std::optional<double> WeightSpec::constant_value() const {
  return std::visit(
      [](const auto& k) -> std::optional<double> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          return k.value;
        } else if constexpr (std::is_same_v<T, weight_kind::Table>) {
          if (k.values.empty()) return k.fallback;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, weight_kind::Product>) {
          double v = 1.0;
          for (const auto& f : k.factors) {
            const auto c = f.constant_value();
            if (!c) return std::nullopt;
            v *= *c;
          }
          return v;
        } else if constexpr (std::is_same_v<T, weight_kind::Composed>) {
          return k.weight->constant_value();
        } else {
          return std::nullopt;
        }
      },
      kind_);
}

double WeightSpec::value(const LatticePoint& x) const {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          return k.value;
        } else if constexpr (std::is_same_v<T, weight_kind::RadialDecay>) {
          const double r = scaled_euclidean(x, k.scale);
          return r <= 1.0 ? 1.0 : std::pow(r, -k.p);
        } else if constexpr (std::is_same_v<T, weight_kind::PiecewisePower>) {
          if (x.dimension() != 1) throw WeightError("piecewise power weight is one-dimensional");
          const double t = k.scale * static_cast<double>(x[0]);
          if (t > 1.0) return std::pow(t, k.p);
          if (t < -1.0) return std::pow(-t, -k.p);
          return 1.0;
        } else if constexpr (std::is_same_v<T, weight_kind::Polynomial>) {
          return std::pow(1.0 + scaled_euclidean(x, k.scale), k.s);
        } else if constexpr (std::is_same_v<T, weight_kind::Table>) {
          const auto it = k.values.find(x);
          if (it != k.values.end()) return it->second;
          if (k.fallback) return *k.fallback;
          throw WeightError("weight table has no value at " + to_string(x));
        } else if constexpr (std::is_same_v<T, weight_kind::Product>) {
          double v = 1.0;
          for (const auto& f : k.factors) v *= f.value(x);
          return v;
        } else {
          return k.weight->value(k.map->apply(x));
        }
      },
      kind_);
}

double WeightSpec::log_value(const LatticePoint& x) const {
  if (const auto* prod = std::get_if<weight_kind::Product>(&kind_)) {
    double s = 0;
    for (const auto& f : prod->factors) s += f.log_value(x);
    return s;
  }
  if (const auto* radial = std::get_if<weight_kind::RadialDecay>(&kind_)) {
    const double r = scaled_euclidean(x, radial->scale);
    return r <= 1.0 ? 0.0 : -radial->p * std::log(r);
  }
  const double v = value(x);
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "weight value " << v << " at " << x << " is not positive and finite";
    throw WeightError(os.str());
  }
  return std::log(v);
}

std::string WeightSpec::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          os << "constant(" << k.value << ")";
        } else if constexpr (std::is_same_v<T, weight_kind::RadialDecay>) {
          os << "radial_decay(p=" << k.p << ",scale=" << k.scale << ")";
        } else if constexpr (std::is_same_v<T, weight_kind::PiecewisePower>) {
          os << "piecewise_power(p=" << k.p << ",scale=" << k.scale << ")";
        } else if constexpr (std::is_same_v<T, weight_kind::Polynomial>) {
          os << "polynomial(s=" << k.s << ",scale=" << k.scale << ")";
        } else if constexpr (std::is_same_v<T, weight_kind::Table>) {
          os << "table(" << k.values.size() << " entries)";
        } else if constexpr (std::is_same_v<T, weight_kind::Product>) {
          os << "product(";
          for (std::size_t i = 0; i < k.factors.size(); ++i) os << (i ? "," : "") << k.factors[i].describe();
          os << ")";
        } else {
          os << "composed(" << k.weight->describe() << ")";
        }
      },
      kind_);
  return os.str();
}

SampleFunction multiply(const SampleFunction& f, const WeightSpec& eta) {
  SampleFunction out;
  for (const auto& [x, v] : f) out.set(x, v * eta.value(x));
  return out;
}

SampleFunction divide(const SampleFunction& f, const WeightSpec& eta) {
  SampleFunction out;
  for (const auto& [x, v] : f) {
    const double e = eta.value(x);
    if (!(e > 0.0)) throw WeightError("cannot divide by non-positive weight at " + to_string(x));
    out.set(x, v / e);
  }
  return out;
}

double weighted_norm(const NormSpec& spec, const WeightSpec& eta, const SampleFunction& f) {
  return norm(spec, multiply(f, eta));
}

WeightValidation validate_weight(const WeightSpec& eta, const LatticeMap& map, const CompactRegion& region) {
  const LatticeMap inv = map.inverse();
  WeightValidation out;
  out.ok = true;
  out.k_alpha = 0.0;
  const auto positive = [&](const LatticePoint& p, double& v) {
    try {
      v = eta.value(p);
    } catch (const WeightError& e) {
      out = {false, 0.0, p, e.what()};
      return false;
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "weight is not positive at " << p << " (value " << v << ")";
      out = {false, 0.0, p, os.str()};
      return false;
    }
    return true;
  };
  for (const auto& x : region) {
    double ex = 0, ef = 0, eb = 0;
    if (!positive(x, ex)) return out;
    const LatticePoint fwd = map.apply(x);
    const LatticePoint bwd = inv.apply(x);
    if (!positive(fwd, ef) || !positive(bwd, eb)) return out;
    const double ratio = std::max(ef / ex, eb / ex);
    if (ratio > out.k_alpha) {
      out.k_alpha = ratio;
      out.attained = x;
    }
  }
  return out;
}

double inf_weight_on(const WeightSpec& eta, const CompactRegion& K) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& x : K) m = std::min(m, eta.value(x));
  if (!(m > 0.0)) throw WeightError("weight infimum over K is not positive");
  return m;
}

WeightBounds weight_bounds(const WeightSpec& w, const CompactRegion& region) {
  WeightBounds b{0.0, std::numeric_limits<double>::infinity()};
  for (const auto& x : region) {
    const double v = w.value(x);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw WeightError("weight is not positive and finite at " + to_string(x));
    }
    b.sup = std::max(b.sup, v);
    b.inf = std::min(b.inf, v);
  }
  return b;
}

std::optional<std::pair<LatticePoint, LatticePoint>> submultiplicative_violation(const WeightSpec& eta,
                                                                                 const CompactRegion& region,
                                                                                 double rel_tol) {
  const std::size_t d = region.dimension();
  for (const auto& x : region) {
    for (const auto& y : region) {
      std::vector<Coord> s(d);
      for (std::size_t i = 0; i < d; ++i) s[i] = x[i] + y[i];
      const LatticePoint sum(std::move(s));
      if (!region.contains(sum)) continue;
      if (eta.value(sum) > eta.value(x) * eta.value(y) * (1.0 + rel_tol)) return std::make_pair(x, y);
    }
  }
  return std::nullopt;
}

}  // namespace wcdyn
