#pragma once

// Finitely supported functions on the lattice, solid norms, and weights.

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wcdyn/domain.hpp"

namespace wcdyn {

using Complex = std::complex<double>;

/// A weight produced a non-positive or non-finite value, or has no value at a point.
class WeightError : public Error {
 public:
  using Error::Error;
};

/// Finitely supported complex function on Z^d. Zero values are never stored, so
/// two functions compare equal exactly when they agree pointwise.
class SampleFunction {
 public:
  using Storage = std::map<LatticePoint, Complex>;

  SampleFunction() = default;

  /// Characteristic function of `points`, scaled by `value`.
  static SampleFunction indicator(std::span<const LatticePoint> points, Complex value = 1.0);
  static SampleFunction indicator(const CompactRegion& region, Complex value = 1.0);
  static SampleFunction delta(const LatticePoint& x, Complex value = 1.0);

  Complex operator()(const LatticePoint& x) const;
  void set(const LatticePoint& x, Complex value);
  void add(const LatticePoint& x, Complex value);

  const Storage& values() const { return values_; }
  std::vector<LatticePoint> support() const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double sup_abs() const;

  /// Pointwise restriction to the given point set.
  SampleFunction restricted_to(std::span<const LatticePoint> keep) const;

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  SampleFunction& operator+=(const SampleFunction& other);
  SampleFunction& operator-=(const SampleFunction& other);
  SampleFunction& operator*=(Complex scalar);

  bool operator==(const SampleFunction&) const = default;

 private:
  Storage values_;
};

SampleFunction operator+(SampleFunction a, const SampleFunction& b);
SampleFunction operator-(SampleFunction a, const SampleFunction& b);
SampleFunction operator*(Complex s, SampleFunction f);

// ---------------------------------------------------------------------------
// Norms

/// Young function for Orlicz norms.
struct YoungFunction {
  enum class Kind { Power, Exponential, ExpSquare, TLog };
  Kind kind = Kind::Power;
  double exponent = 2.0;  ///< only for Power, t^exponent with exponent >= 1

  static YoungFunction power(double p);
  static YoungFunction exponential() { return {Kind::Exponential, 1.0}; }
  static YoungFunction exp_square() { return {Kind::ExpSquare, 1.0}; }
  static YoungFunction t_log() { return {Kind::TLog, 1.0}; }

  double operator()(double t) const;
  /// The t > 0 with Phi(t) = 1.
  double inverse_at_one() const;
  std::string name() const;
};

struct EllPNorm {
  double p = 1.0;  ///< p >= 1; +infinity selects the sup norm
};

struct OrliczNorm {
  YoungFunction young;
  double tol = 1e-10;  ///< relative bracket width of the Luxemburg bisection
};

/// sup over l-infinity lattice balls B of |B|^{1/p - 1/q} (sum_B |f|^q)^{1/q}.
struct MorreyNorm {
  double p = 2.0;
  double q = 1.0;
  int max_radius = 10;
};

class NormSpec {
 public:
  using Kind = std::variant<EllPNorm, OrliczNorm, MorreyNorm>;

  static NormSpec ell_p(double p);
  static NormSpec ell_inf();
  static NormSpec orlicz(YoungFunction young, double tol = 1e-10);
  static NormSpec morrey(double p, double q, int max_radius);

  const Kind& kind() const { return kind_; }
  std::string describe() const;

 private:
  explicit NormSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

double norm(const NormSpec& spec, const SampleFunction& f);

// ---------------------------------------------------------------------------
// Weights

enum class WeightRole { Eta, Symbol };

class WeightSpec;

namespace weight_kind {
struct Constant {
  double value = 1.0;
};
/// 1 on the closed unit ball of the scaled coordinates, |h x|^{-p} outside.
struct RadialDecay {
  double p = 1.0;
  double scale = 1.0;
};
/// One-dimensional: |h x|^p right of 1, 1 on [-1, 1], |h x|^{-p} left of -1.
struct PiecewisePower {
  double p = 2.0;
  double scale = 1.0;
};
/// (1 + |h x|)^s, submultiplicative on Z^d for s >= 0.
struct Polynomial {
  double s = 1.0;
  double scale = 1.0;
};
struct Table {
  std::map<LatticePoint, double> values;
  std::optional<double> fallback;
};
struct Product {
  std::vector<WeightSpec> factors;
};
/// weight(map(x)).
struct Composed {
  std::shared_ptr<const WeightSpec> weight;
  std::shared_ptr<const LatticeMap> map;
};
}  // namespace weight_kind

class WeightSpec {
 public:
  using Kind = std::variant<weight_kind::Constant, weight_kind::RadialDecay, weight_kind::PiecewisePower,
                            weight_kind::Polynomial, weight_kind::Table, weight_kind::Product,
                            weight_kind::Composed>;

  WeightSpec(Kind kind, WeightRole role = WeightRole::Eta);

  static WeightSpec constant(double c, WeightRole role = WeightRole::Eta);
  static WeightSpec radial_decay(double p, double scale = 1.0, WeightRole role = WeightRole::Eta);
  static WeightSpec piecewise_power(double p, double scale = 1.0, WeightRole role = WeightRole::Eta);
  static WeightSpec polynomial(double s, double scale = 1.0, WeightRole role = WeightRole::Eta);
  static WeightSpec table(std::map<LatticePoint, double> values, std::optional<double> fallback = std::nullopt,
                          WeightRole role = WeightRole::Eta);
  static WeightSpec product(std::vector<WeightSpec> factors, WeightRole role = WeightRole::Eta);
  static WeightSpec composed(const WeightSpec& weight, const LatticeMap& map, WeightRole role = WeightRole::Eta);

  const Kind& kind() const { return kind_; }
  WeightRole role() const { return role_; }
  WeightSpec with_role(WeightRole role) const;

  /// The constant value when the weight does not depend on x.
  std::optional<double> constant_value() const;

  /// Raw evaluation; may be non-positive for ill-formed tables. Throws WeightError
  /// for a table miss without fallback.
  double value(const LatticePoint& x) const;
  /// log(value(x)); throws WeightError unless value(x) is positive and finite.
  double log_value(const LatticePoint& x) const;
  double operator()(const LatticePoint& x) const { return value(x); }

  std::string describe() const;

 private:
  Kind kind_;
  WeightRole role_;
};

/// Pointwise product f * eta on the support of f.
SampleFunction multiply(const SampleFunction& f, const WeightSpec& eta);
/// Pointwise quotient f / eta on the support of f.
SampleFunction divide(const SampleFunction& f, const WeightSpec& eta);

/// ||f||_{F_eta} = ||f eta||_F.
double weighted_norm(const NormSpec& spec, const WeightSpec& eta, const SampleFunction& f);

/// Outcome of checking the two-sided weight condition on a region.
struct WeightValidation {
  bool ok = false;
  double k_alpha = 0.0;   ///< max ratio found, when ok
  LatticePoint attained;  ///< point where k_alpha is attained, or the offending point
  std::string message;    ///< violation description, when not ok

  explicit operator bool() const { return ok; }
};

/// Estimates K_alpha = max over region of max(eta(alpha x), eta(alpha^{-1} x)) / eta(x).
WeightValidation validate_weight(const WeightSpec& eta, const LatticeMap& map, const CompactRegion& region);

/// min of eta over K. Throws WeightError if that minimum is not positive.
double inf_weight_on(const WeightSpec& eta, const CompactRegion& K);

struct WeightBounds {
  double sup = 0.0;
  double inf = 0.0;
};

/// Exact max and min over the finite region; throws WeightError on non-positive values.
WeightBounds weight_bounds(const WeightSpec& w, const CompactRegion& region);

/// Searches for x, y in region with x + y in region and eta(x + y) > eta(x) eta(y).
std::optional<std::pair<LatticePoint, LatticePoint>> submultiplicative_violation(const WeightSpec& eta,
                                                                                 const CompactRegion& region,
                                                                                 double rel_tol = 1e-12);

}  // namespace wcdyn
