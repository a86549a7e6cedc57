#pragma once

// Integer lattices Z^d, unimodular affine self-maps, and orbit enumeration.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wcdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer arithmetic left the representable coordinate range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A precondition or parameter range was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

using Coord = std::int64_t;

class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(std::vector<Coord> coords);
  LatticePoint(std::initializer_list<Coord> coords);

  std::size_t dimension() const { return coords_.size(); }
  Coord operator[](std::size_t i) const { return coords_[i]; }
  std::span<const Coord> coords() const { return coords_; }

  auto operator<=>(const LatticePoint&) const = default;
  bool operator==(const LatticePoint&) const = default;

 private:
  std::vector<Coord> coords_;
};

std::ostream& operator<<(std::ostream& os, const LatticePoint& p);
std::string to_string(const LatticePoint& p);

/// x -> A x + b with A an integer matrix of determinant +-1. All arithmetic is
/// exact; any intermediate overflow raises OverflowError instead of wrapping.
class LatticeMap {
 public:
  /// `linear` is row-major, dimension x dimension.
  LatticeMap(std::size_t dimension, std::vector<Coord> linear, std::vector<Coord> offset);

  static LatticeMap identity(std::size_t dimension);
  static LatticeMap translation(std::vector<Coord> offset);

  std::size_t dimension() const { return dim_; }
  const std::vector<Coord>& linear() const { return linear_; }
  const std::vector<Coord>& offset() const { return offset_; }
  Coord entry(std::size_t row, std::size_t col) const { return linear_[row * dim_ + col]; }

  bool is_translation() const { return translation_; }
  bool is_identity() const;
  Coord determinant() const { return det_; }

  LatticePoint apply(const LatticePoint& x) const;
  LatticePoint operator()(const LatticePoint& x) const { return apply(x); }

  /// Exact inverse; the linear part is inverted through its integer adjugate.
  LatticeMap inverse() const;
  /// (this o inner)(x) = this(inner(x)).
  LatticeMap compose(const LatticeMap& inner) const;
  /// n-fold composition; negative n composes the inverse. Uses repeated squaring.
  LatticeMap power(std::int64_t n) const;

  bool operator==(const LatticeMap&) const = default;

 private:
  std::size_t dim_;
  std::vector<Coord> linear_;
  std::vector<Coord> offset_;
  Coord det_ = 1;
  bool translation_ = false;
};

/// A finite, non-empty set of lattice points of a common dimension, stored sorted.
class CompactRegion {
 public:
  /// Rejects empty input, duplicate points and mixed dimensions.
  explicit CompactRegion(std::vector<LatticePoint> points);

  /// All lattice points with lo <= x <= hi componentwise.
  static CompactRegion box(const LatticePoint& lo, const LatticePoint& hi);
  /// Lattice points of Euclidean norm at most `radius` (in lattice units).
  static CompactRegion euclidean_ball(std::size_t dimension, double radius);

  const std::vector<LatticePoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return points_.front().dimension(); }
  bool contains(const LatticePoint& x) const;

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<LatticePoint> points_;
};

/// alpha^n(x), exact. n = 0 is the identity, n < 0 uses the exact inverse.
LatticePoint iterate_point(const LatticeMap& map, std::int64_t n, const LatticePoint& x);

/// Smallest N <= horizon with K and alpha^n(K) disjoint for every n in [N, horizon];
/// empty when the last checked iterate still meets K. This is a finite-horizon
/// semi-decision of aperiodicity on K, not a proof.
std::optional<std::int64_t> aperiodicity_bound(const LatticeMap& map, const CompactRegion& K,
                                               std::int64_t horizon);

/// Smallest M <= horizon such that for every n in [M, horizon] each image
/// alpha_l^{r_l n}(K) misses K and the images are pairwise disjoint.
std::optional<std::int64_t> disjoint_aperiodicity_bound(std::span<const LatticeMap> maps,
                                                        std::span<const std::int64_t> powers,
                                                        const CompactRegion& K,
                                                        std::int64_t horizon);

/// True when the finite point sets intersect.
bool intersects(std::span<const LatticePoint> a, std::span<const LatticePoint> b);

std::vector<LatticePoint> image(const LatticeMap& map, std::span<const LatticePoint> pts);

}  // namespace wcdyn
