#include "wcdyn/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace wcdyn {

namespace {

Coord checked_add(Coord a, Coord b) {
  Coord r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("lattice coordinate overflow in addition");
  return r;
}

Coord checked_mul(Coord a, Coord b) {
  Coord r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("lattice coordinate overflow in multiplication");
  return r;
}

__extension__ typedef __int128 Wide;

// Fraction-free Gaussian elimination; every division is exact.
Wide bareiss_determinant(std::vector<Wide> m, std::size_t n) {
  if (n == 0) return 1;
  Wide sign = 1;
  Wide prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k * n + k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && m[swap_row * n + k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(m[k * n + c], m[swap_row * n + c]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
      }
    }
    prev = m[k * n + k];
  }
  return sign * m[(n - 1) * n + (n - 1)];
}

Coord narrow(Wide v) {
  if (v > static_cast<Wide>(INT64_MAX) || v < static_cast<Wide>(INT64_MIN)) {
    throw OverflowError("lattice map entry exceeds 64-bit range");
  }
  return static_cast<Coord>(v);
}

Coord minor_determinant(const std::vector<Coord>& a, std::size_t n, std::size_t skip_row,
                        std::size_t skip_col) {
  std::vector<Wide> m;
  m.reserve((n - 1) * (n - 1));
  for (std::size_t r = 0; r < n; ++r) {
    if (r == skip_row) continue;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == skip_col) continue;
      m.push_back(a[r * n + c]);
    }
  }
  return narrow(bareiss_determinant(std::move(m), n - 1));
}

}  // namespace

LatticePoint::LatticePoint(std::vector<Coord> coords) : coords_(std::move(coords)) {}
LatticePoint::LatticePoint(std::initializer_list<Coord> coords) : coords_(coords) {}

std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
  os << '(';
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  return os << ')';
}

std::string to_string(const LatticePoint& p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

LatticeMap::LatticeMap(std::size_t dimension, std::vector<Coord> linear, std::vector<Coord> offset)
    : dim_(dimension), linear_(std::move(linear)), offset_(std::move(offset)) {
  if (dim_ == 0) throw InvalidArgument("lattice map dimension must be at least 1");
  if (linear_.size() != dim_ * dim_) throw InvalidArgument("lattice map matrix must be dimension x dimension");
  if (offset_.size() != dim_) throw InvalidArgument("lattice map offset must have the map dimension");
  std::vector<Wide> wide(linear_.begin(), linear_.end());
  const Wide det = bareiss_determinant(std::move(wide), dim_);
  if (det != 1 && det != -1) {
    throw InvalidArgument("lattice map linear part must have determinant +1 or -1");
  }
  det_ = static_cast<Coord>(det);
  translation_ = true;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) {
      if (linear_[r * dim_ + c] != (r == c ? 1 : 0)) translation_ = false;
    }
  }
}

LatticeMap LatticeMap::identity(std::size_t dimension) {
  return translation(std::vector<Coord>(dimension, 0));
}

LatticeMap LatticeMap::translation(std::vector<Coord> offset) {
  const std::size_t d = offset.size();
  std::vector<Coord> eye(d * d, 0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1;
  return LatticeMap(d, std::move(eye), std::move(offset));
}

bool LatticeMap::is_identity() const {
  return translation_ && std::all_of(offset_.begin(), offset_.end(), [](Coord c) { return c == 0; });
}

LatticePoint LatticeMap::apply(const LatticePoint& x) const {
  if (x.dimension() != dim_) throw InvalidArgument("point dimension does not match lattice map");
  std::vector<Coord> out(dim_);
  if (translation_) {
    for (std::size_t i = 0; i < dim_; ++i) out[i] = checked_add(x[i], offset_[i]);
    return LatticePoint(std::move(out));
  }
  for (std::size_t r = 0; r < dim_; ++r) {
    Coord acc = offset_[r];
    for (std::size_t c = 0; c < dim_; ++c) acc = checked_add(acc, checked_mul(linear_[r * dim_ + c], x[c]));
    out[r] = acc;
  }
  return LatticePoint(std::move(out));
}

LatticeMap LatticeMap::inverse() const {
  std::vector<Coord> inv(dim_ * dim_);
  if (dim_ == 1) {
    inv[0] = det_;
  } else {
    // A^{-1} = adj(A) / det(A), and det(A) = +-1.
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c) {
        Coord cof = minor_determinant(linear_, dim_, c, r);
        if ((r + c) % 2) cof = -cof;
        inv[r * dim_ + c] = checked_mul(cof, det_);
      }
    }
  }
  std::vector<Coord> off(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    Coord acc = 0;
    for (std::size_t c = 0; c < dim_; ++c) acc = checked_add(acc, checked_mul(inv[r * dim_ + c], offset_[c]));
    off[r] = checked_mul(acc, -1);
  }
  return LatticeMap(dim_, std::move(inv), std::move(off));
}

LatticeMap LatticeMap::compose(const LatticeMap& inner) const {
  if (inner.dim_ != dim_) throw InvalidArgument("cannot compose lattice maps of different dimension");
  std::vector<Coord> lin(dim_ * dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) {
      Coord acc = 0;
      for (std::size_t k = 0; k < dim_; ++k) {
        acc = checked_add(acc, checked_mul(linear_[r * dim_ + k], inner.linear_[k * dim_ + c]));
      }
      lin[r * dim_ + c] = acc;
    }
  }
  const LatticePoint shifted = apply(LatticePoint(inner.offset_));
  return LatticeMap(dim_, std::move(lin), std::vector<Coord>(shifted.coords().begin(), shifted.coords().end()));
}

LatticeMap LatticeMap::power(std::int64_t n) const {
  if (n == 0) return identity(dim_);
  if (translation_) {
    std::vector<Coord> off(dim_);
    for (std::size_t i = 0; i < dim_; ++i) off[i] = checked_mul(offset_[i], n);
    return translation(std::move(off));
  }
  LatticeMap base = n > 0 ? *this : inverse();
  std::uint64_t e = n > 0 ? static_cast<std::uint64_t>(n) : 0 - static_cast<std::uint64_t>(n);
  LatticeMap result = identity(dim_);
  while (true) {
    if (e & 1U) result = result.compose(base);
    e >>= 1U;
    if (!e) break;
    base = base.compose(base);
  }
  return result;
}

CompactRegion::CompactRegion(std::vector<LatticePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidArgument("compact region must be non-empty");
  const std::size_t d = points_.front().dimension();
  if (d == 0) throw InvalidArgument("compact region points must have dimension >= 1");
  for (const auto& p : points_) {
    if (p.dimension() != d) throw InvalidArgument("compact region points have mixed dimensions");
  }
  std::sort(points_.begin(), points_.end());
  const auto dup = std::adjacent_find(points_.begin(), points_.end());
  if (dup != points_.end()) throw InvalidArgument("compact region contains duplicate point " + to_string(*dup));
}

CompactRegion CompactRegion::box(const LatticePoint& lo, const LatticePoint& hi) {
  if (lo.dimension() != hi.dimension() || lo.dimension() == 0) {
    throw InvalidArgument("box corners must share a positive dimension");
  }
  const std::size_t d = lo.dimension();
  for (std::size_t i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) throw InvalidArgument("box lower corner exceeds upper corner");
  }
  std::vector<LatticePoint> pts;
  std::vector<Coord> cur(lo.coords().begin(), lo.coords().end());
  while (true) {
    pts.emplace_back(cur);
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (cur[i] < hi[i]) {
        ++cur[i];
        break;
      }
      cur[i] = lo[i];
    }
    if (i == d) break;
  }
  return CompactRegion(std::move(pts));
}

CompactRegion CompactRegion::euclidean_ball(std::size_t dimension, double radius) {
  if (radius < 0) throw InvalidArgument("ball radius must be non-negative");
  const auto r = static_cast<Coord>(std::floor(radius));
  const CompactRegion cube = box(LatticePoint(std::vector<Coord>(dimension, -r)),
                                 LatticePoint(std::vector<Coord>(dimension, r)));
  std::vector<LatticePoint> pts;
  for (const auto& p : cube) {
    double s = 0;
    for (std::size_t i = 0; i < dimension; ++i) s += static_cast<double>(p[i]) * static_cast<double>(p[i]);
    if (s <= radius * radius) pts.push_back(p);
  }
  return CompactRegion(std::move(pts));
}

bool CompactRegion::contains(const LatticePoint& x) const {
  return std::binary_search(points_.begin(), points_.end(), x);
}

LatticePoint iterate_point(const LatticeMap& map, std::int64_t n, const LatticePoint& x) {
  if (n == 0) return x;
  return map.power(n).apply(x);
}

std::vector<LatticePoint> image(const LatticeMap& map, std::span<const LatticePoint> pts) {
  std::vector<LatticePoint> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(map.apply(p));
  return out;
}

bool intersects(std::span<const LatticePoint> a, std::span<const LatticePoint> b) {
  const std::set<LatticePoint> lookup(a.begin(), a.end());
  return std::any_of(b.begin(), b.end(), [&](const LatticePoint& p) { return lookup.count(p) > 0; });
}

std::optional<std::int64_t> aperiodicity_bound(const LatticeMap& map, const CompactRegion& K,
                                               std::int64_t horizon) {
  if (horizon < 1) throw InvalidArgument("aperiodicity horizon must be at least 1");
  std::vector<LatticePoint> current = K.points();
  std::int64_t last_hit = 0;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    current = image(map, current);
    if (std::any_of(current.begin(), current.end(), [&](const LatticePoint& p) { return K.contains(p); })) {
      last_hit = n;
    }
  }
  if (last_hit == horizon) return std::nullopt;
  return last_hit + 1;
}

std::optional<std::int64_t> disjoint_aperiodicity_bound(std::span<const LatticeMap> maps,
                                                        std::span<const std::int64_t> powers,
                                                        const CompactRegion& K,
                                                        std::int64_t horizon) {
  if (maps.size() < 2) throw InvalidArgument("disjoint aperiodicity needs at least two maps");
  if (powers.size() != maps.size()) throw InvalidArgument("one power per map is required");
  if (horizon < 1) throw InvalidArgument("aperiodicity horizon must be at least 1");
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (powers[i] <= 0) throw InvalidArgument("powers must be positive");
    if (i > 0 && powers[i] <= powers[i - 1]) throw InvalidArgument("powers must be strictly increasing");
  }
  std::vector<LatticeMap> steps;
  for (std::size_t l = 0; l < maps.size(); ++l) steps.push_back(maps[l].power(powers[l]));

  std::vector<std::vector<LatticePoint>> images(maps.size(), K.points());
  std::int64_t last_hit = 0;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    std::set<LatticePoint> seen;
    bool hit = false;
    for (std::size_t l = 0; l < maps.size(); ++l) {
      images[l] = image(steps[l], images[l]);
      for (const auto& p : images[l]) {
        if (K.contains(p)) hit = true;
        // K's points are distinct and the maps are injective, so a repeat means two images meet.
        if (!seen.insert(p).second) hit = true;
      }
    }
    if (hit) last_hit = n;
  }
  if (last_hit == horizon) return std::nullopt;
  return last_hit + 1;
}

}  // namespace wcdyn
