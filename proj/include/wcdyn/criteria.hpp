#pragma once

// Witness-sequence searches for topological transitivity of T_{alpha,w} on F_eta,
// disjoint transitivity of powers T_1^{r_1}, ..., T_N^{r_N}, and dL-semi-transitivity
// of operator families indexed by a tail filter.
//
// Every verdict is a semi-decision: WitnessFound is certified by constructing the
// witness vectors, NoWitnessUpToHorizon only records that the finite scan failed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wcdyn/domain.hpp"
#include "wcdyn/operators.hpp"
#include "wcdyn/spaces.hpp"

namespace wcdyn {

/// The maps cannot be made disjoint aperiodic on K within the horizon.
class AperiodicityError : public Error {
 public:
  using Error::Error;
};

/// Strict inequalities are evaluated as lhs < rhs * (1 - kStrictGuard), so that
/// exact ties are never accepted on the strength of a rounding error.
inline constexpr double kStrictGuard = 1e-12;
bool strictly_below(double lhs, double rhs);
/// Non-strict inequalities accept lhs up to rhs * (1 + kStrictGuard), so that ties
/// reached through log-space evaluation are not lost to rounding.
bool at_most(double lhs, double rhs);

/// (F, eta, T_{alpha,w}) together with the region on which K_alpha and M_w are estimated.
class Scenario {
 public:
  /// Throws WeightError when eta fails the weight condition on `region`.
  Scenario(NormSpec norm, WeightSpec eta, WeightedCompositionOperator op, CompactRegion region);

  const NormSpec& norm() const { return norm_; }
  const WeightSpec& eta() const { return eta_; }
  const WeightedCompositionOperator& op() const { return op_; }
  const CompactRegion& region() const { return region_; }
  double k_alpha() const { return k_alpha_; }

 private:
  NormSpec norm_;
  WeightSpec eta_;
  WeightedCompositionOperator op_;
  CompactRegion region_;
  double k_alpha_ = 0.0;
};

class DisjointSystem {
 public:
  /// Needs at least two operators and strictly increasing positive powers.
  DisjointSystem(NormSpec norm, WeightSpec eta, std::vector<WeightedCompositionOperator> ops,
                 std::vector<std::int64_t> powers, CompactRegion region);

  const NormSpec& norm() const { return norm_; }
  const WeightSpec& eta() const { return eta_; }
  const std::vector<WeightedCompositionOperator>& operators() const { return ops_; }
  const std::vector<std::int64_t>& powers() const { return powers_; }
  const CompactRegion& region() const { return region_; }
  std::size_t size() const { return ops_.size(); }
  std::vector<LatticeMap> maps() const;
  double k_alpha() const { return k_alpha_; }

 private:
  NormSpec norm_;
  WeightSpec eta_;
  std::vector<WeightedCompositionOperator> ops_;
  std::vector<std::int64_t> powers_;
  CompactRegion region_;
  double k_alpha_ = 0.0;
};

/// alpha_{t,l}(x) = A_l x + b_l + t c_l, with symbol w_l.
struct FamilyMember {
  std::vector<Coord> linear;  ///< row-major d x d, determinant +-1
  std::vector<Coord> offset;
  std::vector<Coord> offset_per_index;
  WeightSpec symbol;
};

/// Families {T_{t,l}}_{t in S}, l = 1..N, with S = [first_index, last_index] and the
/// filter realised as tail sets {t >= t0}.
class FamilySystem {
 public:
  FamilySystem(NormSpec norm, WeightSpec eta, std::vector<FamilyMember> members, std::int64_t first_index,
               std::int64_t last_index, CompactRegion region);

  const NormSpec& norm() const { return norm_; }
  const WeightSpec& eta() const { return eta_; }
  const std::vector<FamilyMember>& members() const { return members_; }
  std::int64_t first_index() const { return first_; }
  std::int64_t last_index() const { return last_; }
  const CompactRegion& region() const { return region_; }
  std::size_t size() const { return members_.size(); }

  LatticeMap map(std::int64_t t, std::size_t l) const;
  WeightedCompositionOperator op(std::int64_t t, std::size_t l) const;

 private:
  NormSpec norm_;
  WeightSpec eta_;
  std::vector<FamilyMember> members_;
  std::int64_t first_;
  std::int64_t last_;
  CompactRegion region_;
};

// ---------------------------------------------------------------------------
// Reports

enum class Verdict { WitnessFound, NoWitnessUpToHorizon };
std::string to_string(Verdict v);

/// One accepted n_k. Per-operator vectors have one entry per operator (one for
/// the single-operator criterion); `gamma` is indexed like DisjointPairs.
struct Stage {
  int k = 0;
  std::int64_t n = 0;
  double tau = 0.0;         ///< threshold m_K / 2^k defining E_k
  double chi_target = 0.0;  ///< 4 / 2^k
  std::vector<double> sup_forward;
  std::vector<double> sup_backward;
  std::vector<double> gamma;
  double chi_residual = 0.0;  ///< ||chi_{K \ E_k}||_F
  std::vector<LatticePoint> E;

  double max_sup_forward() const;
  double max_sup_backward() const;
  double gamma_max() const;
};

/// Range of sup_K of the forward / backward terms over every scanned n.
struct ScanProfile {
  std::int64_t scanned = 0;
  double min_sup_forward = 0.0;
  double max_sup_forward = 0.0;
  double min_sup_backward = 0.0;
  double max_sup_backward = 0.0;
};

struct StageCertificate {
  std::int64_t index = 0;  ///< stage k, or family index t
  double residual_source = 0.0;
  std::vector<double> residual_targets;
  double bound_source = 0.0;
  std::vector<double> bound_targets;
  bool passed = false;
};

struct Certification {
  bool performed = false;
  bool passed = false;
  std::vector<StageCertificate> stages;
  std::string note;
};

/// Ordered pairs (l, s), l != s, in the order used by Stage::gamma.
std::vector<std::pair<std::size_t, std::size_t>> disjoint_pairs(std::size_t n_operators);

struct CriterionReport {
  Verdict verdict = Verdict::NoWitnessUpToHorizon;
  std::vector<LatticePoint> K;
  double m_K = 0.0;
  double k_alpha = 0.0;
  double operator_bound = 0.0;  ///< max over operators of M_w K_alpha
  std::int64_t horizon = 0;
  double tol = 0.0;
  /// Single operator: aperiodicity bound of alpha on K (reported, not required).
  /// Disjoint: the disjoint aperiodicity bound M that every n_k respects.
  std::optional<std::int64_t> aperiodicity_bound;
  std::vector<std::int64_t> powers;  ///< empty for the single-operator criterion
  std::vector<Stage> stages;
  ScanProfile profile;
  Certification certification;
  std::string note;
};

using DisjointReport = CriterionReport;

struct TailEntry {
  std::int64_t t = 0;
  bool aperiodic = false;
  bool pass_chi = false;
  bool pass_product = false;
  bool pass_cross = false;
  double chi_residual = 0.0;
  std::vector<double> sup_forward;   ///< sup_E (eta o alpha_{t,l}) / w_{t,l}
  std::vector<double> sup_backward;  ///< sup_E (eta o alpha_{t,l}^{-1}) (w_{t,l} o alpha_{t,l}^{-1})
  double max_product = 0.0;
  double max_cross = 0.0;
  double lambda = 1.0;
  std::vector<LatticePoint> E;

  bool qualifies() const { return aperiodic && pass_chi && pass_product && pass_cross; }
};

struct EpsilonReport {
  bool tail_found = false;
  std::optional<std::int64_t> tail_start;
  std::vector<LatticePoint> K;
  double epsilon = 0.0;
  double m_K = 0.0;
  double chi_bound = 0.0;      ///< (4 + 2N) N epsilon
  double product_bound = 0.0;  ///< m_K^2 eps^2 / (1 - eps)^2
  double cross_bound = 0.0;    ///< m_K eps / (1 - eps)
  double k_alpha = 0.0;        ///< max over scanned t and l
  std::vector<TailEntry> entries;
  Certification certification;

  const TailEntry& entry(std::int64_t t) const;
};

// ---------------------------------------------------------------------------
// Criterion quantities (all evaluated in log space)

/// log[(eta o alpha^n)(x) prod_{j=0}^{n-1} (w o alpha^j)^{-1}(x)].
double log_lambda_forward(const Scenario& sc, std::int64_t n, const LatticePoint& x);
/// log[(eta o alpha^{-n})(x) prod_{j=1}^{n} (w o alpha^{-j})(x)].
double log_lambda_backward(const Scenario& sc, std::int64_t n, const LatticePoint& x);
double lambda_forward(const Scenario& sc, std::int64_t n, const LatticePoint& x);
double lambda_backward(const Scenario& sc, std::int64_t n, const LatticePoint& x);

/// The cross term for distinct operator indices s and l (0-based):
/// (eta o alpha_l^{-r_l n} o alpha_s^{r_s n})(x) * prod_{j=1}^{r_l n} (w_l o alpha_l^{-j} o alpha_s^{r_s n})(x)
///   / prod_{j=0}^{r_s n - 1} (w_s o alpha_s^j)(x).
double log_gamma_cross(const DisjointSystem& sys, std::size_t s, std::size_t l, std::int64_t n, const LatticePoint& x);
double gamma_cross(const DisjointSystem& sys, std::size_t s, std::size_t l, std::int64_t n, const LatticePoint& x);

// ---------------------------------------------------------------------------
// Checks

/// Scans n = 1..horizon. Stage k accepts the first n above n_{k-1} whose set
/// E = {x in K : both terms <= m_K / 2^k} leaves ||chi_{K\E}||_F <= 4 / 2^k, and
/// the scan stops with WitnessFound once a stage has both sups and the chi
/// residual at or below tol. Found witnesses are certified before returning.
CriterionReport check_transitivity(const Scenario& sc, const CompactRegion& K, std::int64_t horizon, double tol);

/// As check_transitivity with thresholds applied to every forward, backward and
/// cross term, scanning only n at or beyond the disjoint aperiodicity bound.
/// Throws AperiodicityError when no such bound exists within the horizon.
DisjointReport check_disjoint_transitivity(const DisjointSystem& sys, const CompactRegion& K, std::int64_t horizon,
                                           double tol);

/// Evaluates every t in S with
/// E_t = {x in K : all forward, backward and cross terms < m_K eps / (1 - eps)}
/// and reports the smallest t0 such that every t >= t0 satisfies the three
/// conditions and the family's disjoint aperiodicity on K.
EpsilonReport check_semi_transitivity(const FamilySystem& fam, const CompactRegion& K, double epsilon);

}  // namespace wcdyn
