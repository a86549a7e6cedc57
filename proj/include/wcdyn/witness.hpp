#pragma once

// Explicit witness vectors for the transitivity criteria, the residual bounds
// they must satisfy, and an independent feasibility search.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcdyn/criteria.hpp"

namespace wcdyn {

struct WitnessVector {
  SampleFunction v;
  std::int64_t index = 0;  ///< stage k, or family index t
  double residual_source = 0.0;
  std::vector<double> residual_targets;
  double scaling = 1.0;  ///< lambda applied to the targets; 1 outside the supercyclic case
};

/// f_tilde / eta. Its weighted norm equals the plain norm of f_tilde.
SampleFunction flatten(const SampleFunction& f_tilde, const WeightSpec& eta);

/// v = f * chi_E + S^{n_k}(g * chi_E), with residuals ||v - f|| and ||T^{n_k} v - g|| in F_eta.
/// f and g are already flattened and must be supported in the report's K.
WitnessVector build_witness(const Scenario& sc, const CriterionReport& report, const SampleFunction& f,
                            const SampleFunction& g, int k);

/// v = f * chi_E + sum_s S_s^{r_s n_k}(g_s * chi_E), residual l is ||T_l^{r_l n_k} v - g_l||.
WitnessVector build_witness(const DisjointSystem& sys, const DisjointReport& report, const SampleFunction& f,
                            std::span<const SampleFunction> g, int k);

/// v_t = f chi_E + rho_t sum_s T_{t,s}^{-1}(g_s chi_E), with
/// rho_t = sqrt(sum_l sup_E backward_l) / sqrt(sum_l sup_E forward_l); targets are
/// compared against lambda_t T_{t,s} v_t with lambda_t = 1 / rho_t.
WitnessVector build_supercyclic_witness(const FamilySystem& fam, const EpsilonReport& report, std::int64_t t,
                                        const SampleFunction& f, std::span<const SampleFunction> g);

/// Upper bounds on the witness residuals obtained by chaining solidity, the
/// alpha-invariance of ||.||_F and eta >= m_K on K:
///   source   <= sum_s fwd_s / m_K ||g~_s||_F + ||f~||_inf ||chi_{K\E}||_F
///   target_l <= bwd_l / m_K ||f~||_F + sum_{s != l} cross_{l,s} / m_K ||g~_s||_F + ||g~_l||_inf ||chi_{K\E}||_F
/// where f~ = f eta, g~ = g eta.
struct ResidualBounds {
  double source = 0.0;
  std::vector<double> targets;
};

ResidualBounds residual_bounds(const NormSpec& norm, const WeightSpec& eta, double m_K, const Stage& stage,
                               const SampleFunction& f, std::span<const SampleFunction> g);
ResidualBounds residual_bounds(const FamilySystem& fam, const EpsilonReport& report, const TailEntry& entry,
                               const SampleFunction& f, std::span<const SampleFunction> g);

/// Builds the witness for every stage with f~ = g~_l = chi_K and checks each
/// residual against its bound (relative slack 1e-9, absolute 1e-12).
Certification certify(const Scenario& sc, const CriterionReport& report);
Certification certify(const DisjointSystem& sys, const DisjointReport& report);
Certification certify(const FamilySystem& fam, const EpsilonReport& report);

/// The radius choice of the converse argument: min{1/2, delta / ((4 + 2N) N (m_K + C))}.
double epsilon_for(double delta, std::size_t n_operators, double m_K, double C);

// ---------------------------------------------------------------------------
// Feasibility search

/// Find h with ||h - source|| < eps and ||scale_c T_c^{power_c} h - target_c|| < eps
/// for every constraint c, all norms in F_eta.
struct FeasibilityConstraint {
  WeightedCompositionOperator op;
  std::int64_t power = 1;
  double scale = 1.0;
  SampleFunction target;
};

struct FeasibilityProblem {
  NormSpec norm;
  WeightSpec eta;
  SampleFunction source;
  std::vector<FeasibilityConstraint> constraints;
};

struct FeasibilityResult {
  bool feasible = false;
  SampleFunction h;
  double residual_source = 0.0;
  std::vector<double> residual_targets;
  std::string method;  ///< "guided", "projection" or "inconclusive"
  int iterations = 0;
};

/// Residuals of h against every constraint, by direct norm evaluation.
FeasibilityResult evaluate_candidate(const FeasibilityProblem& problem, const SampleFunction& h);

/// Tries the guided candidate source chi_E + sum_c (scale_c T_c^{power_c})^{-1}(target_c chi_E)
/// (E defaults to all points), then alternating projections: radial onto the source ball and
/// per-point weighted with a bisected multiplier onto each constraint preimage ball, for at
/// most max_iters sweeps, stopping early on stalled progress.
FeasibilityResult feasibility_oracle(const FeasibilityProblem& problem, double eps, int max_iters = 500,
                                     std::optional<std::vector<LatticePoint>> guide_set = std::nullopt);

/// Single-operator form: h near f with T^n h near g.
FeasibilityResult feasibility_oracle(const NormSpec& norm, const WeightSpec& eta, const WeightedCompositionOperator& T,
                                     std::int64_t n, const SampleFunction& f, const SampleFunction& g, double eps,
                                     int max_iters = 500);

}  // namespace wcdyn
