#pragma once

// JSON documents and CSV curves for criterion reports.

#include <string>

#include <json.hpp>

#include "wcdyn/criteria.hpp"

namespace wcdyn {

nlohmann::json to_json(const LatticePoint& p);
nlohmann::json to_json(const CriterionReport& report);
nlohmann::json to_json(const EpsilonReport& report);

/// %.17g, with inf and nan spelled out.
std::string format_number(double v);

/// k,n_k,sup_forward,sup_backward,chi_residual, one row per stage.
std::string transitive_curves(const CriterionReport& report);
/// Adds gamma_max and one gamma_l<l>_s<s> column per ordered pair (1-based).
std::string disjoint_curves(const DisjointReport& report);
/// t,pass_chi,pass_product,pass_cross,lambda_t, one row per evaluated t.
std::string semi_curves(const EpsilonReport& report);

}  // namespace wcdyn
