#include "wcdyn/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace wcdyn {

namespace {

using nlohmann::json;

const char* kSemantics =
    "WitnessFound is certified by explicit witness vectors; NoWitnessUpToHorizon is evidence from a finite scan, "
    "not a proof";

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json points(const std::vector<LatticePoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(to_json(p));
  return a;
}

json to_json(const Certification& c) {
  json stages = json::array();
  for (const auto& s : c.stages) {
    stages.push_back({{"index", s.index},
                      {"residual_source", num(s.residual_source)},
                      {"residual_targets", nums(s.residual_targets)},
                      {"bound_source", num(s.bound_source)},
                      {"bound_targets", nums(s.bound_targets)},
                      {"passed", s.passed}});
  }
  return {{"performed", c.performed}, {"passed", c.passed}, {"note", c.note}, {"stages", stages}};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const LatticePoint& p) {
  json a = json::array();
  for (Coord c : p.coords()) a.push_back(c);
  return a;
}

json to_json(const CriterionReport& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"k", s.k},
                      {"n", s.n},
                      {"tau", num(s.tau)},
                      {"chi_target", num(s.chi_target)},
                      {"chi_residual", num(s.chi_residual)},
                      {"sup_forward", nums(s.sup_forward)},
                      {"sup_backward", nums(s.sup_backward)},
                      {"gamma", nums(s.gamma)},
                      {"gamma_max", num(s.gamma_max())},
                      {"E", points(s.E)}});
  }
  json doc;
  doc["verdict"] = to_string(r.verdict);
  doc["semantics"] = kSemantics;
  doc["K"] = points(r.K);
  doc["m_K"] = num(r.m_K);
  doc["k_alpha"] = num(r.k_alpha);
  doc["operator_bound"] = num(r.operator_bound);
  doc["horizon"] = r.horizon;
  doc["tol"] = num(r.tol);
  doc["aperiodicity_bound"] = r.aperiodicity_bound ? json(*r.aperiodicity_bound) : json(nullptr);
  doc["powers"] = r.powers;
  doc["stages"] = stages;
  doc["profile"] = {{"scanned", r.profile.scanned},
                    {"min_sup_forward", num(r.profile.min_sup_forward)},
                    {"max_sup_forward", num(r.profile.max_sup_forward)},
                    {"min_sup_backward", num(r.profile.min_sup_backward)},
                    {"max_sup_backward", num(r.profile.max_sup_backward)}};
  doc["certification"] = to_json(r.certification);
  doc["note"] = r.note;
  return doc;
}

json to_json(const EpsilonReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"t", e.t},
                       {"aperiodic", e.aperiodic},
                       {"pass_chi", e.pass_chi},
                       {"pass_product", e.pass_product},
                       {"pass_cross", e.pass_cross},
                       {"qualifies", e.qualifies()},
                       {"chi_residual", num(e.chi_residual)},
                       {"sup_forward", nums(e.sup_forward)},
                       {"sup_backward", nums(e.sup_backward)},
                       {"max_product", num(e.max_product)},
                       {"max_cross", num(e.max_cross)},
                       {"lambda", num(e.lambda)},
                       {"E", points(e.E)}});
  }
  json doc;
  doc["verdict"] = r.tail_found ? "TailFound" : "NoTail";
  doc["semantics"] =
      "TailFound is certified by explicit witness vectors on every index of the tail; NoTail only covers the "
      "scanned index range";
  doc["tail_start"] = r.tail_start ? json(*r.tail_start) : json(nullptr);
  doc["K"] = points(r.K);
  doc["epsilon"] = num(r.epsilon);
  doc["m_K"] = num(r.m_K);
  doc["chi_bound"] = num(r.chi_bound);
  doc["product_bound"] = num(r.product_bound);
  doc["cross_bound"] = num(r.cross_bound);
  doc["k_alpha"] = num(r.k_alpha);
  doc["entries"] = entries;
  doc["certification"] = to_json(r.certification);
  return doc;
}

std::string transitive_curves(const CriterionReport& r) {
  std::ostringstream os;
  os << "k,n_k,sup_forward,sup_backward,chi_residual\n";
  for (const auto& s : r.stages) {
    os << s.k << ',' << s.n << ',' << format_number(s.max_sup_forward()) << ','
       << format_number(s.max_sup_backward()) << ',' << format_number(s.chi_residual) << '\n';
  }
  return os.str();
}

std::string disjoint_curves(const DisjointReport& r) {
  const auto pairs = disjoint_pairs(r.powers.size());
  std::ostringstream os;
  os << "k,n_k,sup_forward,sup_backward,gamma_max";
  for (const auto& [l, s] : pairs) os << ",gamma_l" << l + 1 << "_s" << s + 1;
  os << ",chi_residual\n";
  for (const auto& st : r.stages) {
    os << st.k << ',' << st.n << ',' << format_number(st.max_sup_forward()) << ','
       << format_number(st.max_sup_backward()) << ',' << format_number(st.gamma_max());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      os << ',' << format_number(p < st.gamma.size() ? st.gamma[p] : 0.0);
    }
    os << ',' << format_number(st.chi_residual) << '\n';
  }
  return os.str();
}

std::string semi_curves(const EpsilonReport& r) {
  std::ostringstream os;
  os << "t,pass_chi,pass_product,pass_cross,lambda_t\n";
  for (const auto& e : r.entries) {
    os << e.t << ',' << (e.pass_chi ? 1 : 0) << ',' << (e.pass_product ? 1 : 0) << ',' << (e.pass_cross ? 1 : 0)
       << ',' << format_number(e.lambda) << '\n';
  }
  return os.str();
}

}  // namespace wcdyn
