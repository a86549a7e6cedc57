#include "wcdyn/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "wcdyn/witness.hpp"

namespace wcdyn {

bool strictly_below(double lhs, double rhs) { return lhs < rhs * (1.0 - kStrictGuard); }
bool at_most(double lhs, double rhs) { return lhs <= rhs * (1.0 + kStrictGuard); }

std::string to_string(Verdict v) {
  return v == Verdict::WitnessFound ? "WitnessFound" : "NoWitnessUpToHorizon";
}

namespace {

double max_or_zero(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double validated_k_alpha(const WeightSpec& eta, const LatticeMap& map, const CompactRegion& region) {
  const WeightValidation v = validate_weight(eta, map, region);
  if (!v) throw WeightError("eta is not a weight on the validation region: " + v.message);
  return v.k_alpha;
}

void require_dimension(const CompactRegion& K, std::size_t d, const char* what) {
  if (K.dimension() != d) throw InvalidArgument(std::string(what) + " dimension does not match the maps");
}

}  // namespace

double Stage::max_sup_forward() const { return max_or_zero(sup_forward); }
double Stage::max_sup_backward() const { return max_or_zero(sup_backward); }
double Stage::gamma_max() const { return max_or_zero(gamma); }

std::vector<std::pair<std::size_t, std::size_t>> disjoint_pairs(std::size_t n_operators) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t l = 0; l < n_operators; ++l) {
    for (std::size_t s = 0; s < n_operators; ++s) {
      if (s != l) pairs.emplace_back(l, s);
    }
  }
  return pairs;
}

const TailEntry& EpsilonReport::entry(std::int64_t t) const {
  for (const auto& e : entries) {
    if (e.t == t) return e;
  }
  throw InvalidArgument("index " + std::to_string(t) + " was not evaluated in this report");
}

// ---------------------------------------------------------------------------
// Systems

Scenario::Scenario(NormSpec norm, WeightSpec eta, WeightedCompositionOperator op, CompactRegion region)
    : norm_(std::move(norm)),
      eta_(eta.with_role(WeightRole::Eta)),
      op_(std::move(op)),
      region_(std::move(region)) {
  require_dimension(region_, op_.map().dimension(), "scenario region");
  k_alpha_ = validated_k_alpha(eta_, op_.map(), region_);
}

DisjointSystem::DisjointSystem(NormSpec norm, WeightSpec eta, std::vector<WeightedCompositionOperator> ops,
                               std::vector<std::int64_t> powers, CompactRegion region)
    : norm_(std::move(norm)),
      eta_(eta.with_role(WeightRole::Eta)),
      ops_(std::move(ops)),
      powers_(std::move(powers)),
      region_(std::move(region)) {
  if (ops_.size() < 2) throw InvalidArgument("a disjoint system needs at least two operators");
  if (powers_.size() != ops_.size()) throw InvalidArgument("a disjoint system needs one power per operator");
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    if (powers_[i] <= 0) throw InvalidArgument("disjoint powers must be positive");
    if (i > 0 && powers_[i] <= powers_[i - 1]) throw InvalidArgument("disjoint powers must be strictly increasing");
  }
  for (const auto& op : ops_) {
    require_dimension(region_, op.map().dimension(), "disjoint system region");
    k_alpha_ = std::max(k_alpha_, validated_k_alpha(eta_, op.map(), region_));
  }
}

std::vector<LatticeMap> DisjointSystem::maps() const {
  std::vector<LatticeMap> out;
  for (const auto& op : ops_) out.push_back(op.map());
  return out;
}

FamilySystem::FamilySystem(NormSpec norm, WeightSpec eta, std::vector<FamilyMember> members,
                           std::int64_t first_index, std::int64_t last_index, CompactRegion region)
    : norm_(std::move(norm)),
      eta_(eta.with_role(WeightRole::Eta)),
      members_(std::move(members)),
      first_(first_index),
      last_(last_index),
      region_(std::move(region)) {
  if (members_.empty()) throw InvalidArgument("a family system needs at least one member");
  if (first_ > last_) throw InvalidArgument("family index range is empty");
  const std::size_t d = region_.dimension();
  for (const auto& m : members_) {
    if (m.linear.size() != d * d || m.offset.size() != d || m.offset_per_index.size() != d) {
      throw InvalidArgument("family member dimensions do not match the region");
    }
  }
  // Surface invalid linear parts at construction.
  for (std::size_t l = 0; l < members_.size(); ++l) (void)map(first_, l);
}

LatticeMap FamilySystem::map(std::int64_t t, std::size_t l) const {
  const FamilyMember& m = members_.at(l);
  std::vector<Coord> off(m.offset.size());
  for (std::size_t i = 0; i < off.size(); ++i) {
    Coord scaled;
    if (__builtin_mul_overflow(m.offset_per_index[i], t, &scaled) ||
        __builtin_add_overflow(m.offset[i], scaled, &off[i])) {
      throw OverflowError("family offset overflows at index " + std::to_string(t));
    }
  }
  return LatticeMap(region_.dimension(), m.linear, std::move(off));
}

WeightedCompositionOperator FamilySystem::op(std::int64_t t, std::size_t l) const {
  return WeightedCompositionOperator(map(t, l), members_.at(l).symbol, region_);
}

// ---------------------------------------------------------------------------
// Criterion quantities

double log_lambda_forward(const Scenario& sc, std::int64_t n, const LatticePoint& x) {
  if (n < 0) throw InvalidArgument("lambda terms need n >= 0");
  return sc.eta().log_value(iterate_point(sc.op().map(), n, x)) - sc.op().log_forward_product(n, x);
}

double log_lambda_backward(const Scenario& sc, std::int64_t n, const LatticePoint& x) {
  if (n < 0) throw InvalidArgument("lambda terms need n >= 0");
  return sc.eta().log_value(iterate_point(sc.op().map(), -n, x)) + sc.op().log_backward_product(n, x);
}

double lambda_forward(const Scenario& sc, std::int64_t n, const LatticePoint& x) {
  return std::exp(log_lambda_forward(sc, n, x));
}

double lambda_backward(const Scenario& sc, std::int64_t n, const LatticePoint& x) {
  return std::exp(log_lambda_backward(sc, n, x));
}

double log_gamma_cross(const DisjointSystem& sys, std::size_t s, std::size_t l, std::int64_t n,
                       const LatticePoint& x) {
  if (s == l) throw InvalidArgument("gamma_cross needs distinct operator indices");
  if (n < 0) throw InvalidArgument("gamma_cross needs n >= 0");
  const auto& Ts = sys.operators().at(s);
  const auto& Tl = sys.operators().at(l);
  const std::int64_t as = sys.powers()[s] * n;
  const std::int64_t al = sys.powers()[l] * n;
  const LatticePoint y = iterate_point(Ts.map(), as, x);
  const LatticePoint z = iterate_point(Tl.map(), -al, y);
  return sys.eta().log_value(z) + Tl.log_backward_product(al, y) - Ts.log_forward_product(as, x);
}

double gamma_cross(const DisjointSystem& sys, std::size_t s, std::size_t l, std::int64_t n, const LatticePoint& x) {
  return std::exp(log_gamma_cross(sys, s, l, n, x));
}

// ---------------------------------------------------------------------------
// Threshold scan shared by the single and disjoint criteria

namespace {

struct ScanSetup {
  const NormSpec& norm;
  const WeightSpec& eta;
  std::vector<const WeightedCompositionOperator*> ops;
  std::vector<std::int64_t> powers;
  std::int64_t first_n = 1;
  bool cross_terms = false;
};

// Point alpha^{+-m}(x) and the matching log orbit product, advanced one step at a time.
struct OrbitCursor {
  LatticePoint forward_point;
  double forward_log = 0.0;
  LatticePoint backward_point;
  double backward_log = 0.0;
};

class ChiCache {
 public:
  ChiCache(const NormSpec& norm, const CompactRegion& K) : norm_(norm), K_(K) {}

  double operator()(const std::vector<bool>& excluded) {
    if (std::none_of(excluded.begin(), excluded.end(), [](bool b) { return b; })) return 0.0;
    const auto it = cache_.find(excluded);
    if (it != cache_.end()) return it->second;
    std::vector<LatticePoint> pts;
    for (std::size_t i = 0; i < excluded.size(); ++i) {
      if (excluded[i]) pts.push_back(K_.points()[i]);
    }
    const double v = norm(norm_, SampleFunction::indicator(pts));
    cache_.emplace(excluded, v);
    return v;
  }

 private:
  const NormSpec& norm_;
  const CompactRegion& K_;
  std::map<std::vector<bool>, double> cache_;
};

CriterionReport threshold_scan(const ScanSetup& setup, const CompactRegion& K, std::int64_t horizon, double tol) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("tol must lie in (0, 1)");

  const std::size_t N = setup.ops.size();
  const std::size_t nk = K.size();
  const auto pairs = setup.cross_terms ? disjoint_pairs(N) : std::vector<std::pair<std::size_t, std::size_t>>{};

  CriterionReport report;
  report.K = K.points();
  report.m_K = inf_weight_on(setup.eta, K);
  report.horizon = horizon;
  report.tol = tol;

  std::vector<std::vector<OrbitCursor>> cursor(N);
  for (std::size_t l = 0; l < N; ++l) {
    for (const auto& x : K) cursor[l].push_back({x, 0.0, x, 0.0});
  }
  const auto advance = [&](std::size_t l) {
    const auto& T = *setup.ops[l];
    for (auto& c : cursor[l]) {
      for (std::int64_t step = 0; step < setup.powers[l]; ++step) {
        c.forward_log += T.symbol().log_value(c.forward_point);
        c.forward_point = T.map().apply(c.forward_point);
        c.backward_point = T.inverse_map().apply(c.backward_point);
        c.backward_log += T.symbol().log_value(c.backward_point);
      }
    }
  };

  ChiCache chi(setup.norm, K);
  int k = 1;
  double two_k = 2.0;
  std::vector<std::vector<double>> fwd(N, std::vector<double>(nk)), bwd(N, std::vector<double>(nk));
  std::vector<std::vector<double>> cross(pairs.size(), std::vector<double>(nk));
  std::vector<bool> excluded(nk);
  ScanProfile& prof = report.profile;
  prof.min_sup_forward = prof.min_sup_backward = std::numeric_limits<double>::infinity();

  for (std::int64_t n = 1; n <= horizon; ++n) {
    for (std::size_t l = 0; l < N; ++l) advance(l);
    if (n < setup.first_n) continue;

    double sup_f_K = 0, sup_b_K = 0;
    for (std::size_t l = 0; l < N; ++l) {
      for (std::size_t i = 0; i < nk; ++i) {
        const auto& c = cursor[l][i];
        fwd[l][i] = std::exp(setup.eta.log_value(c.forward_point) - c.forward_log);
        bwd[l][i] = std::exp(setup.eta.log_value(c.backward_point) + c.backward_log);
        sup_f_K = std::max(sup_f_K, fwd[l][i]);
        sup_b_K = std::max(sup_b_K, bwd[l][i]);
      }
    }
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [l, s] = pairs[p];
      const auto& Tl = *setup.ops[l];
      const std::int64_t al = setup.powers[l] * n;
      const LatticeMap back = Tl.map().power(-al);
      for (std::size_t i = 0; i < nk; ++i) {
        const LatticePoint& y = cursor[s][i].forward_point;
        cross[p][i] = std::exp(setup.eta.log_value(back.apply(y)) + Tl.log_backward_product(al, y) -
                               cursor[s][i].forward_log);
      }
    }
    ++prof.scanned;
    prof.min_sup_forward = std::min(prof.min_sup_forward, sup_f_K);
    prof.max_sup_forward = std::max(prof.max_sup_forward, sup_f_K);
    prof.min_sup_backward = std::min(prof.min_sup_backward, sup_b_K);
    prof.max_sup_backward = std::max(prof.max_sup_backward, sup_b_K);

    const double tau = report.m_K / two_k;
    for (std::size_t i = 0; i < nk; ++i) {
      bool out = false;
      for (std::size_t l = 0; l < N && !out; ++l) out = !at_most(fwd[l][i], tau) || !at_most(bwd[l][i], tau);
      for (std::size_t p = 0; p < pairs.size() && !out; ++p) out = !at_most(cross[p][i], tau);
      excluded[i] = out;
    }
    const double chi_residual = chi(excluded);
    const double chi_target = 4.0 / two_k;
    if (!at_most(chi_residual, chi_target)) continue;

    Stage st;
    st.k = k;
    st.n = n;
    st.tau = tau;
    st.chi_target = chi_target;
    st.chi_residual = chi_residual;
    st.sup_forward.assign(N, 0.0);
    st.sup_backward.assign(N, 0.0);
    st.gamma.assign(pairs.size(), 0.0);
    for (std::size_t i = 0; i < nk; ++i) {
      if (excluded[i]) continue;
      st.E.push_back(K.points()[i]);
      for (std::size_t l = 0; l < N; ++l) {
        st.sup_forward[l] = std::max(st.sup_forward[l], fwd[l][i]);
        st.sup_backward[l] = std::max(st.sup_backward[l], bwd[l][i]);
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) st.gamma[p] = std::max(st.gamma[p], cross[p][i]);
    }
    const bool done =
        at_most(st.max_sup_forward(), tol) && at_most(st.max_sup_backward(), tol) && at_most(st.gamma_max(), tol) &&
        at_most(chi_residual, tol);
    report.stages.push_back(std::move(st));
    if (done) {
      report.verdict = Verdict::WitnessFound;
      break;
    }
    ++k;
    two_k *= 2.0;
  }
  if (prof.scanned == 0) prof.min_sup_forward = prof.min_sup_backward = 0.0;
  return report;
}

void apply_certification(CriterionReport& report, Certification cert) {
  report.certification = std::move(cert);
  if (report.verdict == Verdict::WitnessFound && !report.certification.passed) {
    report.verdict = Verdict::NoWitnessUpToHorizon;
    report.note = "witness certification failed; verdict withdrawn";
  }
}

}  // namespace

CriterionReport check_transitivity(const Scenario& sc, const CompactRegion& K, std::int64_t horizon, double tol) {
  require_dimension(K, sc.op().map().dimension(), "K");
  ScanSetup setup{sc.norm(), sc.eta(), {&sc.op()}, {1}, 1, false};
  CriterionReport report = threshold_scan(setup, K, horizon, tol);
  report.k_alpha = sc.k_alpha();
  report.operator_bound = sc.op().sup_symbol() * sc.k_alpha();
  report.aperiodicity_bound = aperiodicity_bound(sc.op().map(), K, horizon);
  if (report.verdict == Verdict::WitnessFound) apply_certification(report, certify(sc, report));
  return report;
}

DisjointReport check_disjoint_transitivity(const DisjointSystem& sys, const CompactRegion& K, std::int64_t horizon,
                                           double tol) {
  require_dimension(K, sys.region().dimension(), "K");
  const std::vector<LatticeMap> maps = sys.maps();
  const auto bound = disjoint_aperiodicity_bound(maps, sys.powers(), K, horizon);
  if (!bound) {
    throw AperiodicityError("disjoint aperiodicity unattainable on K up to horizon " + std::to_string(horizon));
  }
  ScanSetup setup{sys.norm(), sys.eta(), {}, sys.powers(), *bound, true};
  for (const auto& op : sys.operators()) setup.ops.push_back(&op);
  DisjointReport report = threshold_scan(setup, K, horizon, tol);
  report.k_alpha = sys.k_alpha();
  for (const auto& op : sys.operators()) {
    report.operator_bound = std::max(report.operator_bound, op.sup_symbol() * sys.k_alpha());
  }
  report.aperiodicity_bound = bound;
  report.powers = sys.powers();
  if (report.verdict == Verdict::WitnessFound) apply_certification(report, certify(sys, report));
  return report;
}

EpsilonReport check_semi_transitivity(const FamilySystem& fam, const CompactRegion& K, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  require_dimension(K, fam.region().dimension(), "K");
  const std::size_t N = fam.size();
  const std::size_t nk = K.size();
  const WeightSpec& eta = fam.eta();

  EpsilonReport report;
  report.K = K.points();
  report.epsilon = epsilon;
  report.m_K = inf_weight_on(eta, K);
  const double theta = report.m_K * epsilon / (1.0 - epsilon);
  report.cross_bound = theta;
  report.product_bound = theta * theta;
  report.chi_bound = static_cast<double>((4 + 2 * N) * N) * epsilon;

  for (std::int64_t t = fam.first_index(); t <= fam.last_index(); ++t) {
    std::vector<WeightedCompositionOperator> ops;
    for (std::size_t l = 0; l < N; ++l) ops.push_back(fam.op(t, l));
    for (const auto& op : ops) report.k_alpha = std::max(report.k_alpha, validated_k_alpha(eta, op.map(), fam.region()));

    TailEntry e;
    e.t = t;
    e.aperiodic = true;
    for (std::size_t l = 0; l < N && e.aperiodic; ++l) {
      if (intersects(K.points(), image(ops[l].map(), K.points()))) e.aperiodic = false;
      for (std::size_t s = 0; s < N && e.aperiodic; ++s) {
        if (s == l) continue;
        const auto pulled = image(ops[l].inverse_map(), image(ops[s].map(), K.points()));
        if (intersects(K.points(), pulled)) e.aperiodic = false;
      }
    }

    std::vector<std::vector<double>> fwd(N, std::vector<double>(nk)), bwd(N, std::vector<double>(nk));
    const auto pairs = disjoint_pairs(N);
    std::vector<std::vector<double>> cross(pairs.size(), std::vector<double>(nk));
    std::vector<bool> excluded(nk, false);
    for (std::size_t i = 0; i < nk; ++i) {
      const LatticePoint& x = K.points()[i];
      for (std::size_t l = 0; l < N; ++l) {
        const auto& T = ops[l];
        const LatticePoint back = T.inverse_map().apply(x);
        fwd[l][i] = std::exp(eta.log_value(T.map().apply(x)) - T.symbol().log_value(x));
        bwd[l][i] = std::exp(eta.log_value(back) + T.symbol().log_value(back));
        if (!strictly_below(fwd[l][i], theta) || !strictly_below(bwd[l][i], theta)) excluded[i] = true;
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [l, s] = pairs[p];
        const LatticePoint z = ops[l].inverse_map().apply(ops[s].map().apply(x));
        cross[p][i] =
            std::exp(eta.log_value(z) + ops[l].symbol().log_value(z) - ops[s].symbol().log_value(x));
        if (!strictly_below(cross[p][i], theta)) excluded[i] = true;
      }
    }
    std::vector<LatticePoint> dropped;
    e.sup_forward.assign(N, 0.0);
    e.sup_backward.assign(N, 0.0);
    for (std::size_t i = 0; i < nk; ++i) {
      if (excluded[i]) {
        dropped.push_back(K.points()[i]);
        continue;
      }
      e.E.push_back(K.points()[i]);
      for (std::size_t l = 0; l < N; ++l) {
        e.sup_forward[l] = std::max(e.sup_forward[l], fwd[l][i]);
        e.sup_backward[l] = std::max(e.sup_backward[l], bwd[l][i]);
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) e.max_cross = std::max(e.max_cross, cross[p][i]);
    }
    e.chi_residual = norm(fam.norm(), SampleFunction::indicator(dropped));
    e.pass_chi = strictly_below(e.chi_residual, report.chi_bound);
    e.max_product = max_or_zero(e.sup_forward) * max_or_zero(e.sup_backward);
    e.pass_product = e.max_product == 0.0 || strictly_below(e.max_product, report.product_bound);
    e.pass_cross = e.max_cross == 0.0 || strictly_below(e.max_cross, report.cross_bound);
    double sum_f = 0, sum_b = 0;
    for (std::size_t l = 0; l < N; ++l) {
      sum_f += e.sup_forward[l];
      sum_b += e.sup_backward[l];
    }
    e.lambda = (sum_f > 0.0 && sum_b > 0.0) ? std::sqrt(sum_f) / std::sqrt(sum_b) : 1.0;
    report.entries.push_back(std::move(e));
  }

  std::optional<std::int64_t> start;
  for (auto it = report.entries.rbegin(); it != report.entries.rend() && it->qualifies(); ++it) start = it->t;
  report.tail_start = start;
  report.tail_found = start.has_value();
  if (report.tail_found) {
    report.certification = certify(fam, report);
    if (!report.certification.passed) {
      report.tail_found = false;
      report.tail_start.reset();
      report.certification.note = "witness certification failed; tail withdrawn";
    }
  }
  return report;
}

}  // namespace wcdyn
