#include "wcdyn/witness.hpp"

#include <algorithm>
#include <cmath>

namespace wcdyn {

namespace {

const Stage& find_stage(const CriterionReport& report, int k) {
  for (const auto& st : report.stages) {
    if (st.k == k) return st;
  }
  throw InvalidArgument("report has no stage k = " + std::to_string(k));
}

void require_inside(const SampleFunction& f, const std::vector<LatticePoint>& K, const char* what) {
  for (const auto& [x, v] : f) {
    if (!std::binary_search(K.begin(), K.end(), x)) {
      throw InvalidArgument(std::string(what) + " support point " + to_string(x) + " escapes K");
    }
  }
}

bool within(double residual, double bound) { return residual <= bound * (1.0 + 1e-9) + 1e-12; }

}  // namespace

SampleFunction flatten(const SampleFunction& f_tilde, const WeightSpec& eta) { return divide(f_tilde, eta); }

WitnessVector build_witness(const Scenario& sc, const CriterionReport& report, const SampleFunction& f,
                            const SampleFunction& g, int k) {
  const Stage& st = find_stage(report, k);
  require_inside(f, report.K, "source");
  require_inside(g, report.K, "target");
  const auto& T = sc.op();
  WitnessVector w;
  w.index = k;
  w.v = f.restricted_to(st.E) + T.iterate(-st.n, g.restricted_to(st.E));
  w.residual_source = weighted_norm(sc.norm(), sc.eta(), w.v - f);
  w.residual_targets.push_back(weighted_norm(sc.norm(), sc.eta(), T.iterate(st.n, w.v) - g));
  return w;
}

WitnessVector build_witness(const DisjointSystem& sys, const DisjointReport& report, const SampleFunction& f,
                            std::span<const SampleFunction> g, int k) {
  if (g.size() != sys.size()) throw InvalidArgument("one target per operator is required");
  const Stage& st = find_stage(report, k);
  require_inside(f, report.K, "source");
  for (const auto& gs : g) require_inside(gs, report.K, "target");
  WitnessVector w;
  w.index = k;
  w.v = f.restricted_to(st.E);
  for (std::size_t s = 0; s < sys.size(); ++s) {
    w.v += sys.operators()[s].iterate(-sys.powers()[s] * st.n, g[s].restricted_to(st.E));
  }
  w.residual_source = weighted_norm(sys.norm(), sys.eta(), w.v - f);
  for (std::size_t l = 0; l < sys.size(); ++l) {
    const SampleFunction image = sys.operators()[l].iterate(sys.powers()[l] * st.n, w.v);
    w.residual_targets.push_back(weighted_norm(sys.norm(), sys.eta(), image - g[l]));
  }
  return w;
}

WitnessVector build_supercyclic_witness(const FamilySystem& fam, const EpsilonReport& report, std::int64_t t,
                                        const SampleFunction& f, std::span<const SampleFunction> g) {
  if (g.size() != fam.size()) throw InvalidArgument("one target per family member is required");
  if (!report.tail_start || t < *report.tail_start) {
    throw InvalidArgument("index " + std::to_string(t) + " lies outside the qualifying tail");
  }
  const TailEntry& e = report.entry(t);
  require_inside(f, report.K, "source");
  for (const auto& gs : g) require_inside(gs, report.K, "target");
  const double rho = 1.0 / e.lambda;

  std::vector<WeightedCompositionOperator> ops;
  for (std::size_t l = 0; l < fam.size(); ++l) ops.push_back(fam.op(t, l));
  SampleFunction pulled;
  for (std::size_t s = 0; s < fam.size(); ++s) pulled += ops[s].apply_inverse(g[s].restricted_to(e.E));

  WitnessVector w;
  w.index = t;
  w.scaling = e.lambda;
  w.v = f.restricted_to(e.E) + Complex(rho) * pulled;
  w.residual_source = weighted_norm(fam.norm(), fam.eta(), w.v - f);
  for (std::size_t s = 0; s < fam.size(); ++s) {
    const SampleFunction image = Complex(e.lambda) * ops[s].apply(w.v);
    w.residual_targets.push_back(weighted_norm(fam.norm(), fam.eta(), image - g[s]));
  }
  return w;
}

ResidualBounds residual_bounds(const NormSpec& norm, const WeightSpec& eta, double m_K, const Stage& stage,
                               const SampleFunction& f, std::span<const SampleFunction> g) {
  const std::size_t N = g.size();
  if (stage.sup_forward.size() != N) throw InvalidArgument("stage and target count disagree");
  const SampleFunction f_tilde = multiply(f, eta);
  const double f_norm = wcdyn::norm(norm, f_tilde);
  std::vector<double> g_norm, g_sup;
  for (const auto& gs : g) {
    const SampleFunction gt = multiply(gs, eta);
    g_norm.push_back(wcdyn::norm(norm, gt));
    g_sup.push_back(gt.sup_abs());
  }
  const auto pairs = disjoint_pairs(N);
  ResidualBounds b;
  b.source = f_tilde.sup_abs() * stage.chi_residual;
  for (std::size_t s = 0; s < N; ++s) b.source += stage.sup_forward[s] / m_K * g_norm[s];
  for (std::size_t l = 0; l < N; ++l) {
    double t = stage.sup_backward[l] / m_K * f_norm + g_sup[l] * stage.chi_residual;
    for (std::size_t p = 0; p < pairs.size() && p < stage.gamma.size(); ++p) {
      if (pairs[p].first == l) t += stage.gamma[p] / m_K * g_norm[pairs[p].second];
    }
    b.targets.push_back(t);
  }
  return b;
}

ResidualBounds residual_bounds(const FamilySystem& fam, const EpsilonReport& report, const TailEntry& entry,
                               const SampleFunction& f, std::span<const SampleFunction> g) {
  const std::size_t N = g.size();
  const double m_K = report.m_K;
  const SampleFunction f_tilde = multiply(f, fam.eta());
  const double f_norm = norm(fam.norm(), f_tilde);
  std::vector<double> g_norm, g_sup;
  for (const auto& gs : g) {
    const SampleFunction gt = multiply(gs, fam.eta());
    g_norm.push_back(norm(fam.norm(), gt));
    g_sup.push_back(gt.sup_abs());
  }
  const double rho = 1.0 / entry.lambda;
  ResidualBounds b;
  b.source = f_tilde.sup_abs() * entry.chi_residual;
  for (std::size_t s = 0; s < N; ++s) b.source += rho * entry.sup_forward[s] / m_K * g_norm[s];
  for (std::size_t s = 0; s < N; ++s) {
    double t = entry.lambda * entry.sup_backward[s] / m_K * f_norm + g_sup[s] * entry.chi_residual;
    for (std::size_t q = 0; q < N; ++q) {
      if (q != s) t += entry.max_cross / m_K * g_norm[q];
    }
    b.targets.push_back(t);
  }
  return b;
}

namespace {

StageCertificate compare(const WitnessVector& w, const ResidualBounds& b) {
  StageCertificate c;
  c.index = w.index;
  c.residual_source = w.residual_source;
  c.residual_targets = w.residual_targets;
  c.bound_source = b.source;
  c.bound_targets = b.targets;
  c.passed = within(w.residual_source, b.source);
  for (std::size_t i = 0; i < b.targets.size(); ++i) c.passed = c.passed && within(w.residual_targets[i], b.targets[i]);
  return c;
}

Certification finish(std::vector<StageCertificate> stages) {
  Certification cert;
  cert.performed = true;
  cert.passed = std::all_of(stages.begin(), stages.end(), [](const StageCertificate& s) { return s.passed; });
  cert.stages = std::move(stages);
  return cert;
}

}  // namespace

Certification certify(const Scenario& sc, const CriterionReport& report) {
  const SampleFunction chi = flatten(SampleFunction::indicator(std::span<const LatticePoint>(report.K.data(), report.K.size())), sc.eta());
  std::vector<StageCertificate> out;
  for (const auto& st : report.stages) {
    const WitnessVector w = build_witness(sc, report, chi, chi, st.k);
    const SampleFunction targets[] = {chi};
    out.push_back(compare(w, residual_bounds(sc.norm(), sc.eta(), report.m_K, st, chi, targets)));
  }
  return finish(std::move(out));
}

Certification certify(const DisjointSystem& sys, const DisjointReport& report) {
  const SampleFunction chi = flatten(SampleFunction::indicator(std::span<const LatticePoint>(report.K.data(), report.K.size())), sys.eta());
  const std::vector<SampleFunction> targets(sys.size(), chi);
  std::vector<StageCertificate> out;
  for (const auto& st : report.stages) {
    const WitnessVector w = build_witness(sys, report, chi, targets, st.k);
    out.push_back(compare(w, residual_bounds(sys.norm(), sys.eta(), report.m_K, st, chi, targets)));
  }
  return finish(std::move(out));
}

Certification certify(const FamilySystem& fam, const EpsilonReport& report) {
  const SampleFunction chi = flatten(SampleFunction::indicator(std::span<const LatticePoint>(report.K.data(), report.K.size())), fam.eta());
  const std::vector<SampleFunction> targets(fam.size(), chi);
  std::vector<StageCertificate> out;
  if (report.tail_start) {
    for (const auto& e : report.entries) {
      if (e.t < *report.tail_start) continue;
      const WitnessVector w = build_supercyclic_witness(fam, report, e.t, chi, targets);
      out.push_back(compare(w, residual_bounds(fam, report, e, chi, targets)));
    }
  }
  return finish(std::move(out));
}

double epsilon_for(double delta, std::size_t n_operators, double m_K, double C) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (n_operators == 0) throw InvalidArgument("at least one operator is required");
  const double n = static_cast<double>(n_operators);
  return std::min(0.5, delta / ((4.0 + 2.0 * n) * n * (m_K + C)));
}

// ---------------------------------------------------------------------------
// Feasibility search

FeasibilityResult evaluate_candidate(const FeasibilityProblem& problem, const SampleFunction& h) {
  FeasibilityResult r;
  r.h = h;
  r.residual_source = weighted_norm(problem.norm, problem.eta, h - problem.source);
  for (const auto& c : problem.constraints) {
    const SampleFunction image = Complex(c.scale) * c.op.iterate(c.power, h);
    r.residual_targets.push_back(weighted_norm(problem.norm, problem.eta, image - c.target));
  }
  return r;
}

namespace {

bool satisfies(const FeasibilityResult& r, double eps) {
  return r.residual_source < eps &&
         std::all_of(r.residual_targets.begin(), r.residual_targets.end(), [&](double v) { return v < eps; });
}

// Nearest point of a norm ball: the radial retraction onto it.
SampleFunction retract(const FeasibilityProblem& p, const SampleFunction& h, const SampleFunction& center,
                       double radius) {
  const SampleFunction d = h - center;
  const double nd = weighted_norm(p.norm, p.eta, d);
  if (nd <= radius) return h;
  return center + Complex(radius / nd) * d;
}

// Exponent of the separable model used for the per-point projection weights.
double model_exponent(const NormSpec& spec) {
  if (const auto* e = std::get_if<EllPNorm>(&spec.kind())) {
    if (std::isfinite(e->p) && e->p > 1.0) return e->p;
  }
  return 2.0;
}

// Approximate nearest point (in the F_eta norm) of {h : ||s T^n h - g|| <= radius}.
// The preimage ball is an axis-weighted ball around c = (s T^n)^{-1} g; each point moves
// from z towards c by the fraction solving the separable Lagrange condition, and the
// multiplier is found by bisection. Exact for the weighted l^2 norm.
SampleFunction project_constraint(const FeasibilityProblem& p, const FeasibilityConstraint& c,
                                  const SampleFunction& z, double radius) {
  const auto residual = [&](const SampleFunction& h) {
    return weighted_norm(p.norm, p.eta, Complex(c.scale) * c.op.iterate(c.power, h) - c.target);
  };
  if (residual(z) <= radius) return z;
  const SampleFunction center = Complex(1.0 / c.scale) * c.op.iterate(-c.power, c.target);
  const double q = model_exponent(p.norm);

  struct Site {
    LatticePoint x;
    Complex from, to;
    double log_ratio;
  };
  std::vector<LatticePoint> pts = z.support();
  for (const auto& x : center.support()) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Site> sites;
  for (const auto& x : pts) {
    const LogScaledFunction img = c.op.iterate_log(c.power, SampleFunction::delta(x));
    const auto& [y, e] = *img.entries().begin();
    const double log_b = std::log(c.scale) + e.log_abs + std::log(p.eta.value(y));
    const double log_a = std::log(p.eta.value(x));
    sites.push_back({x, z(x), center(x), log_b - log_a});
  }
  const auto at = [&](double log_mu) {
    SampleFunction h;
    for (const auto& s : sites) {
      const double lq = (log_mu + q * s.log_ratio) / (q - 1.0);
      const double t = lq > 0 ? 1.0 / (1.0 + std::exp(-lq)) : std::exp(lq) / (1.0 + std::exp(lq));
      h.set(s.x, s.from + t * (s.to - s.from));
    }
    return h;
  };
  double lo = -400.0, hi = 400.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(at(mid)) <= radius ? hi : lo) = mid;
  }
  return at(hi);
}

}  // namespace

FeasibilityResult feasibility_oracle(const FeasibilityProblem& problem, double eps, int max_iters,
                                     std::optional<std::vector<LatticePoint>> guide_set) {
  if (!(eps > 0.0)) throw InvalidArgument("feasibility eps must be positive");
  const auto restrict = [&](const SampleFunction& f) {
    if (!guide_set) return f;
    std::vector<LatticePoint> pts = *guide_set;
    std::sort(pts.begin(), pts.end());
    return f.restricted_to(pts);
  };

  SampleFunction h = restrict(problem.source);
  for (const auto& c : problem.constraints) {
    h += Complex(1.0 / c.scale) * c.op.iterate(-c.power, restrict(c.target));
  }
  FeasibilityResult best = evaluate_candidate(problem, h);
  if (satisfies(best, eps)) {
    best.feasible = true;
    best.method = "guided";
    return best;
  }

  const double radius = eps * (1.0 - 1e-6);
  for (int it = 1; it <= max_iters; ++it) {
    const SampleFunction previous = h;
    h = retract(problem, h, problem.source, radius);
    for (const auto& c : problem.constraints) {
      h = project_constraint(problem, c, h, radius);
    }
    FeasibilityResult r = evaluate_candidate(problem, h);
    r.iterations = it;
    if (satisfies(r, eps)) {
      r.feasible = true;
      r.method = "projection";
      return r;
    }
    best = std::move(r);
    const double change = weighted_norm(problem.norm, problem.eta, h - previous);
    const double size = weighted_norm(problem.norm, problem.eta, h);
    if (change <= 1e-12 * std::max(size, 1e-300)) break;
  }
  best.feasible = false;
  best.method = "inconclusive";
  return best;
}

FeasibilityResult feasibility_oracle(const NormSpec& norm, const WeightSpec& eta, const WeightedCompositionOperator& T,
                                     std::int64_t n, const SampleFunction& f, const SampleFunction& g, double eps,
                                     int max_iters) {
  FeasibilityProblem p{norm, eta, f, {{T, n, 1.0, g}}};
  return feasibility_oracle(p, eps, max_iters);
}

}  // namespace wcdyn
