#include "hcpcut/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <queue>
#include <sstream>

#include "hcpcut/bounds.hpp"

namespace hcpcut {

namespace {

RelaxPoint seed_point(const VarLayout& L, const std::vector<double>& v) {
  RelaxPoint p;
  p.layout = L;
  p.values = v;
  return p;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<LinearRow> to_rows(const VarLayout& L, const std::vector<LinearCut>& cuts) {
  std::vector<LinearRow> rows;
  rows.reserve(cuts.size());
  for (const auto& c : cuts) rows.push_back(c.to_row(L));
  return rows;
}

struct Node {
  double bound;
  long id;
  std::vector<std::pair<int, double>> fixes;
  std::vector<double> warm;
};

struct NodeOrder {
  // best bound first, then creation order
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

ConvexModel apply_fixes(const ConvexModel& base, const std::vector<std::pair<int, double>>& fixes) {
  ConvexModel m = base;
  for (auto [c, v] : fixes) m.bounds[c] = {v, v};
  return m;
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::Miqp ? "miqp" : "wc-g"; }

std::optional<Variant> parse_variant(const std::string& s) {
  if (s == "miqp") return Variant::Miqp;
  if (s == "wc-g" || s == "wcg") return Variant::WcG;
  return std::nullopt;
}

const char* to_string(BnbStatus s) {
  switch (s) {
    case BnbStatus::Optimal: return "optimal";
    case BnbStatus::TimeLimit: return "time-limit";
    case BnbStatus::Infeasible: return "infeasible";
  }
  return "?";
}

double root_gap(double incumbent, double root_bound) {
  return 100.0 * (incumbent - root_bound) / std::max(std::abs(incumbent), 1e-12);
}

double root_gap(const BnbReport& r) { return root_gap(r.incumbent, r.root_bound); }

int BnbReport::cuts_added() const {
  int s = 0;
  for (auto [p, c] : cuts)
    if (p != Provenance::ModeFix) s += c;
  return s;
}

std::string BnbReport::to_record() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "variant=" << to_string(variant) << "\n";
  os << "status=" << to_string(status) << "\n";
  os << "incumbent=" << incumbent << "\n";
  os << "best_bound=" << best_bound << "\n";
  os << "root_bound=" << root_bound << "\n";
  os << "root_bound_plain=" << root_bound_plain << "\n";
  os << "root_gap_pct=" << root_gap_pct << "\n";
  os << "root_gap_definition=100*(incumbent-root_bound)/max(|incumbent|,1e-12), post-cut root\n";
  os << "nodes=" << nodes << "\n";
  os << "root_rounds=" << root_rounds << "\n";
  os << "cuts_feasibility=" << (cuts.count(Provenance::Feasibility) ? cuts.at(Provenance::Feasibility) : 0) << "\n";
  os << "cuts_gradient=" << (cuts.count(Provenance::Gradient) ? cuts.at(Provenance::Gradient) : 0) << "\n";
  os << "mode_fixes=" << (cuts.count(Provenance::ModeFix) ? cuts.at(Provenance::ModeFix) : 0) << "\n";
  os << "fixed_periods=";
  for (size_t i = 0; i < fixed_periods.size(); ++i) os << (i ? "," : "") << fixed_periods[i] + 1;
  os << "\n";
  for (size_t t = 0; t < assignment.z.size(); ++t) {
    os << "z[" << t + 1 << "]=";
    for (Eigen::Index k = 0; k < assignment.z[t].size(); ++k)
      os << (k ? "," : "") << std::lround(assignment.z[t][k]);
    os << "\n";
  }
  os << "time_s=" << std::setprecision(6) << time_s << "\n";
  return os.str();
}

RelaxPoint solve_pattern(const HcpInstance& inst, const std::vector<std::vector<double>>& z,
                         const QpSettings& qp) {
  ConvexModel m = build_epigraph(inst);
  const VarLayout& L = m.layout;
  for (int t = 0; t < inst.n; ++t)
    for (int k = 0; k < inst.dz; ++k) m.bounds[L.z(t, k)] = {z[t][k], z[t][k]};
  return solve_relaxation(m, qp);
}

EnumResult enumerate_patterns(const HcpInstance& inst, const QpSettings& qp) {
  const int bits = inst.n * inst.dz;
  if (bits > 20) throw DimensionError("enumeration limited to 20 indicator variables");
  EnumResult er;
  er.best = kInf;
  std::vector<std::pair<double, std::vector<double>>> feas;
  for (long mask = 0; mask < (1L << bits); ++mask) {
    std::vector<std::vector<double>> z(inst.n, std::vector<double>(inst.dz));
    for (int b = 0; b < bits; ++b) z[b / inst.dz][b % inst.dz] = (mask >> b) & 1;
    RelaxPoint p = solve_pattern(inst, z, qp);
    if (!p.optimal()) continue;
    ++er.feasible_patterns;
    feas.emplace_back(p.objective, p.values);
    if (p.objective < er.best) {
      er.best = p.objective;
      er.best_z = z;
      er.best_values = p.values;
    }
  }
  for (auto& [obj, v] : feas)
    if (obj <= er.best + 1e-9 * std::max(1.0, std::abs(er.best))) er.optimal_values.push_back(v);
  return er;
}

BnbReport solve_miqp(const HcpInstance& inst, const SolveConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  const bool cuts_on = cfg.variant == Variant::WcG;
  auto rep_v = validate(inst, cuts_on);
  if (!rep_v.ok()) throw DimensionError("invalid instance:\n" + rep_v.to_string());

  BnbReport rep;
  rep.variant = cfg.variant;
  rep.incumbent = kInf;
  ConvexModel model = build_epigraph(inst);
  const VarLayout L = model.layout;

  std::optional<Separator> sep;
  if (cuts_on) {
    SeparationConfig sc;
    sc.policy = cfg.split_policy;
    sc.custom_splits = cfg.custom_splits;
    sep.emplace(inst, sc);
    std::vector<char> fixed(inst.n, 0);
    if (inst.dz == 1) {
      for (int t = 0; t < inst.n; ++t) {
        if (!mode_fix_check(period_data(inst, t))) continue;
        fixed[t] = 1;
        rep.fixed_periods.push_back(t);
        model.bounds[L.z(t, 0)] = {1.0, 1.0};
        rep.cuts[Provenance::ModeFix]++;
      }
    }
    auto fc = sep->feasibility_cuts(fixed);
    model = with_rows(model, to_rows(L, fc));
    rep.cuts[Provenance::Feasibility] += static_cast<int>(fc.size());
  }

  RelaxPoint root = solve_relaxation(model, cfg.qp);
  if (root.status == SolveStatus::Infeasible) {
    rep.status = BnbStatus::Infeasible;
    rep.best_bound = rep.root_bound = rep.root_bound_plain = kInf;
    rep.time_s = elapsed();
    return rep;
  }
  rep.root_bound_plain = root.objective;
  rep.nodes = 1;
  if (cuts_on) {
    for (int r = 0; r < cfg.root_cut_rounds; ++r) {
      auto cuts = sep->separate(root.values);
      if (cuts.empty()) break;
      ConvexModel next = with_rows(model, to_rows(L, cuts));
      RelaxPoint p = warm_start(next, root, cfg.qp);
      if (!p.optimal()) break;
      model = std::move(next);
      root = std::move(p);
      rep.cuts[Provenance::Gradient] += static_cast<int>(cuts.size());
      rep.root_rounds = r + 1;
    }
  }
  rep.root_bound = root.objective;

  std::vector<int> zcols;
  for (int t = 0; t < inst.n; ++t)
    for (int k = 0; k < inst.dz; ++k) zcols.push_back(L.z(t, k));

  double inc = kInf;
  std::vector<double> inc_values;
  // exact-z resolve; accepts only points that pass direct substitution
  auto try_integral = [&](const ConvexModel& base, const std::vector<double>& zval,
                          const std::vector<double>* warm) {
    ConvexModel m = base;
    for (size_t i = 0; i < zcols.size(); ++i) m.bounds[zcols[i]] = {zval[i], zval[i]};
    for (size_t i = 0; i < zcols.size(); ++i)
      if (base.bounds[zcols[i]].lo > zval[i] || base.bounds[zcols[i]].hi < zval[i]) return;
    RelaxPoint p = warm ? warm_start(m, seed_point(L, *warm), cfg.qp) : solve_relaxation(m, cfg.qp);
    if (!p.optimal()) return;
    Assignment a = extract(inst, p.values);
    if (max_violation(inst, a) > 1e-7) return;
    double obj = direct_objective(inst, a);
    if (obj < inc) {
      inc = obj;
      inc_values = p.values;
    }
  };

  auto round_z = [&](const std::vector<double>& v) {
    std::vector<double> z(zcols.size());
    for (int t = 0; t < inst.n; ++t) {
      if (inst.mode_exactly_one) {
        int best = 0;
        for (int k = 1; k < inst.dz; ++k)
          if (v[L.z(t, k)] > v[L.z(t, best)]) best = k;
        for (int k = 0; k < inst.dz; ++k) z[t * inst.dz + k] = k == best ? 1.0 : 0.0;
      } else {
        for (int k = 0; k < inst.dz; ++k) z[t * inst.dz + k] = v[L.z(t, k)] >= 0.5 ? 1.0 : 0.0;
      }
    }
    return z;
  };

  if (cfg.dive) try_integral(model, round_z(root.values), &root.values);

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{root.objective, next_id++, {}, root.values});
  auto prune_tol = [&] { return cfg.gap_tol * std::max(std::abs(inc), 1.0); };
  bool timed_out = false;
  bool root_node = true;
  std::optional<Separator> node_sep;
  if (cuts_on && cfg.node_cut_rounds > 0) node_sep = sep;

  while (!open.empty()) {
    if (open.top().bound >= inc - prune_tol()) break;  // every open node is dominated
    if (elapsed() > cfg.time_limit) {
      timed_out = true;
      break;
    }
    Node nd = open.top();
    open.pop();
    RelaxPoint p;
    ConvexModel nm = apply_fixes(model, nd.fixes);
    if (root_node) {
      p = root;
      root_node = false;
    } else {
      p = warm_start(nm, seed_point(L, nd.warm), cfg.qp);
      ++rep.nodes;
    }
    if (p.status == SolveStatus::Infeasible) continue;
    if (!p.optimal()) {
      // unreliable node: fall back to the parent bound and keep branching
      p.objective = nd.bound;
      if (p.values.size() != nd.warm.size()) p.values = nd.warm;
    }
    for (int r = 0; node_sep && r < cfg.node_cut_rounds && p.optimal(); ++r) {
      auto cuts = node_sep->separate(p.values);
      if (cuts.empty()) break;
      ConvexModel next = with_rows(nm, to_rows(L, cuts));
      RelaxPoint q = warm_start(next, p, cfg.qp);
      if (!q.optimal()) break;
      nm = std::move(next);
      p = std::move(q);
      rep.cuts[Provenance::Gradient] += static_cast<int>(cuts.size());
    }
    double bound = std::max(p.objective, nd.bound);
    if (bound >= inc - prune_tol()) continue;

    int branch = -1;
    double best_frac = -1.0;
    for (int c : zcols) {
      if (nm.bounds[c].lo == nm.bounds[c].hi) continue;
      double v = p.values[c];
      double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > cfg.int_tol && frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = c;
      }
    }
    if (branch < 0) {
      std::vector<double> z(zcols.size());
      for (size_t i = 0; i < zcols.size(); ++i) z[i] = std::round(p.values[zcols[i]]);
      try_integral(nm, z, &p.values);
      continue;
    }
    if (cfg.dive && rep.nodes <= 1) try_integral(nm, round_z(p.values), &p.values);
    for (double v : {0.0, 1.0}) {
      Node ch{bound, next_id++, nd.fixes, p.values};
      ch.fixes.emplace_back(branch, v);
      open.push(std::move(ch));
    }
  }

  double open_min = open.empty() ? kInf : open.top().bound;
  rep.incumbent = inc;
  rep.best_bound = std::min(open_min, inc);
  if (timed_out) {
    rep.status = BnbStatus::TimeLimit;
  } else if (!std::isfinite(inc)) {
    rep.status = BnbStatus::Infeasible;
  } else {
    rep.status = BnbStatus::Optimal;
  }
  if (std::isfinite(inc)) {
    rep.values = inc_values;
    rep.assignment = extract(inst, inc_values);
    rep.root_gap_pct = root_gap(inc, rep.root_bound);
  }
  rep.time_s = elapsed();
  return rep;
}

}  // namespace hcpcut
