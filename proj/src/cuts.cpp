#include "hcpcut/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hcpcut {

namespace {

VarId X(int t, int i) { return {VarKind::State, t, i}; }
VarId Y(int t, int j) { return {VarKind::Control, t, j}; }
VarId Z(int t, int k) { return {VarKind::Indicator, t, k}; }
VarId W(int t) { return {VarKind::Epigraph, t, 0}; }

AffineExpr var(const VarId& v, double c = 1.0) {
  AffineExpr e;
  e.add(v, c);
  return e;
}

bool contains(const std::vector<int>& xs, int v) {
  return std::find(xs.begin(), xs.end(), v) != xs.end();
}

double quad_sub(const Mat& M, const std::vector<int>& idx, const Vec& v) {
  double s = 0.0;
  for (int a : idx)
    for (int b : idx) s += M(a, b) * v[a] * v[b];
  return s;
}

}  // namespace

double LinearCut::lhs(const VarLayout& L, const std::vector<double>& values) const {
  double s = 0.0;
  for (const auto& [v, c] : coef) s += c * values[L.col(v)];
  return s;
}

double LinearCut::violation_at(const VarLayout& L, const std::vector<double>& values) const {
  return rhs - lhs(L, values);
}

LinearRow LinearCut::to_row(const VarLayout& L) const {
  LinearRow r;
  r.sense = Sense::GreaterEq;
  r.rhs = rhs;
  r.prov = prov;
  r.period = period;
  for (const auto& [v, c] : coef) {
    r.idx.push_back(L.col(v));
    r.val.push_back(c);
  }
  return r;
}

std::string LinearCut::to_string() const {
  std::ostringstream os;
  os.precision(10);
  os << (period + 1) << "," << hcpcut::to_string(prov);
  for (const auto& [v, c] : coef) os << "," << hcpcut::to_string(v) << ":" << c;
  os << ",>=" << rhs << ",viol=" << violation;
  return os.str();
}

std::optional<LinearCut> make_cut(const AffineExpr& lhs, const AffineExpr& rhs, Provenance p,
                                  int period, int split) {
  AffineExpr d = lhs - rhs;
  if (d.terms.empty()) return std::nullopt;
  LinearCut c;
  c.coef = d.terms;
  c.rhs = -d.constant;
  c.prov = p;
  c.period = period;
  c.split = split;
  return c;
}

DisjunctionSplit make_split(const PeriodData& pd, std::vector<int> K1) {
  if (K1.empty()) throw DomainError("split: K1 must be nonempty");
  std::sort(K1.begin(), K1.end());
  if (std::adjacent_find(K1.begin(), K1.end()) != K1.end())
    throw DomainError("split: repeated mode in K1");
  for (int k : K1)
    if (k < 0 || k >= pd.dz) throw DomainError("split: mode index out of range");
  DisjunctionSplit sp;
  sp.K1 = K1;
  for (int k = 0; k < pd.dz; ++k)
    if (!contains(K1, k)) sp.K2.push_back(k);
  auto gated_by = [&](const std::vector<int>& K) {
    std::vector<int> J;
    for (int j = 0; j < pd.dy; ++j)
      for (int k : K)
        if (pd.G(j, k) != 0.0 || pd.H(j, k) != 0.0) {
          J.push_back(j);
          break;
        }
    return J;
  };
  sp.J1 = gated_by(sp.K1);
  sp.J2 = gated_by(sp.K2);
  for (int j : sp.J1) (contains(sp.J2, j) ? sp.shared : sp.J1only).push_back(j);
  for (int j : sp.J2)
    if (!contains(sp.J1, j)) sp.J2only.push_back(j);
  return sp;
}

std::vector<DisjunctionSplit> enumerate_splits(const HcpInstance& inst, int t, SplitPolicy policy,
                                               const std::vector<std::vector<int>>& custom) {
  std::vector<DisjunctionSplit> out;
  if (inst.dz < 2) return out;
  PeriodData pd = period_data(inst, t);
  if (policy == SplitPolicy::Singletons) {
    for (int k = 0; k < inst.dz; ++k) out.push_back(make_split(pd, {k}));
  } else {
    for (const auto& K1 : custom) out.push_back(make_split(pd, K1));
  }
  return out;
}

std::vector<LinearCut> feasibility_cuts_1d(const PeriodData& pd) {
  if (pd.dz != 1) throw DomainError("feasibility_cuts_1d needs a scalar indicator");
  const int t = pd.t;
  IntervalImage img = interval_image(pd.A, pd.lb1, pd.ub1);
  std::vector<LinearCut> out;
  for (int i = 0; i < pd.dx; ++i) {
    double la = img.lower[i] + pd.f[i], ua = img.upper[i] + pd.f[i];
    double l2 = pd.lb2[i], u2 = pd.ub2[i];
    AffineExpr x2 = var(X(t + 1, i));
    AffineExpr z = var(Z(t, 0));
    AffineExpr one_minus_z = constant_expr(1.0) - z;
    AffineExpr by;
    for (int j = 0; j < pd.dy; ++j) by.add(Y(t, j), pd.B(i, j));
    AffineExpr cz = pd.C(i, 0) * z;
    std::vector<std::pair<AffineExpr, AffineExpr>> rows = {
        {x2 - l2 * z, la * one_minus_z},                     // (c)
        {ua * one_minus_z, x2 - u2 * z},                     // (d)
        {x2, by + cz + la * z + l2 * one_minus_z},           // (e)
        {by + cz + ua * z + u2 * one_minus_z, x2},           // (f)
        {u2 * z, by + cz + la * z},                          // (g)
        {by + cz + ua * z, l2 * z},                          // (h)
    };
    for (auto& [lhs, rhs] : rows)
      if (auto c = make_cut(lhs, rhs, Provenance::Feasibility, t)) out.push_back(*c);
  }
  return out;
}

PeriodCutter::PeriodCutter(const HcpInstance& inst, int t, std::optional<DisjunctionSplit> split,
                           int split_id)
    : L_{inst.n, inst.dx, inst.dy, inst.dz}, pd_(period_data(inst, t)), split_id_(split_id) {
  if (split) {
    sp_ = *split;
  } else {
    if (inst.dz != 1) throw DomainError("scalar cut path needs dz = 1; pass a split");
    sp_ = make_split(pd_, {0});
  }
  // box of (x_t, shared controls) and the map [A, B_s]
  const int ns = static_cast<int>(sp_.shared.size());
  Mat Ahat(pd_.dx, pd_.dx + ns);
  Vec lo(pd_.dx + ns), hi(pd_.dx + ns);
  Ahat.leftCols(pd_.dx) = pd_.A;
  lo.head(pd_.dx) = pd_.lb1;
  hi.head(pd_.dx) = pd_.ub1;
  for (int s = 0; s < ns; ++s) {
    int j = sp_.shared[s];
    Ahat.col(pd_.dx + s) = pd_.B.col(j);
    double gl = pd_.G.row(j).minCoeff(), hh = pd_.H.row(j).maxCoeff();
    if (!pd_.exactly_one) {
      gl = std::min(gl, 0.0);
      hh = std::max(hh, 0.0);
    }
    lo[pd_.dx + s] = gl;
    hi[pd_.dx + s] = hh;
  }
  img_ = interval_image(Ahat, lo, hi);
  img_.lower += pd_.f;
  img_.upper += pd_.f;
  q_ = pd_.Q2.diagonal();
  for (int a = 0; a < pd_.dy && !plain_controls_; ++a)
    for (int s : sp_.shared)
      if (!contains(sp_.shared, a) && pd_.R(a, s) != 0.0) {
        plain_controls_ = true;
        break;
      }
}

double PeriodCutter::lambda(const std::vector<double>& v) const {
  double s = 0.0;
  for (int k : sp_.K1) s += v[L_.z(pd_.t, k)];
  return s;
}

double PeriodCutter::h(int i, const std::vector<double>& v) const {
  const int t = pd_.t;
  double s = pd_.f[i];
  for (int k = 0; k < pd_.dx; ++k) s += pd_.A(i, k) * v[L_.x(t, k)];
  for (int j : sp_.shared) s += pd_.B(i, j) * v[L_.y(t, j)];
  return s;
}

double PeriodCutter::a2(int i, const std::vector<double>& v) const {
  const int t = pd_.t;
  double s = 0.0;
  for (int j : sp_.J2only) s += pd_.B(i, j) * v[L_.y(t, j)];
  for (int k : sp_.K2) s += pd_.C(i, k) * v[L_.z(t, k)];
  return s;
}

// (1 - lambda) * sigma for the row, an affine function of the period variables
double PeriodCutter::row_s(int i, SigmaCase c, const std::vector<double>& v, double lam) const {
  switch (c) {
    case SigmaCase::BelowConst: return (1.0 - lam) * img_.lower[i] + a2(i, v);
    case SigmaCase::BelowFrac: return h(i, v) - lam * img_.upper[i] + a2(i, v);
    case SigmaCase::AboveConst: return (1.0 - lam) * img_.upper[i] + a2(i, v);
    case SigmaCase::AboveFrac: return h(i, v) - lam * img_.lower[i] + a2(i, v);
    default: return (1.0 - lam) * v[L_.x(pd_.t + 1, i)];
  }
}

std::optional<std::pair<Vec, Vec>> PeriodCutter::projection_bounds(const std::vector<double>& v,
                                                                   double eps) const {
  double lam = lambda(v);
  if (lam < eps || lam > 1.0 - eps) return std::nullopt;
  const double om = 1.0 - lam;
  Vec lo(pd_.dx), hi(pd_.dx);
  for (int i = 0; i < pd_.dx; ++i) {
    double x2 = v[L_.x(pd_.t + 1, i)], s2 = a2(i, v), hh = h(i, v);
    lo[i] = std::max({img_.lower[i] + s2 / om, pd_.lb2[i], (hh - lam * img_.upper[i] + s2) / om,
                      (x2 - lam * pd_.ub2[i]) / om});
    hi[i] = std::min({img_.upper[i] + s2 / om, pd_.ub2[i], (hh - lam * img_.lower[i] + s2) / om,
                      (x2 - lam * pd_.lb2[i]) / om});
  }
  return std::make_pair(lo, hi);
}

std::optional<CutWorkspace> PeriodCutter::select_sigma_case(const std::vector<double>& v,
                                                            double eps) const {
  auto b = projection_bounds(v, eps);
  if (!b) return std::nullopt;
  const auto& [lo, hi] = *b;
  for (int i = 0; i < pd_.dx; ++i)
    if (lo[i] > hi[i] + 1e-9 * (1.0 + std::abs(hi[i]))) return std::nullopt;

  double lam = lambda(v);
  const double om = 1.0 - lam;
  std::vector<SigmaCase> cases(pd_.dx, SigmaCase::Inside);
  for (int i = 0; i < pd_.dx; ++i) {
    double x2 = v[L_.x(pd_.t + 1, i)], s2 = a2(i, v), hh = h(i, v);
    if (x2 < lo[i]) {
      double c_const = img_.lower[i] + s2 / om;
      double c_frac = (hh - lam * img_.upper[i] + s2) / om;
      // row side conditions: the candidate is the active maximum and the state lies below it;
      // the constant row also needs l_A >= l_2 (always true when it is the maximum)
      if (c_const >= lo[i] && c_const >= pd_.lb2[i] && x2 < c_const) cases[i] = SigmaCase::BelowConst;
      else if (c_frac >= lo[i] && x2 < c_frac) cases[i] = SigmaCase::BelowFrac;
      else cases[i] = SigmaCase::NoCut;
    } else if (x2 > hi[i]) {
      double c_const = img_.upper[i] + s2 / om;
      double c_frac = (hh - lam * img_.lower[i] + s2) / om;
      if (c_const <= hi[i] && c_const <= pd_.ub2[i] && x2 > c_const) cases[i] = SigmaCase::AboveConst;
      else if (c_frac <= hi[i] && x2 > c_frac) cases[i] = SigmaCase::AboveFrac;
      else cases[i] = SigmaCase::NoCut;
    }
  }
  CutWorkspace ws = workspace(v, std::move(cases));
  ws.lo = lo;
  ws.hi = hi;
  return ws;
}

CutWorkspace PeriodCutter::workspace(const std::vector<double>& v,
                                     std::vector<SigmaCase> cases) const {
  if (static_cast<int>(cases.size()) != pd_.dx) throw DimensionError("workspace: one case per state");
  CutWorkspace ws;
  ws.t = pd_.t;
  ws.split = split_id_;
  ws.point = v;
  ws.lambda = lambda(v);
  ws.cases = std::move(cases);
  ws.sigma = Vec(pd_.dx);
  ws.lo = Vec::Constant(pd_.dx, -std::numeric_limits<double>::infinity());
  ws.hi = Vec::Constant(pd_.dx, std::numeric_limits<double>::infinity());
  double om = 1.0 - ws.lambda;
  for (int i = 0; i < pd_.dx; ++i) {
    double x2 = v[L_.x(pd_.t + 1, i)];
    SigmaCase c = ws.cases[i];
    if (c == SigmaCase::Inside || c == SigmaCase::NoCut || om <= 0.0) {
      ws.sigma[i] = x2;
    } else {
      ws.sigma[i] = row_s(i, c, v, ws.lambda) / om;
      ws.tau += q_[i] * (x2 - ws.sigma[i]) * (x2 - ws.sigma[i]);
    }
  }
  ws.mu = mu_eval(ws, v);
  return ws;
}

double PeriodCutter::mu_eval(const CutWorkspace& ws, const std::vector<double>& v) const {
  const int t = pd_.t;
  double lam = lambda(v);
  if (!(lam > 0.0)) throw DomainError("mu_eval: lambda must be positive");
  double mu = 0.0;
  for (int i = 0; i < pd_.dx; ++i) {
    double x2 = v[L_.x(t + 1, i)];
    SigmaCase c = ws.cases[i];
    if (c == SigmaCase::Inside || c == SigmaCase::NoCut || lam >= 1.0) {
      mu += q_[i] * x2 * x2;  // (1/lambda - 1) vanishes at lambda = 1
    } else {
      double s = row_s(i, c, v, lam), e = x2 - s;
      mu += q_[i] * (e * e / lam + s * s / (1.0 - lam));
    }
  }
  Vec y(pd_.dy), z(pd_.dz);
  for (int j = 0; j < pd_.dy; ++j) y[j] = v[L_.y(t, j)];
  for (int k = 0; k < pd_.dz; ++k) z[k] = v[L_.z(t, k)];
  double p1 = quad_sub(pd_.S, sp_.K1, z), p2 = quad_sub(pd_.S, sp_.K2, z), p0 = 0.0;
  if (plain_controls_) {
    p0 = y.dot(pd_.R * y);
  } else {
    p1 += quad_sub(pd_.R, sp_.J1only, y);
    p2 += quad_sub(pd_.R, sp_.J2only, y);
    std::vector<int> rest;
    for (int j = 0; j < pd_.dy; ++j)
      if (!contains(sp_.J1only, j) && !contains(sp_.J2only, j)) rest.push_back(j);
    p0 = quad_sub(pd_.R, rest, y);
  }
  mu += p1 / lam + p0;
  if (lam >= 1.0) {
    if (p2 > 0.0) return std::numeric_limits<double>::infinity();
  } else {
    mu += p2 / (1.0 - lam);
  }
  return mu;
}

std::vector<std::pair<int, double>> PeriodCutter::mu_gradient(const CutWorkspace& ws,
                                                              const std::vector<double>& v) const {
  const int t = pd_.t;
  double lam = lambda(v);
  if (!(lam > 0.0)) throw DomainError("mu_gradient: lambda must be positive");
  const bool at_one = lam >= 1.0;
  if (at_one) {
    for (SigmaCase c : ws.cases)
      if (c != SigmaCase::Inside && c != SigmaCase::NoCut)
        throw DomainError("mu_gradient: bound rows need lambda < 1");
    if (!sp_.K2.empty()) throw DomainError("mu_gradient: two-sided split needs lambda < 1");
  }
  std::map<int, double> g;
  double dlam = 0.0;
  for (int i = 0; i < pd_.dx; ++i) {
    int cx2 = L_.x(t + 1, i);
    double x2 = v[cx2];
    SigmaCase c = ws.cases[i];
    if (c == SigmaCase::Inside || c == SigmaCase::NoCut) {
      g[cx2] += 2.0 * q_[i] * x2;
      continue;
    }
    double s = row_s(i, c, v, lam), e = x2 - s, om = 1.0 - lam;
    g[cx2] += 2.0 * q_[i] * e / lam;
    double ds = -2.0 * q_[i] * e / lam + 2.0 * q_[i] * s / om;
    dlam += -q_[i] * e * e / (lam * lam) + q_[i] * s * s / (om * om);
    // d s / d lambda and d s / d(period variables)
    bool frac = c == SigmaCase::BelowFrac || c == SigmaCase::AboveFrac;
    double dl = 0.0;
    switch (c) {
      case SigmaCase::BelowConst: dl = -img_.lower[i]; break;
      case SigmaCase::BelowFrac: dl = -img_.upper[i]; break;
      case SigmaCase::AboveConst: dl = -img_.upper[i]; break;
      case SigmaCase::AboveFrac: dl = -img_.lower[i]; break;
      default: break;
    }
    dlam += ds * dl;
    if (frac) {
      for (int k = 0; k < pd_.dx; ++k)
        if (pd_.A(i, k) != 0.0) g[L_.x(t, k)] += ds * pd_.A(i, k);
      for (int j : sp_.shared)
        if (pd_.B(i, j) != 0.0) g[L_.y(t, j)] += ds * pd_.B(i, j);
    }
    for (int j : sp_.J2only)
      if (pd_.B(i, j) != 0.0) g[L_.y(t, j)] += ds * pd_.B(i, j);
    for (int k : sp_.K2)
      if (pd_.C(i, k) != 0.0) g[L_.z(t, k)] += ds * pd_.C(i, k);
  }

  Vec y(pd_.dy), z(pd_.dz);
  for (int j = 0; j < pd_.dy; ++j) y[j] = v[L_.y(t, j)];
  for (int k = 0; k < pd_.dz; ++k) z[k] = v[L_.z(t, k)];
  // perspective groups: value/denominator with denominator lam or 1 - lam
  auto group = [&](const Mat& M, const std::vector<int>& idx, const Vec& x, bool is_y, double den,
                   double dden_dlam) {
    double val = quad_sub(M, idx, x);
    for (int a : idx) {
      double d = 0.0;
      for (int b : idx) d += 2.0 * M(a, b) * x[b];
      if (d != 0.0) g[is_y ? L_.y(t, a) : L_.z(t, a)] += d / den;
    }
    dlam += -val / (den * den) * dden_dlam;
  };
  group(pd_.S, sp_.K1, z, false, lam, 1.0);
  if (!sp_.K2.empty()) group(pd_.S, sp_.K2, z, false, 1.0 - lam, -1.0);
  if (plain_controls_) {
    for (int a = 0; a < pd_.dy; ++a) {
      double d = 2.0 * pd_.R.row(a).dot(y);
      if (d != 0.0) g[L_.y(t, a)] += d;
    }
  } else {
    group(pd_.R, sp_.J1only, y, true, lam, 1.0);
    if (!sp_.J2only.empty()) group(pd_.R, sp_.J2only, y, true, 1.0 - lam, -1.0);
    std::vector<int> rest;
    for (int j = 0; j < pd_.dy; ++j)
      if (!contains(sp_.J1only, j) && !contains(sp_.J2only, j)) rest.push_back(j);
    for (int a : rest) {
      double d = 0.0;
      for (int b : rest) d += 2.0 * pd_.R(a, b) * y[b];
      if (d != 0.0) g[L_.y(t, a)] += d;
    }
  }
  for (int k : sp_.K1) g[L_.z(t, k)] += dlam;
  return {g.begin(), g.end()};
}

LinearCut PeriodCutter::gradient_cut(const CutWorkspace& ws) const {
  const std::vector<double>& v = ws.point;
  auto grad = mu_gradient(ws, v);
  double mu = mu_eval(ws, v);
  // w >= mu + g'(chi - chibar)  <=>  w - g'chi >= mu - g'chibar
  LinearCut cut;
  cut.prov = Provenance::Gradient;
  cut.period = pd_.t;
  cut.split = split_id_;
  double rhs = mu;
  for (const auto& [col, gc] : grad) {
    rhs -= gc * v[col];
    if (gc != 0.0) cut.coef[L_.id(col)] -= gc;
  }
  cut.coef[W(pd_.t)] += 1.0;
  cut.rhs = rhs;
  cut.violation = mu - v[L_.w(pd_.t)];
  return cut;
}

std::vector<LinearCut> feasibility_cuts_multi(const DisjunctionSplit& sp, const PeriodData& pd) {
  const int t = pd.t;
  // same augmentation as PeriodCutter: shared controls join the x_t box
  const int ns = static_cast<int>(sp.shared.size());
  Mat Ahat(pd.dx, pd.dx + ns);
  Vec lo(pd.dx + ns), hi(pd.dx + ns);
  Ahat.leftCols(pd.dx) = pd.A;
  lo.head(pd.dx) = pd.lb1;
  hi.head(pd.dx) = pd.ub1;
  for (int s = 0; s < ns; ++s) {
    int j = sp.shared[s];
    Ahat.col(pd.dx + s) = pd.B.col(j);
    double gl = pd.G.row(j).minCoeff(), hh = pd.H.row(j).maxCoeff();
    if (!pd.exactly_one) {
      gl = std::min(gl, 0.0);
      hh = std::max(hh, 0.0);
    }
    lo[pd.dx + s] = gl;
    hi[pd.dx + s] = hh;
  }
  IntervalImage img = interval_image(Ahat, lo, hi);

  AffineExpr lam;
  for (int k : sp.K1) lam.add(Z(t, k), 1.0);
  AffineExpr om = constant_expr(1.0) - lam;
  std::vector<LinearCut> out;
  for (int i = 0; i < pd.dx; ++i) {
    double lA = img.lower[i] + pd.f[i], uA = img.upper[i] + pd.f[i];
    double l2 = pd.lb2[i], u2 = pd.ub2[i];
    AffineExpr x2 = var(X(t + 1, i)), a1, a2;
    for (int j : sp.J1only) a1.add(Y(t, j), pd.B(i, j));
    for (int k : sp.K1) a1.add(Z(t, k), pd.C(i, k));
    for (int j : sp.J2only) a2.add(Y(t, j), pd.B(i, j));
    for (int k : sp.K2) a2.add(Z(t, k), pd.C(i, k));
    std::vector<std::pair<AffineExpr, AffineExpr>> rows = {
        {u2 * om, lA * om + a2},                  // (A)
        {uA * om + a2, l2 * om},                  // (B)
        {x2 - l2 * lam, lA * om + a2},            // (C)
        {u2 * lam + uA * om, x2 - a2},            // (D)
        {x2 - a1, lA * lam + l2 * om},            // (E), A x_t + f written via the dynamics
        {uA * lam + u2 * om, x2 - a1},            // (F)
        {u2 * lam, a1 + lA * lam},                // (G)
        {a1 + uA * lam, l2 * lam},                // (H)
    };
    for (auto& [lhs, rhs] : rows)
      if (auto c = make_cut(lhs, rhs, Provenance::Feasibility, t)) out.push_back(*c);
  }
  return out;
}

std::optional<std::pair<Vec, Vec>> projection_bounds(const HcpInstance& inst, int t,
                                                     const std::vector<double>& v,
                                                     std::optional<DisjunctionSplit> split) {
  return PeriodCutter(inst, t, std::move(split)).projection_bounds(v);
}

std::pair<double, Vec> tau_closed_form(const Vec& x2, const Vec& lo, const Vec& hi, const Vec& q) {
  if (x2.size() != lo.size() || lo.size() != hi.size() || q.size() != x2.size())
    throw DimensionError("tau_closed_form: dimension mismatch");
  Vec sigma(x2.size());
  double tau = 0.0;
  for (Eigen::Index i = 0; i < x2.size(); ++i) {
    if (lo[i] > hi[i]) throw DomainError("tau_closed_form: infeasible projection (lo > hi)");
    sigma[i] = std::clamp(x2[i], lo[i], hi[i]);
    tau += q[i] * (x2[i] - sigma[i]) * (x2[i] - sigma[i]);
  }
  return {tau, sigma};
}

const char* to_string(SigmaCase c) {
  switch (c) {
    case SigmaCase::Inside: return "inside";
    case SigmaCase::BelowConst: return "below/l_A";
    case SigmaCase::BelowFrac: return "below/fraction";
    case SigmaCase::AboveConst: return "above/u_A";
    case SigmaCase::AboveFrac: return "above/fraction";
    case SigmaCase::NoCut: return "no-cut";
  }
  return "?";
}

Separator::Separator(const HcpInstance& inst, SeparationConfig cfg)
    : L_{inst.n, inst.dx, inst.dy, inst.dz}, cfg_(std::move(cfg)) {
  for (int t = 0; t < inst.n; ++t) {
    if (inst.dz == 1) {
      cutters_.emplace_back(inst, t, std::nullopt, -1);
    } else {
      auto splits = enumerate_splits(inst, t, cfg_.policy, cfg_.custom_splits);
      for (size_t s = 0; s < splits.size(); ++s)
        cutters_.emplace_back(inst, t, splits[s], static_cast<int>(s));
    }
  }
  emitted_.resize(cutters_.size());
}

std::vector<LinearCut> Separator::separate(const std::vector<double>& values) {
  std::vector<LinearCut> out;
  for (size_t c = 0; c < cutters_.size(); ++c) {
    const PeriodCutter& pc = cutters_[c];
    auto ws = pc.select_sigma_case(values, cfg_.eps);
    if (!ws) continue;
    LinearCut cut = pc.gradient_cut(*ws);
    if (!(cut.violation > cfg_.min_violation)) continue;
    // strongest bound on w_t from earlier cuts of this (t, split), at this point
    double prev = -std::numeric_limits<double>::infinity();
    VarId w{VarKind::Epigraph, cut.period, 0};
    for (const LinearCut& old : emitted_[c]) {
      double rest = old.lhs(L_, values) - old.coef.at(w) * values[L_.col(w)];
      prev = std::max(prev, (old.rhs - rest) / old.coef.at(w));
    }
    if (std::isfinite(prev) && !(ws->mu >= (1.0 + 1e-6) * prev + 1e-6)) continue;
    emitted_[c].push_back(cut);
    out.push_back(std::move(cut));
  }
  return out;
}

std::vector<LinearCut> Separator::feasibility_cuts(const std::vector<char>& fixed) const {
  std::vector<LinearCut> out;
  for (const PeriodCutter& pc : cutters_) {
    const PeriodData& pd = pc.data();
    std::vector<LinearCut> part;
    if (pc.split_id() < 0) {
      if (pd.t < static_cast<int>(fixed.size()) && fixed[pd.t]) continue;
      part = feasibility_cuts_1d(pd);
    } else {
      part = feasibility_cuts_multi(pc.split(), pd);
      for (auto& c : part) c.split = pc.split_id();
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace hcpcut
