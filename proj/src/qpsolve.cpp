#include "hcpcut/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace hcpcut {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SRow {
  std::vector<int> idx;
  std::vector<double> val;
};

enum RowKind { kLinear, kEpi, kLower, kUpper };

// g(x) = x_q' M x_q + a'x - b <= 0
struct IRow {
  SRow lin;
  double b = 0.0;
  int quad = -1;
  RowKind kind = kLinear;
  int src = -1;  // model row / epigraph / variable index
};

struct Quad {
  std::vector<int> idx;
  Mat M;
};

// min 1/2 x'Px + c'x  s.t. Ex = e, g_i(x) <= 0
struct Problem {
  int n = 0;
  std::vector<Eigen::Triplet<double>> P;  // lower triangle
  Vec c;
  std::vector<SRow> eq;
  Vec e;
  std::vector<IRow> in;
  std::vector<Quad> quads;
};

// maps scaled quantities back for termination tests
struct Unscale {
  Vec D;      // columns
  Vec req;    // equality rows
  Vec rin;    // inequality rows
  double cs = 1.0;
  double obj_const = 0.0;
  double data_norm = 0.0;
};

struct IpmResult {
  Vec x, nu, s, lam;
  bool converged = false;   // reached the target tolerance
  bool acceptable = false;  // met the contract tolerance
  double prim = kInf, dual = kInf, gap = kInf;
  int iters = 0;
};

class Ipm {
 public:
  explicit Ipm(const Problem& p) : p_(p) { build_pattern(); }

  IpmResult run(const Vec& x0, const Unscale& us, const QpSettings& st);

 private:
  void build_pattern();
  int pos(int r, int c) const;
  void eval_rows(const Vec& x, Vec& g);
  void assemble(const Vec& s, const Vec& lam, double reg);
  bool factor(double& reg, const Vec& s, const Vec& lam);
  void solve_kkt(const Vec& rhs, Vec& sol);

  const Problem& p_;
  int N_ = 0;  // n + meq
  SpMat K_;
  std::vector<int> diag_pos_;
  std::vector<int> P_pos_;
  std::vector<std::vector<int>> supp_;      // per row: sorted support
  std::vector<std::vector<int>> pair_pos_;  // per row: positions of (a>=b) pairs in supp order
  std::vector<std::vector<int>> qmap_;      // per row: quad idx -> local support index
  std::vector<std::vector<int>> eq_pos_;
  std::vector<Vec> grad_;                   // per row: gradient on support
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  std::vector<double> base_vals_;  // unregularized values of the last assembly
  double reg_used_ = 0.0;
};

void Ipm::build_pattern() {
  const int n = p_.n, meq = static_cast<int>(p_.eq.size());
  N_ = n + meq;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < N_; ++i) trip.emplace_back(i, i, 0.0);
  for (const auto& t : p_.P) trip.emplace_back(t.row(), t.col(), 0.0);
  supp_.resize(p_.in.size());
  qmap_.resize(p_.in.size());
  for (size_t r = 0; r < p_.in.size(); ++r) {
    const IRow& row = p_.in[r];
    std::vector<int> s = row.lin.idx;
    if (row.quad >= 0) s.insert(s.end(), p_.quads[row.quad].idx.begin(), p_.quads[row.quad].idx.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    supp_[r] = s;
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = 0; b <= a; ++b) trip.emplace_back(s[a], s[b], 0.0);
    if (row.quad >= 0)
      for (int q : p_.quads[row.quad].idx)
        qmap_[r].push_back(static_cast<int>(std::lower_bound(s.begin(), s.end(), q) - s.begin()));
  }
  for (int k = 0; k < meq; ++k)
    for (int j : p_.eq[k].idx) trip.emplace_back(n + k, j, 0.0);
  K_.resize(N_, N_);
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();

  diag_pos_.resize(N_);
  for (int i = 0; i < N_; ++i) diag_pos_[i] = pos(i, i);
  for (const auto& t : p_.P) P_pos_.push_back(pos(t.row(), t.col()));
  pair_pos_.resize(p_.in.size());
  grad_.resize(p_.in.size());
  for (size_t r = 0; r < p_.in.size(); ++r) {
    const auto& s = supp_[r];
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = 0; b <= a; ++b) pair_pos_[r].push_back(pos(s[a], s[b]));
    grad_[r] = Vec::Zero(s.size());
  }
  eq_pos_.resize(meq);
  for (int k = 0; k < meq; ++k)
    for (int j : p_.eq[k].idx) eq_pos_[k].push_back(pos(n + k, j));
  ldlt_.analyzePattern(K_);
}

int Ipm::pos(int r, int c) const {
  const int* inner = K_.innerIndexPtr();
  int lo = K_.outerIndexPtr()[c], hi = K_.outerIndexPtr()[c + 1];
  const int* it = std::lower_bound(inner + lo, inner + hi, r);
  return static_cast<int>(it - inner);
}

void Ipm::eval_rows(const Vec& x, Vec& g) {
  for (size_t r = 0; r < p_.in.size(); ++r) {
    const IRow& row = p_.in[r];
    const auto& s = supp_[r];
    Vec& gr = grad_[r];
    gr.setZero();
    double v = -row.b;
    for (size_t k = 0; k < row.lin.idx.size(); ++k) {
      v += row.lin.val[k] * x[row.lin.idx[k]];
      gr[std::lower_bound(s.begin(), s.end(), row.lin.idx[k]) - s.begin()] += row.lin.val[k];
    }
    if (row.quad >= 0) {
      const Quad& q = p_.quads[row.quad];
      const auto& qm = qmap_[r];
      Vec xv(q.idx.size());
      for (size_t a = 0; a < q.idx.size(); ++a) xv[a] = x[q.idx[a]];
      Vec Mx = q.M * xv;
      v += xv.dot(Mx);
      for (size_t a = 0; a < q.idx.size(); ++a) gr[qm[a]] += 2.0 * Mx[a];
    }
    g[r] = v;
  }
}

void Ipm::assemble(const Vec& s, const Vec& lam, double reg) {
  double* val = K_.valuePtr();
  std::fill(val, val + K_.nonZeros(), 0.0);
  for (size_t k = 0; k < p_.P.size(); ++k) val[P_pos_[k]] += p_.P[k].value();
  for (size_t r = 0; r < p_.in.size(); ++r) {
    const auto& s_ = supp_[r];
    const Vec& gr = grad_[r];
    double d = lam[r] / s[r];
    const auto& pp = pair_pos_[r];
    size_t q = 0;
    for (size_t a = 0; a < s_.size(); ++a)
      for (size_t b = 0; b <= a; ++b, ++q) val[pp[q]] += d * gr[a] * gr[b];
    const IRow& row = p_.in[r];
    if (row.quad >= 0 && lam[r] != 0.0) {
      const Quad& qd = p_.quads[row.quad];
      const auto& qm = qmap_[r];
      for (size_t a = 0; a < qd.idx.size(); ++a)
        for (size_t b = 0; b < qd.idx.size(); ++b) {
          int la = qm[a], lb = qm[b];
          if (la < lb) continue;
          // position of (la, lb) in the packed pair list
          size_t off = static_cast<size_t>(la) * (la + 1) / 2 + lb;
          double m = 2.0 * lam[r] * qd.M(a, b);
          if (la == lb && a != b) continue;  // cannot happen: idx unique
          val[pp[off]] += m;
        }
    }
  }
  for (size_t k = 0; k < p_.eq.size(); ++k)
    for (size_t j = 0; j < p_.eq[k].idx.size(); ++j) val[eq_pos_[k][j]] += p_.eq[k].val[j];
  base_vals_.assign(val, val + K_.nonZeros());
  const int n = p_.n;
  for (int i = 0; i < N_; ++i) val[diag_pos_[i]] += i < n ? reg : -reg;
  reg_used_ = reg;
}

bool Ipm::factor(double& reg, const Vec& s, const Vec& lam) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    assemble(s, lam, reg);
    ldlt_.factorize(K_);
    if (ldlt_.info() == Eigen::Success) {
      // quasi-definite: first n pivots positive, the rest negative
      const Vec& D = ldlt_.vectorD();
      bool ok = D.allFinite();
      if (ok) return true;
    }
    reg *= 100.0;
  }
  return false;
}

void Ipm::solve_kkt(const Vec& rhs, Vec& sol) {
  sol = ldlt_.solve(rhs);
  // refine against the unregularized matrix
  SpMat Kb = K_;
  std::copy(base_vals_.begin(), base_vals_.end(), Kb.valuePtr());
  for (int it = 0; it < 3; ++it) {
    Vec r = rhs - Kb.selfadjointView<Eigen::Lower>() * sol;
    if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
    sol += ldlt_.solve(r);
  }
}

double max_step(const Vec& v, const Vec& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

IpmResult Ipm::run(const Vec& x0, const Unscale& us, const QpSettings& st) {
  const int n = p_.n, meq = static_cast<int>(p_.eq.size()), m = static_cast<int>(p_.in.size());
  IpmResult res;
  Vec x = x0, nu = Vec::Zero(meq), g(m);
  eval_rows(x, g);
  Vec s(m), lam(m);
  for (int i = 0; i < m; ++i) {
    s[i] = std::max(-g[i], 1.0);
    lam[i] = 1.0;
  }
  res.x = x;
  res.nu = nu;
  res.s = s;
  res.lam = lam;
  res.prim = res.dual = res.gap = kInf;
  SpMat Pm(n, n);
  Pm.setFromTriplets(p_.P.begin(), p_.P.end());
  SpMat E(meq, n);
  {
    std::vector<Eigen::Triplet<double>> tr;
    for (int k = 0; k < meq; ++k)
      for (size_t j = 0; j < p_.eq[k].idx.size(); ++j)
        tr.emplace_back(k, p_.eq[k].idx[j], p_.eq[k].val[j]);
    E.setFromTriplets(tr.begin(), tr.end());
  }
  const double scale = 1.0 + us.data_norm;
  double reg = 1e-9;
  double best_merit = kInf;
  int since_best = 0;

  auto residuals = [&](Vec& rd, Vec& re, Vec& rp) {
    rd = Pm.selfadjointView<Eigen::Lower>() * x + p_.c + E.transpose() * nu;
    for (int r = 0; r < m; ++r) {
      const auto& sp = supp_[r];
      for (size_t a = 0; a < sp.size(); ++a) rd[sp[a]] += lam[r] * grad_[r][a];
    }
    re = E * x - p_.e;
    rp = g + s;
  };

  for (int k = 0;; ++k) {
    Vec rd, re, rp;
    residuals(rd, re, rp);
    // std::max drops NaN, so a blown-up iterate has to be caught before the merit
    if (!x.allFinite() || !nu.allFinite() || !s.allFinite() || !lam.allFinite() || !rd.allFinite() ||
        !g.allFinite()) {
      res.acceptable = best_merit <= st.accept_tol;
      return res;
    }
    double mu = m > 0 ? s.dot(lam) / m : 0.0;
    // unscaled measures
    double prim = 0.0, dual = 0.0;
    for (int i = 0; i < meq; ++i) prim = std::max(prim, std::abs(re[i]) / us.req[i]);
    for (int i = 0; i < m; ++i) prim = std::max(prim, std::max(g[i], 0.0) / us.rin[i]);
    for (int j = 0; j < n; ++j) dual = std::max(dual, std::abs(rd[j]) / (us.D[j] * us.cs));
    double obj = (0.5 * x.dot(Pm.selfadjointView<Eigen::Lower>() * x) + p_.c.dot(x)) / us.cs + us.obj_const;
    double comp = 0.0;
    for (int i = 0; i < m; ++i) comp += lam[i] * std::max(s[i], -g[i]);
    double gap = comp / us.cs / std::max(1.0, std::abs(obj));
    double merit = std::max({prim / scale, dual / scale, gap});
    if (merit < best_merit) {
      if (merit < 0.5 * best_merit) since_best = 0;
      best_merit = merit;
      res.x = x;
      res.nu = nu;
      res.s = s;
      res.lam = lam;
      res.prim = prim;
      res.dual = dual;
      res.gap = gap;
      res.iters = k;
    } else {
      ++since_best;
    }
    if (merit <= st.tol) {
      res.converged = res.acceptable = true;
      return res;
    }
    if (k >= st.max_iter || since_best > 25 || !x.allFinite() ||
        (m > 0 && lam.maxCoeff() > 1e14)) {
      res.acceptable = best_merit <= st.accept_tol;
      return res;
    }

    if (!factor(reg, s, lam)) {
      res.acceptable = best_merit <= st.accept_tol;
      return res;
    }

    auto newton = [&](const Vec& rc, Vec& dx, Vec& dnu, Vec& ds, Vec& dlam) {
      Vec rhs(N_);
      rhs.head(n) = -rd;
      for (int r = 0; r < m; ++r) {
        double coef = (lam[r] * rp[r] - rc[r]) / s[r];
        const auto& sp = supp_[r];
        for (size_t a = 0; a < sp.size(); ++a) rhs[sp[a]] -= grad_[r][a] * coef;
      }
      rhs.tail(meq) = -re;
      Vec sol;
      solve_kkt(rhs, sol);
      dx = sol.head(n);
      dnu = sol.tail(meq);
      ds.resize(m);
      for (int r = 0; r < m; ++r) {
        const auto& sp = supp_[r];
        double jd = 0.0;
        for (size_t a = 0; a < sp.size(); ++a) jd += grad_[r][a] * dx[sp[a]];
        ds[r] = -rp[r] - jd;
      }
      dlam = (-rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    Vec dx, dnu, ds, dlam;
    if (m == 0) {
      newton(Vec(), dx, dnu, ds, dlam);
      x += dx;
      nu += dnu;
      eval_rows(x, g);
      continue;
    }
    Vec rc = s.cwiseProduct(lam);
    newton(rc, dx, dnu, ds, dlam);
    double a_aff = std::min(max_step(s, ds), max_step(lam, dlam));
    double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dlam) / m;
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);
    rc = s.cwiseProduct(lam) + ds.cwiseProduct(dlam) - Vec::Constant(m, sigma * mu);
    newton(rc, dx, dnu, ds, dlam);
    double a = std::min(max_step(s, ds), max_step(lam, dlam));
    a = std::min(1.0, 0.995 * a);
    x += a * dx;
    nu += a * dnu;
    s += a * ds;
    lam += a * dlam;
    for (int i = 0; i < m; ++i) {
      s[i] = std::max(s[i], 1e-300);
      lam[i] = std::max(lam[i], 1e-300);
    }
    eval_rows(x, g);
  }
}

// ---------------------------------------------------------------------------

struct Canonical {
  Problem prob;           // scaled
  Unscale us;
  std::vector<int> free_of;   // model column -> free index or -1
  std::vector<int> col_of;    // free index -> model column
  std::vector<double> fixed;  // model values of fixed columns
  bool trivially_infeasible = false;
  // bookkeeping to recover model multipliers
  std::vector<int> eq_src;    // eq row -> model row
  std::vector<double> in_sign;  // +1 LessEq/epi/upper, -1 GreaterEq/lower
};

Canonical canonicalize(const ConvexModel& mdl, const QpSettings& st) {
  Canonical cn;
  const int N = mdl.num_vars();
  cn.free_of.assign(N, -1);
  cn.fixed.assign(N, 0.0);
  double dn = 0.0;
  for (int j = 0; j < N; ++j) {
    const Bound& b = mdl.bounds[j];
    if (b.lo > b.hi) cn.trivially_infeasible = true;
    if (b.lo == b.hi) {
      cn.fixed[j] = b.lo;
    } else {
      cn.free_of[j] = static_cast<int>(cn.col_of.size());
      cn.col_of.push_back(j);
    }
  }
  Problem& p = cn.prob;
  const int n = static_cast<int>(cn.col_of.size());
  p.n = n;
  p.c = Vec::Zero(n);
  double cst = mdl.constant;
  for (int j = 0; j < N; ++j) {
    if (cn.free_of[j] >= 0) p.c[cn.free_of[j]] += mdl.lin[j];
    else cst += mdl.lin[j] * cn.fixed[j];
  }
  std::map<std::pair<int, int>, double> Pacc;
  for (size_t a = 0; a < mdl.quad_idx.size(); ++a)
    for (size_t b = 0; b < mdl.quad_idx.size(); ++b) {
      double v = mdl.quad(a, b);
      if (v == 0.0) continue;
      int ca = mdl.quad_idx[a], cb = mdl.quad_idx[b];
      int fa = cn.free_of[ca], fb = cn.free_of[cb];
      if (fa >= 0 && fb >= 0) {
        if (fa >= fb) Pacc[{fa, fb}] += 2.0 * v;
      } else if (fa >= 0) {
        p.c[fa] += v * cn.fixed[cb];
      } else if (fb >= 0) {
        p.c[fb] += v * cn.fixed[ca];
      } else {
        cst += v * cn.fixed[ca] * cn.fixed[cb];
      }
    }
  for (auto& [k, v] : Pacc) p.P.emplace_back(k.first, k.second, v);
  for (int j = 0; j < n; ++j) dn = std::max(dn, std::abs(p.c[j]));
  for (auto& [k, v] : Pacc) dn = std::max(dn, std::abs(v));

  std::vector<double> eq_rhs;
  auto check_const_row = [&](double act, double rhs, Sense s) {
    double tol = 1e-9 * (1.0 + std::abs(rhs));
    bool ok = s == Sense::Equal ? std::abs(act - rhs) <= tol
              : s == Sense::LessEq ? act <= rhs + tol : act >= rhs - tol;
    if (!ok) cn.trivially_infeasible = true;
  };
  for (size_t r = 0; r < mdl.rows.size(); ++r) {
    const LinearRow& row = mdl.rows[r];
    SRow sr;
    double rhs = row.rhs;
    for (size_t k = 0; k < row.idx.size(); ++k) {
      int f = cn.free_of[row.idx[k]];
      if (f >= 0) {
        sr.idx.push_back(f);
        sr.val.push_back(row.val[k]);
        dn = std::max(dn, std::abs(row.val[k]));
      } else {
        rhs -= row.val[k] * cn.fixed[row.idx[k]];
      }
    }
    dn = std::max(dn, std::abs(rhs));
    if (sr.idx.empty()) {
      check_const_row(0.0, rhs, row.sense);
      continue;
    }
    if (row.sense == Sense::Equal) {
      p.eq.push_back(sr);
      eq_rhs.push_back(rhs);
      cn.eq_src.push_back(static_cast<int>(r));
    } else {
      IRow ir;
      double sg = row.sense == Sense::LessEq ? 1.0 : -1.0;
      for (double& v : sr.val) v *= sg;
      ir.lin = sr;
      ir.b = sg * rhs;
      ir.kind = kLinear;
      ir.src = static_cast<int>(r);
      p.in.push_back(ir);
      cn.in_sign.push_back(sg);
    }
  }
  for (size_t e = 0; e < mdl.epis.size(); ++e) {
    const EpigraphRow& ep = mdl.epis[e];
    std::vector<int> fidx;
    std::vector<int> floc;
    double c0 = 0.0;
    std::map<int, double> lin;
    for (size_t a = 0; a < ep.idx.size(); ++a) {
      int fa = cn.free_of[ep.idx[a]];
      if (fa >= 0) fidx.push_back(fa), floc.push_back(static_cast<int>(a));
      for (size_t b = 0; b < ep.idx.size(); ++b) {
        double v = ep.P(a, b);
        if (v == 0.0) continue;
        dn = std::max(dn, std::abs(v));
        int fb = cn.free_of[ep.idx[b]];
        if (fa < 0 && fb < 0) c0 += v * cn.fixed[ep.idx[a]] * cn.fixed[ep.idx[b]];
        else if (fa < 0) lin[fb] += v * cn.fixed[ep.idx[a]];
        else if (fb < 0) lin[fa] += v * cn.fixed[ep.idx[b]];
      }
    }
    int fw = cn.free_of[ep.w];
    if (fw >= 0) lin[fw] += -1.0;
    else c0 -= cn.fixed[ep.w];
    IRow ir;
    ir.kind = kEpi;
    ir.src = static_cast<int>(e);
    for (auto& [j, v] : lin)
      if (v != 0.0) ir.lin.idx.push_back(j), ir.lin.val.push_back(v);
    ir.b = -c0;
    Mat M(fidx.size(), fidx.size());
    bool nz = false;
    for (size_t a = 0; a < fidx.size(); ++a)
      for (size_t b = 0; b < fidx.size(); ++b) {
        M(a, b) = ep.P(floc[a], floc[b]);
        nz |= M(a, b) != 0.0;
      }
    if (nz) {
      // drop all-zero rows/cols of M to keep the support small
      std::vector<int> keep;
      for (size_t a = 0; a < fidx.size(); ++a)
        if (M.row(a).cwiseAbs().maxCoeff() > 0.0) keep.push_back(static_cast<int>(a));
      Quad q;
      q.M.resize(keep.size(), keep.size());
      for (size_t a = 0; a < keep.size(); ++a) {
        q.idx.push_back(fidx[keep[a]]);
        for (size_t b = 0; b < keep.size(); ++b) q.M(a, b) = M(keep[a], keep[b]);
      }
      ir.quad = static_cast<int>(p.quads.size());
      p.quads.push_back(std::move(q));
    }
    if (ir.lin.idx.empty() && ir.quad < 0) {
      check_const_row(c0, 0.0, Sense::LessEq);
      continue;
    }
    p.in.push_back(ir);
    cn.in_sign.push_back(1.0);
  }
  const size_t n_struct = p.in.size();
  for (int f = 0; f < n; ++f) {
    const Bound& b = mdl.bounds[cn.col_of[f]];
    if (std::isfinite(b.lo)) {
      IRow ir;
      ir.lin.idx = {f};
      ir.lin.val = {-1.0};
      ir.b = -b.lo;
      ir.kind = kLower;
      ir.src = cn.col_of[f];
      p.in.push_back(ir);
      cn.in_sign.push_back(-1.0);
      dn = std::max(dn, std::abs(b.lo));
    }
    if (std::isfinite(b.hi)) {
      IRow ir;
      ir.lin.idx = {f};
      ir.lin.val = {1.0};
      ir.b = b.hi;
      ir.kind = kUpper;
      ir.src = cn.col_of[f];
      p.in.push_back(ir);
      cn.in_sign.push_back(1.0);
      dn = std::max(dn, std::abs(b.hi));
    }
  }
  p.e = Eigen::Map<Vec>(eq_rhs.data(), eq_rhs.size());

  // Ruiz equilibration over the linear data and P
  Unscale& us = cn.us;
  us.data_norm = dn;
  us.D = Vec::Ones(n);
  us.req = Vec::Ones(p.eq.size());
  us.rin = Vec::Ones(p.in.size());
  for (int it = 0; it < st.ruiz_iters; ++it) {
    Vec cn_(Vec::Zero(n)), rq(Vec::Zero(p.eq.size())), ri(Vec::Zero(n_struct));
    for (const auto& t : p.P) {
      double v = std::abs(t.value() * us.D[t.row()] * us.D[t.col()]);
      cn_[t.row()] = std::max(cn_[t.row()], v);
      cn_[t.col()] = std::max(cn_[t.col()], v);
    }
    for (size_t k = 0; k < p.eq.size(); ++k)
      for (size_t j = 0; j < p.eq[k].idx.size(); ++j) {
        int c = p.eq[k].idx[j];
        double v = std::abs(p.eq[k].val[j] * us.D[c] * us.req[k]);
        cn_[c] = std::max(cn_[c], v);
        rq[k] = std::max(rq[k], v);
      }
    for (size_t r = 0; r < n_struct; ++r) {
      const IRow& row = p.in[r];
      for (size_t j = 0; j < row.lin.idx.size(); ++j) {
        int c = row.lin.idx[j];
        double v = std::abs(row.lin.val[j] * us.D[c] * us.rin[r]);
        cn_[c] = std::max(cn_[c], v);
        ri[r] = std::max(ri[r], v);
      }
      if (row.quad >= 0) {
        const Quad& q = p.quads[row.quad];
        for (size_t a = 0; a < q.idx.size(); ++a) {
          double v = std::abs(q.M(a, a)) * us.D[q.idx[a]] * us.D[q.idx[a]] * us.rin[r];
          ri[r] = std::max(ri[r], v);
        }
      }
    }
    for (int j = 0; j < n; ++j)
      if (cn_[j] > 0.0) us.D[j] = std::clamp(us.D[j] / std::sqrt(cn_[j]), 1e-6, 1e6);
    for (size_t k = 0; k < p.eq.size(); ++k)
      if (rq[k] > 0.0) us.req[k] /= std::sqrt(rq[k]);
    for (size_t r = 0; r < n_struct; ++r)
      if (ri[r] > 0.0) us.rin[r] /= std::sqrt(ri[r]);
  }
  // apply
  for (auto& t : p.P) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() * us.D[t.row()] * us.D[t.col()]);
  for (int j = 0; j < n; ++j) p.c[j] *= us.D[j];
  double pmax = 0.0;
  for (const auto& t : p.P) pmax = std::max(pmax, std::abs(t.value()));
  us.cs = 1.0 / std::max({1.0, p.c.size() ? p.c.lpNorm<Eigen::Infinity>() : 0.0, pmax});
  for (auto& t : p.P) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() * us.cs);
  p.c *= us.cs;
  us.obj_const = cst;
  for (size_t k = 0; k < p.eq.size(); ++k) {
    for (size_t j = 0; j < p.eq[k].idx.size(); ++j) p.eq[k].val[j] *= us.req[k] * us.D[p.eq[k].idx[j]];
    p.e[k] *= us.req[k];
  }
  for (size_t r = 0; r < p.in.size(); ++r) {
    IRow& row = p.in[r];
    if (r >= n_struct) us.rin[r] = 1.0 / us.D[row.lin.idx[0]];
    double rs = us.rin[r];
    for (size_t j = 0; j < row.lin.idx.size(); ++j) row.lin.val[j] *= rs * us.D[row.lin.idx[j]];
    row.b *= rs;
  }
  for (size_t r = 0; r < n_struct; ++r) {
    const IRow& row = p.in[r];
    if (row.quad < 0) continue;
    Quad& q = p.quads[row.quad];
    for (size_t a = 0; a < q.idx.size(); ++a)
      for (size_t b = 0; b < q.idx.size(); ++b) q.M(a, b) *= us.rin[r] * us.D[q.idx[a]] * us.D[q.idx[b]];
  }
  return cn;
}

Vec default_start(const Canonical& cn, const ConvexModel& mdl, const std::vector<double>* warm) {
  const int n = cn.prob.n;
  Vec x(n);
  for (int f = 0; f < n; ++f) {
    int j = cn.col_of[f];
    double lo = mdl.bounds[j].lo, hi = mdl.bounds[j].hi, v;
    if (std::isfinite(lo) && std::isfinite(hi)) v = 0.5 * (lo + hi);
    else if (std::isfinite(lo)) v = lo + 1.0 / cn.us.D[f];
    else if (std::isfinite(hi)) v = hi - 1.0 / cn.us.D[f];
    else v = 0.0;
    if (warm) {
      double wv = (*warm)[j];
      // keep a margin from the bounds so the interior start stays well centered
      double span = (std::isfinite(lo) && std::isfinite(hi)) ? hi - lo : 1.0 / cn.us.D[f];
      double lo_m = std::isfinite(lo) ? lo + 0.05 * span : -kInf;
      double hi_m = std::isfinite(hi) ? hi - 0.05 * span : kInf;
      v = std::clamp(wv, lo_m, hi_m);
    }
    x[f] = v / cn.us.D[f];
  }
  return x;
}

// min t  s.t. every row relaxed by t, bounds kept hard; returns t* (scaled units) or nan
double phase_one(const Canonical& cn, const Vec& x0, const QpSettings& st) {
  const Problem& p = cn.prob;
  Problem q;
  const int n = p.n, tcol = n;
  q.n = n + 1;
  q.c = Vec::Zero(n + 1);
  q.c[tcol] = 1.0;
  q.quads = p.quads;
  q.e = Vec::Zero(0);
  for (size_t k = 0; k < p.eq.size(); ++k)
    for (double sg : {1.0, -1.0}) {
      IRow r;
      for (size_t j = 0; j < p.eq[k].idx.size(); ++j) {
        r.lin.idx.push_back(p.eq[k].idx[j]);
        r.lin.val.push_back(sg * p.eq[k].val[j]);
      }
      r.lin.idx.push_back(tcol);
      r.lin.val.push_back(-1.0);
      r.b = sg * p.e[k];
      q.in.push_back(r);
    }
  for (const IRow& row : p.in) {
    IRow r = row;
    if (row.kind == kLinear || row.kind == kEpi) {
      r.lin.idx.push_back(tcol);
      r.lin.val.push_back(-1.0);
    }
    q.in.push_back(r);
  }
  IRow tl;
  tl.lin.idx = {tcol};
  tl.lin.val = {-1.0};
  tl.b = 1.0;  // t >= -1
  tl.kind = kLower;
  q.in.push_back(tl);

  Unscale us;
  us.D = Vec::Ones(n + 1);
  us.req = Vec::Ones(0);
  us.rin = Vec::Ones(q.in.size());
  us.data_norm = 1.0;
  Vec x(n + 1);
  x.head(n) = x0;
  x[tcol] = 1.0;
  Ipm ipm(q);
  QpSettings s2 = st;
  s2.tol = 1e-10;
  s2.max_iter = 200;
  IpmResult r = ipm.run(x, us, s2);
  if (!r.acceptable && !(r.prim < 1e-8)) return std::numeric_limits<double>::quiet_NaN();
  return r.x[tcol];
}

RelaxPoint finish(const ConvexModel& mdl, const Canonical& cn, const IpmResult& r) {
  RelaxPoint out;
  out.layout = mdl.layout;
  const int N = mdl.num_vars();
  out.values = cn.fixed;
  for (int f = 0; f < cn.prob.n; ++f) out.values[cn.col_of[f]] = cn.us.D[f] * r.x[f];
  out.objective = mdl.objective(out.values);
  out.primal_residual = r.prim;
  out.dual_residual = r.dual;
  out.gap = r.gap;
  out.iterations = r.iters;
  out.data_norm = cn.us.data_norm;

  out.row_duals.assign(mdl.rows.size(), 0.0);
  out.epi_duals.assign(mdl.epis.size(), 0.0);
  for (size_t k = 0; k < cn.eq_src.size(); ++k)
    out.row_duals[cn.eq_src[k]] = cn.us.req[k] * r.nu[k] / cn.us.cs;
  std::vector<double> bound_dual(N, 0.0);
  for (size_t i = 0; i < cn.prob.in.size(); ++i) {
    const IRow& row = cn.prob.in[i];
    double lam = cn.us.rin[i] * r.lam[i] / cn.us.cs;
    switch (row.kind) {
      case kLinear: out.row_duals[row.src] = cn.in_sign[i] * lam; break;
      case kEpi: out.epi_duals[row.src] = lam; break;
      case kLower: bound_dual[row.src] += lam; break;
      case kUpper: bound_dual[row.src] -= lam; break;
    }
  }
  // reduced costs: explained by bound multipliers on free columns, residual gradient on fixed ones
  std::vector<double> grad(N, 0.0);
  for (int j = 0; j < N; ++j) grad[j] = mdl.lin[j];
  for (size_t a = 0; a < mdl.quad_idx.size(); ++a)
    for (size_t b = 0; b < mdl.quad_idx.size(); ++b)
      grad[mdl.quad_idx[a]] += 2.0 * mdl.quad(a, b) * out.values[mdl.quad_idx[b]];
  for (size_t k = 0; k < mdl.rows.size(); ++k)
    for (size_t q = 0; q < mdl.rows[k].idx.size(); ++q)
      grad[mdl.rows[k].idx[q]] += out.row_duals[k] * mdl.rows[k].val[q];
  for (size_t e = 0; e < mdl.epis.size(); ++e) {
    const EpigraphRow& ep = mdl.epis[e];
    for (size_t a = 0; a < ep.idx.size(); ++a) {
      double d = 0.0;
      for (size_t b = 0; b < ep.idx.size(); ++b) d += 2.0 * ep.P(a, b) * out.values[ep.idx[b]];
      grad[ep.idx[a]] += out.epi_duals[e] * d;
    }
    grad[ep.w] -= out.epi_duals[e];
  }
  out.reduced_costs.assign(N, 0.0);
  for (int j = 0; j < N; ++j)
    out.reduced_costs[j] = cn.free_of[j] >= 0 ? bound_dual[j] : grad[j];
  return out;
}

RelaxPoint solve_impl(const ConvexModel& mdl, const QpSettings& st, const std::vector<double>* warm) {
  Canonical cn = canonicalize(mdl, st);
  RelaxPoint out;
  out.layout = mdl.layout;
  if (cn.trivially_infeasible) {
    out.status = SolveStatus::Infeasible;
    out.values = cn.fixed;
    out.objective = std::numeric_limits<double>::infinity();
    return out;
  }
  Vec x0 = default_start(cn, mdl, warm);
  Ipm ipm(cn.prob);
  IpmResult r = ipm.run(x0, cn.us, st);
  if (warm && !r.acceptable) {
    x0 = default_start(cn, mdl, nullptr);
    r = ipm.run(x0, cn.us, st);
  }
  out = finish(mdl, cn, r);
  if (r.acceptable) {
    out.status = SolveStatus::Optimal;
    return out;
  }
  double t = phase_one(cn, default_start(cn, mdl, nullptr), st);
  if (std::isfinite(t) && t > st.infeas_tol) {
    out.status = SolveStatus::Infeasible;
    out.objective = std::numeric_limits<double>::infinity();
  } else {
    out.status = SolveStatus::IterationLimit;
  }
  return out;
}

}  // namespace

RelaxPoint solve_relaxation(const ConvexModel& m, const QpSettings& s) {
  return solve_impl(m, s, nullptr);
}

RelaxPoint warm_start(const ConvexModel& m, const RelaxPoint& base, const QpSettings& s) {
  if (static_cast<int>(base.values.size()) != m.num_vars()) return solve_impl(m, s, nullptr);
  return solve_impl(m, s, &base.values);
}

KktReport kkt_check(const ConvexModel& m, const RelaxPoint& p) {
  KktReport k;
  const int N = m.num_vars();
  const auto& x = p.values;
  std::vector<double> grad(N, 0.0);
  for (int j = 0; j < N; ++j) grad[j] = m.lin[j];
  for (size_t a = 0; a < m.quad_idx.size(); ++a)
    for (size_t b = 0; b < m.quad_idx.size(); ++b)
      grad[m.quad_idx[a]] += 2.0 * m.quad(a, b) * x[m.quad_idx[b]];
  for (size_t r = 0; r < m.rows.size(); ++r) {
    const LinearRow& row = m.rows[r];
    double y = p.row_duals[r];
    for (size_t q = 0; q < row.idx.size(); ++q) grad[row.idx[q]] += y * row.val[q];
    double act = row.activity(x);
    k.primal = std::max(k.primal, row.violation(x));
    if (row.sense == Sense::LessEq) {
      k.dual_sign = std::max(k.dual_sign, -y);
      k.complementarity = std::max(k.complementarity, std::abs(y * (row.rhs - act)));
    } else if (row.sense == Sense::GreaterEq) {
      k.dual_sign = std::max(k.dual_sign, y);
      k.complementarity = std::max(k.complementarity, std::abs(y * (act - row.rhs)));
    }
  }
  for (size_t e = 0; e < m.epis.size(); ++e) {
    const EpigraphRow& ep = m.epis[e];
    double mu = p.epi_duals[e];
    for (size_t a = 0; a < ep.idx.size(); ++a) {
      double d = 0.0;
      for (size_t b = 0; b < ep.idx.size(); ++b) d += 2.0 * ep.P(a, b) * x[ep.idx[b]];
      grad[ep.idx[a]] += mu * d;
    }
    grad[ep.w] -= mu;
    double slack = x[ep.w] - ep.form(x);
    k.primal = std::max(k.primal, -slack);
    k.dual_sign = std::max(k.dual_sign, -mu);
    k.complementarity = std::max(k.complementarity, std::abs(mu * slack));
  }
  for (int j = 0; j < N; ++j) {
    const Bound& b = m.bounds[j];
    k.primal = std::max({k.primal, b.lo - x[j], x[j] - b.hi});
    if (b.lo == b.hi) continue;
    double rc = p.reduced_costs[j];
    k.stationarity = std::max(k.stationarity, std::abs(grad[j] - rc));
    if (rc > 0.0) {
      if (!std::isfinite(b.lo)) k.dual_sign = std::max(k.dual_sign, rc);
      else k.complementarity = std::max(k.complementarity, std::abs(rc * (x[j] - b.lo)));
    } else if (rc < 0.0) {
      if (!std::isfinite(b.hi)) k.dual_sign = std::max(k.dual_sign, -rc);
      else k.complementarity = std::max(k.complementarity, std::abs(rc * (b.hi - x[j])));
    }
  }
  return k;
}

}  // namespace hcpcut
