#include "hcpcut/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace hcpcut {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string period_name(const char* what, int t) {
  return std::string(what) + "[" + std::to_string(t + 1) + "]";
}

void check_psd(const Mat& M, const std::string& where, ValidationReport& rep) {
  if (M.rows() != M.cols()) return;  // dimension check reports it
  double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    rep.violations.push_back({"symmetry", where, "matrix is not symmetric"});
    return;
  }
  if (!M.allFinite()) {
    rep.violations.push_back({"finite data", where, "non-finite entry"});
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-10 * scale) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lo;
    rep.violations.push_back({"positive semidefinite", where, os.str()});
  }
}

bool dims(const Mat& M, int r, int c) { return M.rows() == r && M.cols() == c; }

}  // namespace

Vec HcpInstance::state_lb(int t) const {
  if (t == 0 && x_init) return *x_init;
  return lb[t];
}

Vec HcpInstance::state_ub(int t) const {
  if (t == 0 && x_init) return *x_init;
  return ub[t];
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations)
    os << v.invariant << " at " << v.where << ": " << v.detail << "\n";
  return os.str();
}

ValidationReport validate(const HcpInstance& in, bool cuts_enabled) {
  ValidationReport rep;
  auto bad = [&](std::string inv, std::string where, std::string detail) {
    rep.violations.push_back({std::move(inv), std::move(where), std::move(detail)});
  };
  if (in.n < 1 || in.dx < 1 || in.dy < 1 || in.dz < 1) {
    bad("dimensions", "header", "n, dx, dy, dz must all be >= 1");
    return rep;
  }
  const size_t n = in.n;
  auto count = [&](const char* name, size_t got, size_t want) {
    if (got != want) {
      bad("dimensions", name,
          "expected " + std::to_string(want) + " periods, got " + std::to_string(got));
      return false;
    }
    return true;
  };
  bool sizes = count("Q", in.Q.size(), n + 1) & count("R", in.R.size(), n) &
               count("S", in.S.size(), n) & count("A", in.A.size(), n) &
               count("B", in.B.size(), n) & count("C", in.C.size(), n) &
               count("f", in.f.size(), n) & count("G", in.G.size(), n) &
               count("H", in.H.size(), n) & count("lb", in.lb.size(), n + 1) &
               count("ub", in.ub.size(), n + 1);
  if (!in.lin_x.empty()) sizes &= count("lin_x", in.lin_x.size(), n + 1);
  if (!in.lin_y.empty()) sizes &= count("lin_y", in.lin_y.size(), n);
  if (!sizes) return rep;

  const int dx = in.dx, dy = in.dy, dz = in.dz;
  for (int t = 0; t <= in.n; ++t) {
    if (!dims(in.Q[t], dx, dx)) {
      bad("dimensions", period_name("Q", t), "expected dx x dx");
    } else {
      check_psd(in.Q[t], period_name("Q", t), rep);
      if (cuts_enabled && t >= 1) {
        Mat off = in.Q[t];
        off.diagonal().setZero();
        if (off.cwiseAbs().maxCoeff() > 0.0)
          bad("diagonal state cost", period_name("Q", t),
              "cut generation requires a diagonal Q for t >= 2");
      }
    }
    if (in.lb[t].size() != dx || in.ub[t].size() != dx) {
      bad("dimensions", period_name("lb/ub", t), "expected dx entries");
      continue;
    }
    for (int i = 0; i < dx; ++i) {
      if (!std::isfinite(in.lb[t][i]) || !std::isfinite(in.ub[t][i]))
        bad("finite bounds", period_name("lb/ub", t), "coordinate " + std::to_string(i + 1));
      else if (in.lb[t][i] > in.ub[t][i])
        bad("bound order", period_name("lb/ub", t),
            "coordinate " + std::to_string(i + 1) + ": lb > ub");
    }
    if (!in.lin_x.empty() && in.lin_x[t].size() != dx)
      bad("dimensions", period_name("lin_x", t), "expected dx entries");
  }
  for (int t = 0; t < in.n; ++t) {
    if (!dims(in.R[t], dy, dy)) bad("dimensions", period_name("R", t), "expected dy x dy");
    else check_psd(in.R[t], period_name("R", t), rep);
    if (!dims(in.S[t], dz, dz)) bad("dimensions", period_name("S", t), "expected dz x dz");
    else check_psd(in.S[t], period_name("S", t), rep);
    if (!dims(in.A[t], dx, dx)) bad("dimensions", period_name("A", t), "expected dx x dx");
    if (!dims(in.B[t], dx, dy)) bad("dimensions", period_name("B", t), "expected dx x dy");
    if (!dims(in.C[t], dx, dz)) bad("dimensions", period_name("C", t), "expected dx x dz");
    if (in.f[t].size() != dx) bad("dimensions", period_name("f", t), "expected dx entries");
    if (!in.lin_y.empty() && in.lin_y[t].size() != dy)
      bad("dimensions", period_name("lin_y", t), "expected dy entries");
    if (!dims(in.G[t], dy, dz) || !dims(in.H[t], dy, dz)) {
      bad("dimensions", period_name("G/H", t), "expected dy x dz");
      continue;
    }
    for (int k = 0; k < dz; ++k)
      for (int j = 0; j < dy; ++j)
        if (in.G[t](j, k) > in.H[t](j, k))
          bad("control bound order", period_name("G/H", t),
              "mode " + std::to_string(k + 1) + ", control " + std::to_string(j + 1));
  }
  if (in.x_init) {
    if (in.x_init->size() != dx) {
      bad("dimensions", "x_init", "expected dx entries");
    } else {
      for (int i = 0; i < dx; ++i)
        if ((*in.x_init)[i] < in.lb[0][i] - 1e-9 || (*in.x_init)[i] > in.ub[0][i] + 1e-9)
          bad("bound order", "x_init", "coordinate " + std::to_string(i + 1) + " outside box");
    }
  }
  return rep;
}

std::string to_string(const VarId& v) {
  const char* k = "x";
  switch (v.kind) {
    case VarKind::State: k = "x"; break;
    case VarKind::Control: k = "y"; break;
    case VarKind::Indicator: k = "z"; break;
    case VarKind::Epigraph: return "w[" + std::to_string(v.t + 1) + "]";
  }
  return std::string(k) + "[" + std::to_string(v.t + 1) + "," + std::to_string(v.i + 1) + "]";
}

int VarLayout::col(const VarId& v) const {
  auto fail = [&] { throw DimensionError("variable out of range: " + to_string(v)); };
  switch (v.kind) {
    case VarKind::State:
      if (v.t < 0 || v.t > n || v.i < 0 || v.i >= dx) fail();
      return x(v.t, v.i);
    case VarKind::Control:
      if (v.t < 0 || v.t >= n || v.i < 0 || v.i >= dy) fail();
      return y(v.t, v.i);
    case VarKind::Indicator:
      if (v.t < 0 || v.t >= n || v.i < 0 || v.i >= dz) fail();
      return z(v.t, v.i);
    case VarKind::Epigraph:
      if (v.t < 0 || v.t >= n || v.i != 0) fail();
      return w(v.t);
  }
  fail();
  return -1;
}

VarId VarLayout::id(int c) const {
  if (c < 0 || c >= size()) throw DimensionError("column out of range");
  int nx = (n + 1) * dx, ny = n * dy, nz = n * dz;
  if (c < nx) return {VarKind::State, c / dx, c % dx};
  c -= nx;
  if (c < ny) return {VarKind::Control, c / dy, c % dy};
  c -= ny;
  if (c < nz) return {VarKind::Indicator, c / dz, c % dz};
  c -= nz;
  return {VarKind::Epigraph, c, 0};
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Original: return "original";
    case Provenance::Feasibility: return "feasibility";
    case Provenance::Gradient: return "gradient";
    case Provenance::ModeFix: return "mode-fix";
  }
  return "?";
}

double LinearRow::activity(const std::vector<double>& x) const {
  double s = 0.0;
  for (size_t k = 0; k < idx.size(); ++k) s += val[k] * x[idx[k]];
  return s;
}

double LinearRow::violation(const std::vector<double>& x) const {
  double a = activity(x);
  switch (sense) {
    case Sense::LessEq: return a - rhs;
    case Sense::GreaterEq: return rhs - a;
    case Sense::Equal: return std::abs(a - rhs);
  }
  return 0.0;
}

double EpigraphRow::form(const std::vector<double>& x) const {
  Vec v(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) v[k] = x[idx[k]];
  return v.dot(P * v);
}

double ConvexModel::objective(const std::vector<double>& x) const {
  double s = constant;
  for (size_t c = 0; c < lin.size(); ++c) s += lin[c] * x[c];
  if (!quad_idx.empty()) {
    Vec v(quad_idx.size());
    for (size_t k = 0; k < quad_idx.size(); ++k) v[k] = x[quad_idx[k]];
    s += v.dot(quad * v);
  }
  return s;
}

int ConvexModel::count_rows(Provenance p) const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(),
                                        [&](const LinearRow& r) { return r.prov == p; }));
}

ConvexModel build_epigraph(const HcpInstance& in) {
  auto rep = validate(in, false);
  if (!rep.ok()) throw DimensionError("invalid instance: " + rep.to_string());

  ConvexModel m;
  VarLayout& L = m.layout;
  L = {in.n, in.dx, in.dy, in.dz};
  const int N = L.size();
  m.bounds.assign(N, {});
  m.integral.assign(N, 0);
  m.lin.assign(N, 0.0);
  m.constant = in.obj_offset;

  for (int t = 0; t <= in.n; ++t) {
    Vec lo = in.state_lb(t), hi = in.state_ub(t);
    for (int i = 0; i < in.dx; ++i) m.bounds[L.x(t, i)] = {lo[i], hi[i]};
  }
  for (int t = 0; t < in.n; ++t) {
    for (int j = 0; j < in.dy; ++j) {
      // implied by gating plus the mode row
      double lo = in.G[t].row(j).minCoeff(), hi = in.H[t].row(j).maxCoeff();
      if (!in.mode_exactly_one) {
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
      }
      m.bounds[L.y(t, j)] = {lo, hi};
    }
    for (int k = 0; k < in.dz; ++k) {
      m.bounds[L.z(t, k)] = {0.0, 1.0};
      m.integral[L.z(t, k)] = 1;
    }
    m.bounds[L.w(t)] = {0.0, kInf};
  }

  m.quad_idx.resize(in.dx);
  for (int i = 0; i < in.dx; ++i) m.quad_idx[i] = L.x(0, i);
  m.quad = in.Q[0];
  for (int t = 0; t < in.n; ++t) m.lin[L.w(t)] = 1.0;
  if (!in.lin_x.empty())
    for (int t = 0; t <= in.n; ++t)
      for (int i = 0; i < in.dx; ++i) m.lin[L.x(t, i)] += in.lin_x[t][i];
  if (!in.lin_y.empty())
    for (int t = 0; t < in.n; ++t)
      for (int j = 0; j < in.dy; ++j) m.lin[L.y(t, j)] += in.lin_y[t][j];

  for (int t = 0; t < in.n; ++t) {
    // x_{t+1} - A x_t - B y_t - C z_t = f_t
    for (int i = 0; i < in.dx; ++i) {
      LinearRow r;
      r.sense = Sense::Equal;
      r.period = t;
      r.idx.push_back(L.x(t + 1, i));
      r.val.push_back(1.0);
      for (int k = 0; k < in.dx; ++k)
        if (in.A[t](i, k) != 0.0) r.idx.push_back(L.x(t, k)), r.val.push_back(-in.A[t](i, k));
      for (int j = 0; j < in.dy; ++j)
        if (in.B[t](i, j) != 0.0) r.idx.push_back(L.y(t, j)), r.val.push_back(-in.B[t](i, j));
      for (int k = 0; k < in.dz; ++k)
        if (in.C[t](i, k) != 0.0) r.idx.push_back(L.z(t, k)), r.val.push_back(-in.C[t](i, k));
      r.rhs = in.f[t][i];
      m.rows.push_back(std::move(r));
    }
    {
      LinearRow r;
      r.sense = in.mode_exactly_one ? Sense::Equal : Sense::LessEq;
      r.rhs = 1.0;
      r.period = t;
      for (int k = 0; k < in.dz; ++k) r.idx.push_back(L.z(t, k)), r.val.push_back(1.0);
      m.rows.push_back(std::move(r));
    }
    for (int side = 0; side < 2; ++side) {
      const Mat& GH = side == 0 ? in.G[t] : in.H[t];
      for (int j = 0; j < in.dy; ++j) {
        LinearRow r;
        r.sense = side == 0 ? Sense::GreaterEq : Sense::LessEq;
        r.period = t;
        r.idx.push_back(L.y(t, j));
        r.val.push_back(1.0);
        for (int k = 0; k < in.dz; ++k)
          if (GH(j, k) != 0.0) r.idx.push_back(L.z(t, k)), r.val.push_back(-GH(j, k));
        m.rows.push_back(std::move(r));
      }
    }
    EpigraphRow e;
    e.period = t;
    e.w = L.w(t);
    const int d = in.dx + in.dy + in.dz;
    e.P = Mat::Zero(d, d);
    e.P.block(0, 0, in.dx, in.dx) = in.Q[t + 1];
    e.P.block(in.dx, in.dx, in.dy, in.dy) = in.R[t];
    e.P.block(in.dx + in.dy, in.dx + in.dy, in.dz, in.dz) = in.S[t];
    for (int i = 0; i < in.dx; ++i) e.idx.push_back(L.x(t + 1, i));
    for (int j = 0; j < in.dy; ++j) e.idx.push_back(L.y(t, j));
    for (int k = 0; k < in.dz; ++k) e.idx.push_back(L.z(t, k));
    m.epis.push_back(std::move(e));
  }
  return m;
}

ConvexModel fix_variable(const ConvexModel& m, const VarId& v, double value) {
  int c = m.layout.col(v);
  const Bound& b = m.bounds[c];
  if (!(value >= b.lo - 1e-9 && value <= b.hi + 1e-9))
    throw InfeasibleFix("cannot fix " + to_string(v) + " outside its bounds");
  ConvexModel out = m;
  out.bounds[c] = {value, value};
  return out;
}

ConvexModel with_rows(const ConvexModel& m, const std::vector<LinearRow>& extra) {
  ConvexModel out = m;
  out.rows.insert(out.rows.end(), extra.begin(), extra.end());
  return out;
}

Assignment extract(const HcpInstance& in, const std::vector<double>& v) {
  VarLayout L{in.n, in.dx, in.dy, in.dz};
  Assignment a;
  for (int t = 0; t <= in.n; ++t) {
    Vec x(in.dx);
    for (int i = 0; i < in.dx; ++i) x[i] = v[L.x(t, i)];
    a.x.push_back(x);
  }
  for (int t = 0; t < in.n; ++t) {
    Vec y(in.dy), z(in.dz);
    for (int j = 0; j < in.dy; ++j) y[j] = v[L.y(t, j)];
    for (int k = 0; k < in.dz; ++k) z[k] = v[L.z(t, k)];
    a.y.push_back(y);
    a.z.push_back(z);
  }
  return a;
}

double direct_objective(const HcpInstance& in, const Assignment& a) {
  double s = in.obj_offset + a.x[0].dot(in.Q[0] * a.x[0]);
  for (int t = 0; t < in.n; ++t) {
    s += a.x[t + 1].dot(in.Q[t + 1] * a.x[t + 1]);
    s += a.y[t].dot(in.R[t] * a.y[t]);
    s += a.z[t].dot(in.S[t] * a.z[t]);
  }
  if (!in.lin_x.empty())
    for (int t = 0; t <= in.n; ++t) s += in.lin_x[t].dot(a.x[t]);
  if (!in.lin_y.empty())
    for (int t = 0; t < in.n; ++t) s += in.lin_y[t].dot(a.y[t]);
  return s;
}

double max_violation(const HcpInstance& in, const Assignment& a) {
  double worst = 0.0;
  auto up = [&](double v) { worst = std::max(worst, v); };
  for (int t = 0; t <= in.n; ++t) {
    Vec lo = in.state_lb(t), hi = in.state_ub(t);
    up((lo - a.x[t]).maxCoeff());
    up((a.x[t] - hi).maxCoeff());
  }
  for (int t = 0; t < in.n; ++t) {
    Vec r = a.x[t + 1] - in.A[t] * a.x[t] - in.B[t] * a.y[t] - in.C[t] * a.z[t] - in.f[t];
    up(r.cwiseAbs().maxCoeff());
    double sz = a.z[t].sum();
    up(in.mode_exactly_one ? std::abs(sz - 1.0) : sz - 1.0);
    up((-a.z[t]).maxCoeff());
    up((a.z[t] - Vec::Ones(in.dz)).maxCoeff());
    up((in.G[t] * a.z[t] - a.y[t]).maxCoeff());
    up((a.y[t] - in.H[t] * a.z[t]).maxCoeff());
  }
  return worst;
}

}  // namespace hcpcut
