#include "hcpcut/bounds.hpp"

namespace hcpcut {

IntervalImage interval_image(const Mat& A, const Vec& lb, const Vec& ub) {
  if (A.cols() != lb.size() || lb.size() != ub.size())
    throw DimensionError("interval_image: dimension mismatch");
  for (Eigen::Index j = 0; j < lb.size(); ++j)
    if (lb[j] > ub[j]) throw DomainError("interval_image: empty box in coordinate " + std::to_string(j + 1));
  IntervalImage img{Vec::Zero(A.rows()), Vec::Zero(A.rows())};
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      double a = A(i, j);
      // zero entries contribute to neither sum
      if (a > 0.0) {
        lo += a * lb[j];
        hi += a * ub[j];
      } else if (a < 0.0) {
        lo += a * ub[j];
        hi += a * lb[j];
      }
    }
    img.lower[i] = lo;
    img.upper[i] = hi;
  }
  return img;
}

AffineExpr& AffineExpr::add(const VarId& v, double c) {
  if (c == 0.0) return *this;
  double& slot = terms[v];
  slot += c;
  if (slot == 0.0) terms.erase(v);
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  for (const auto& [v, c] : o.terms) add(v, c);
  constant += o.constant;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  if (s == 0.0) terms.clear();
  for (auto& [v, c] : terms) c *= s;
  constant *= s;
  return *this;
}

double AffineExpr::eval(const VarLayout& L, const std::vector<double>& values) const {
  double s = constant;
  for (const auto& [v, c] : terms) s += c * values[L.col(v)];
  return s;
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) {
  AffineExpr nb = b;
  nb *= -1.0;
  return a += nb;
}
AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
AffineExpr constant_expr(double c) {
  AffineExpr e;
  e.constant = c;
  return e;
}

ShiftedTriple shift_for_f(const AffineExpr& ax1, double la, double ua, double f) {
  ShiftedTriple s{ax1, la + f, ua + f};
  s.ax1.constant += f;
  return s;
}

std::vector<ShiftedTriple> shift_for_f(const std::vector<AffineExpr>& ax1,
                                       const IntervalImage& img, const Vec& f) {
  if (static_cast<Eigen::Index>(ax1.size()) != f.size() || img.lower.size() != f.size())
    throw DimensionError("shift_for_f: dimension mismatch");
  std::vector<ShiftedTriple> out;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    out.push_back(shift_for_f(ax1[i], img.lower[i], img.upper[i], f[i]));
  return out;
}

PeriodData period_data(const HcpInstance& in, int t) {
  if (t < 0 || t >= in.n) throw DimensionError("period out of range");
  PeriodData pd;
  pd.t = t;
  pd.dx = in.dx;
  pd.dy = in.dy;
  pd.dz = in.dz;
  pd.A = in.A[t];
  pd.B = in.B[t];
  pd.C = in.C[t];
  pd.G = in.G[t];
  pd.H = in.H[t];
  pd.Q2 = in.Q[t + 1];
  pd.R = in.R[t];
  pd.S = in.S[t];
  pd.f = in.f[t];
  pd.lb1 = in.state_lb(t);
  pd.ub1 = in.state_ub(t);
  pd.lb2 = in.state_lb(t + 1);
  pd.ub2 = in.state_ub(t + 1);
  pd.exactly_one = in.mode_exactly_one;
  return pd;
}

bool mode_fix_check(const PeriodData& pd) {
  if (pd.dz != 1) throw DomainError("mode_fix_check needs a scalar indicator");
  IntervalImage img = interval_image(pd.A, pd.lb1, pd.ub1);
  for (int i = 0; i < pd.dx; ++i) {
    double la = img.lower[i] + pd.f[i], ua = img.upper[i] + pd.f[i];
    if (la > pd.ub2[i] || pd.lb2[i] > ua) return true;
  }
  return false;
}

}  // namespace hcpcut
