#pragma once

#include <map>

#include "hcpcut/model.hpp"

namespace hcpcut {

struct IntervalImage {
  Vec lower, upper;
};

// Exact componentwise min/max of A x over the box [lb, ub].
IntervalImage interval_image(const Mat& A, const Vec& lb, const Vec& ub);

// sum of coefficient * variable + constant
struct AffineExpr {
  std::map<VarId, double> terms;
  double constant = 0.0;

  AffineExpr& add(const VarId& v, double c);
  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator*=(double s);
  double eval(const VarLayout& L, const std::vector<double>& values) const;
};
AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr constant_expr(double c);

struct ShiftedTriple {
  AffineExpr ax1;
  double la = 0.0, ua = 0.0;
};

ShiftedTriple shift_for_f(const AffineExpr& ax1, double la, double ua, double f);
// vector case: (A x_1)_i, lower_i, upper_i all shifted by f_i
std::vector<ShiftedTriple> shift_for_f(const std::vector<AffineExpr>& ax1,
                                       const IntervalImage& img, const Vec& f);

// Data of one control period t: x_t -> x_{t+1}.
struct PeriodData {
  int t = 0;
  int dx = 0, dy = 0, dz = 0;
  Mat A, B, C, G, H, Q2, R, S;
  Vec f, lb1, ub1, lb2, ub2;
  bool exactly_one = false;
};

PeriodData period_data(const HcpInstance& inst, int t);

// Static mode fixing for a scalar indicator: true means z_t must be 1.
bool mode_fix_check(const PeriodData& pd);

}  // namespace hcpcut
