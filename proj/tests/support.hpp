#pragma once
// shared builders for the unit and acceptance tests

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hcpcut/bench.hpp"
#include "hcpcut/bnb.hpp"
#include "hcpcut/cuts.hpp"
#include "hcpcut/model.hpp"

namespace tsupport {

using namespace hcpcut;

inline double unif(std::mt19937_64& g, double a, double b) { return a + (b - a) * uniform01(g); }

inline Mat m1(double v) { return Mat::Constant(1, 1, v); }
inline Vec v1(double v) { return Vec::Constant(1, v); }

// n = 1, all dimensions 1: x2 = a x1 + b y + c z + f
struct Scalar {
  double a = 1, b = 1, c = 0, f = 0;
  double l1 = 0, u1 = 1, l2 = 0, u2 = 1;
  double q1 = 0, q2 = 2, r = 0.01, s = 1;
  double g = 0, h = 1;
};

inline HcpInstance scalar_instance(const Scalar& p) {
  HcpInstance in;
  in.n = 1;
  in.dx = in.dy = in.dz = 1;
  in.Q = {m1(p.q1), m1(p.q2)};
  in.R = {m1(p.r)};
  in.S = {m1(p.s)};
  in.A = {m1(p.a)};
  in.B = {m1(p.b)};
  in.C = {m1(p.c)};
  in.f = {v1(p.f)};
  in.G = {m1(p.g)};
  in.H = {m1(p.h)};
  in.lb = {v1(p.l1), v1(p.l2)};
  in.ub = {v1(p.u1), v1(p.u2)};
  return in;
}

inline Mat rand_mat(std::mt19937_64& g, int r, int c, double a, double b) {
  Mat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = unif(g, a, b);
  return M;
}

// Random instance with cut-ready data (diagonal Q after the first state).
// Some controls are gated off for some modes so the split sets are not trivial.
inline HcpInstance random_instance(std::mt19937_64& g, int n, int dx, int dy, int dz,
                                   bool exactly_one = false, bool dense_r = true) {
  for (;;) {
    HcpInstance in;
    in.n = n;
    in.dx = dx;
    in.dy = dy;
    in.dz = dz;
    in.mode_exactly_one = exactly_one;
    for (int t = 0; t <= n; ++t) {
      Mat Q = Mat::Zero(dx, dx);
      for (int i = 0; i < dx; ++i) Q(i, i) = t == 0 ? unif(g, 0.0, 1.0) : unif(g, 0.5, 3.0);
      in.Q.push_back(Q);
      Vec lo(dx), hi(dx);
      for (int i = 0; i < dx; ++i) {
        lo[i] = -unif(g, 0.3, 2.0);
        hi[i] = unif(g, 0.3, 2.0);
      }
      in.lb.push_back(lo);
      in.ub.push_back(hi);
    }
    for (int t = 0; t < n; ++t) {
      Mat Lr = rand_mat(g, dy, dy, -1, 1);
      Mat R = dense_r ? Mat(0.3 * Lr * Lr.transpose()) : Mat(Mat::Zero(dy, dy));
      for (int j = 0; j < dy; ++j) R(j, j) += unif(g, 0.01, 0.5);
      in.R.push_back(R);
      Mat S = Mat::Zero(dz, dz);
      for (int k = 0; k < dz; ++k) S(k, k) = unif(g, 0.2, 2.0);
      in.S.push_back(S);
      in.A.push_back(rand_mat(g, dx, dx, -1.5, 1.5));
      in.B.push_back(rand_mat(g, dx, dy, -1.0, 1.0));
      in.C.push_back(rand_mat(g, dx, dz, -1.0, 1.0));
      in.f.push_back(rand_mat(g, dx, 1, -0.5, 0.5));
      Mat G(dy, dz), H(dy, dz);
      for (int j = 0; j < dy; ++j)
        for (int k = 0; k < dz; ++k) {
          bool off = dz > 1 && uniform01(g) < 0.3;
          G(j, k) = off ? 0.0 : -unif(g, 0.3, 2.0);
          H(j, k) = off ? 0.0 : unif(g, 0.3, 2.0);
        }
      in.G.push_back(G);
      in.H.push_back(H);
    }
    if (!validate(in, true).ok()) continue;
    // keep only instances with at least one feasible pattern
    std::vector<std::vector<double>> z(n, std::vector<double>(dz, 0.0));
    if (exactly_one)
      for (auto& zt : z) zt[0] = 1.0;
    if (solve_pattern(in, z).optimal()) return in;
    for (auto& zt : z) {
      std::fill(zt.begin(), zt.end(), 0.0);
      zt[0] = 1.0;
    }
    if (solve_pattern(in, z).optimal()) return in;
  }
}

// integral mode vectors allowed by the mode-sum row
inline std::vector<std::vector<double>> mode_vectors(int dz, bool exactly_one) {
  std::vector<std::vector<double>> out;
  if (!exactly_one) out.push_back(std::vector<double>(dz, 0.0));
  for (int k = 0; k < dz; ++k) {
    std::vector<double> z(dz, 0.0);
    z[k] = 1.0;
    out.push_back(z);
  }
  return out;
}

// Random integral-feasible point of a one-period instance by rejection; w set to its form.
inline bool sample_feasible(const HcpInstance& in, std::mt19937_64& g, std::vector<double>& v) {
  VarLayout L{in.n, in.dx, in.dy, in.dz};
  auto modes = mode_vectors(in.dz, in.mode_exactly_one);
  v.assign(L.size(), 0.0);
  const Vec lb0 = in.state_lb(0), ub0 = in.state_ub(0);
  Vec x(in.dx);
  for (int i = 0; i < in.dx; ++i) x[i] = unif(g, lb0[i], ub0[i]);
  for (int i = 0; i < in.dx; ++i) v[L.x(0, i)] = x[i];
  for (int t = 0; t < in.n; ++t) {
    const auto& z = modes[static_cast<size_t>(uniform01(g) * modes.size()) % modes.size()];
    Vec zv = Eigen::Map<const Vec>(z.data(), in.dz);
    Vec lo = in.G[t] * zv, hi = in.H[t] * zv;
    Vec y(in.dy);
    for (int j = 0; j < in.dy; ++j) y[j] = unif(g, lo[j], hi[j]);
    Vec nx = in.A[t] * x + in.B[t] * y + in.C[t] * zv + in.f[t];
    for (int i = 0; i < in.dx; ++i)
      if (nx[i] < in.lb[t + 1][i] || nx[i] > in.ub[t + 1][i]) return false;
    for (int j = 0; j < in.dy; ++j) v[L.y(t, j)] = y[j];
    for (int k = 0; k < in.dz; ++k) v[L.z(t, k)] = z[k];
    for (int i = 0; i < in.dx; ++i) v[L.x(t + 1, i)] = nx[i];
    v[L.w(t)] = nx.dot(in.Q[t + 1] * nx) + y.dot(in.R[t] * y) + zv.dot(in.S[t] * zv);
    x = nx;
  }
  return true;
}

// every cut the library can produce for a one-period point: static rows plus gradient rows
inline std::vector<LinearCut> gradient_cuts_at(const Separator& sep, const std::vector<double>& v) {
  std::vector<LinearCut> out;
  for (const auto& pc : sep.cutters())
    if (auto ws = pc.select_sigma_case(v)) out.push_back(pc.gradient_cut(*ws));
  return out;
}

}  // namespace tsupport
