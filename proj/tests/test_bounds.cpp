#include "doctest.h"

#include "hcpcut/bounds.hpp"
#include "support.hpp"

using namespace hcpcut;
using namespace tsupport;

namespace {
// brute force over the 2^d corners
IntervalImage corners(const Mat& A, const Vec& lb, const Vec& ub) {
  const int d = static_cast<int>(lb.size());
  IntervalImage r{Vec::Constant(A.rows(), 1e300), Vec::Constant(A.rows(), -1e300)};
  for (int m = 0; m < (1 << d); ++m) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = (m >> j) & 1 ? ub[j] : lb[j];
    Vec y = A * x;
    r.lower = r.lower.cwiseMin(y);
    r.upper = r.upper.cwiseMax(y);
  }
  return r;
}
}  // namespace

TEST_CASE("interval_image examples") {
  auto s = interval_image(m1(2.0), v1(0.1), v1(10.0));
  CHECK(s.lower[0] == doctest::Approx(0.2));
  CHECK(s.upper[0] == doctest::Approx(20.0));

  Mat A(2, 2);
  A << 1, -1, 0, 2;
  auto r = interval_image(A, Vec::Zero(2), Vec::Ones(2));
  // frozen from corner enumeration
  CHECK(r.lower[0] == -1.0);
  CHECK(r.lower[1] == 0.0);
  CHECK(r.upper[0] == 1.0);
  CHECK(r.upper[1] == 2.0);

  auto z = interval_image(Mat::Zero(3, 3), -Vec::Ones(3), Vec::Ones(3));
  CHECK(z.lower.isZero());
  CHECK(z.upper.isZero());
  CHECK_THROWS(interval_image(m1(1.0), v1(1.0), v1(0.0)));
}

TEST_CASE("interval_image: samples inside, corners attain") {
  std::mt19937_64 g(17);
  for (int rep = 0; rep < 50; ++rep) {
    int d = 1 + rep % 8;
    Mat A = rand_mat(g, d, d, -3, 3);
    Vec lb(d), ub(d);
    for (int j = 0; j < d; ++j) {
      lb[j] = unif(g, -2, 1);
      ub[j] = lb[j] + unif(g, 0, 3);
    }
    auto img = interval_image(A, lb, ub);
    auto oracle = corners(A, lb, ub);
    for (int i = 0; i < d; ++i) {
      CHECK(img.lower[i] == doctest::Approx(oracle.lower[i]).epsilon(1e-12));
      CHECK(img.upper[i] == doctest::Approx(oracle.upper[i]).epsilon(1e-12));
    }
    for (int k = 0; k < 20; ++k) {
      Vec x(d);
      for (int j = 0; j < d; ++j) x[j] = unif(g, lb[j], ub[j]);
      Vec y = A * x;
      for (int i = 0; i < d; ++i) {
        CHECK(y[i] >= img.lower[i] - 1e-12);
        CHECK(y[i] <= img.upper[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("shift_for_f") {
  AffineExpr ax;
  ax.add({VarKind::State, 0, 0}, 2.0);
  auto s = shift_for_f(ax, -1.0, 1.0, 0.5);
  CHECK(s.la == -0.5);
  CHECK(s.ua == 1.5);
  CHECK(s.ax1.constant == 0.5);
  CHECK(s.ax1.terms.at({VarKind::State, 0, 0}) == 2.0);
  auto id = shift_for_f(ax, -1.0, 1.0, 0.0);
  CHECK(id.la == -1.0);
  CHECK(id.ua == 1.0);
  CHECK(id.ax1.constant == 0.0);

  IntervalImage img{Vec::Constant(2, -1.0), Vec::Constant(2, 2.0)};
  Vec f(2);
  f << 1.0, -1.0;
  auto v = shift_for_f({ax, ax}, img, f);
  REQUIRE(v.size() == 2);
  CHECK(v[0].la == 0.0);
  CHECK(v[0].ua == 3.0);
  CHECK(v[1].la == -2.0);
  CHECK(v[1].ua == 1.0);
  CHECK(v[1].ax1.constant == -1.0);
}

TEST_CASE("f shift: projection bounds move with the data") {
  // x2 = A x1 + B y + C z + f on bounds [l2, u2] is the f = 0 problem on [l2 - f, u2 - f]
  std::mt19937_64 g(29);
  for (int rep = 0; rep < 40; ++rep) {
    HcpInstance in = random_instance(g, 1, 2, 2, 1);
    in.f[0] << 1.0, -1.0;
    HcpInstance sh = in;
    sh.f[0].setZero();
    sh.lb[1] -= in.f[0];
    sh.ub[1] -= in.f[0];
    VarLayout L{1, 2, 2, 1};
    std::vector<double> v(L.size());
    for (int c = 0; c < L.size(); ++c) v[c] = unif(g, -1, 1);
    v[L.z(0, 0)] = unif(g, 0.1, 0.9);
    std::vector<double> vs = v;
    for (int i = 0; i < 2; ++i) vs[L.x(1, i)] -= in.f[0][i];
    auto a = projection_bounds(in, 0, v), b = projection_bounds(sh, 0, vs);
    REQUIRE(a);
    REQUIRE(b);
    for (int i = 0; i < 2; ++i) {
      CHECK(a->first[i] - in.f[0][i] == doctest::Approx(b->first[i]).epsilon(1e-12));
      CHECK(a->second[i] - in.f[0][i] == doctest::Approx(b->second[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mode_fix_check examples") {
  // l_a = 5 > u_2 = 3
  Scalar p;
  p.l1 = 5;
  p.u1 = 6;
  p.l2 = 0;
  p.u2 = 3;
  CHECK(mode_fix_check(period_data(scalar_instance(p), 0)));
  // l_a = 0, u_a = 1 against [0, 1]
  CHECK_FALSE(mode_fix_check(period_data(scalar_instance({}), 0)));
  // l_2 = 2 > u_a = 1
  Scalar q;
  q.l2 = 2;
  q.u2 = 3;
  CHECK(mode_fix_check(period_data(scalar_instance(q), 0)));
  // the f shift counts: image [0,1] + 2.5 misses [0, 2]
  Scalar r;
  r.f = 2.5;
  r.u2 = 2;
  CHECK(mode_fix_check(period_data(scalar_instance(r), 0)));
}

TEST_CASE("mode_fix_check never fires when z = 0 is feasible") {
  std::mt19937_64 g(31);
  int fired = 0, feasible0 = 0;
  for (int rep = 0; rep < 200; ++rep) {
    HcpInstance in = random_instance(g, 1, 1 + rep % 3, 1 + rep % 2, 1);
    // shrink the next-state box sometimes so the rule has something to do
    if (rep % 2) {
      in.lb[1] = in.lb[1] * 0.2 + Vec::Constant(in.dx, 1.5);
      in.ub[1] = in.lb[1] + Vec::Constant(in.dx, 0.5);
    }
    bool fix = mode_fix_check(period_data(in, 0));
    bool off_ok = solve_pattern(in, {{0.0}}).optimal();
    fired += fix;
    feasible0 += off_ok;
    if (off_ok) CHECK_FALSE(fix);
  }
  CHECK(fired > 0);
  CHECK(feasible0 > 0);
}
