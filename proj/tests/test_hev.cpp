#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "hcpcut/hev.hpp"
#include "hcpcut/instance_io.hpp"
#include "support.hpp"

using namespace hcpcut;
using namespace tsupport;

namespace {
Vec affine_next(const HevLinear& L, const HevState& x, const HevControl& u, bool on) {
  Vec xv(2), yv(3), z(2);
  xv << x.soc, x.mf;
  yv << u.V, u.w_eng, u.T_eng;
  z << (on ? 1.0 : 0.0), (on ? 0.0 : 1.0);
  return L.A * xv + L.B * yv + L.C * z + L.f;
}
}  // namespace

TEST_CASE("plant kinematics, hand arithmetic") {
  HevParams p;
  HevControl u{9.924, 300.0, 108.0};
  PlantOutput o = plant_step({0.47, 0.0}, u, true, {9.924, 0.0}, p);
  CHECK(o.w_mot == doctest::Approx(101.349).epsilon(1e-5));
  CHECK(o.w_gen == doctest::Approx(816.49).epsilon(1e-5));
  CHECK(o.T_gen == doctest::Approx(-30.0).epsilon(1e-12));
}

TEST_CASE("engine off: gated controls and fuel") {
  HevParams p;
  p.gamma = 0.01;
  PlantOutput o = plant_step({0.47, 2.0}, {9.924, 300.0, 80.0}, false, {9.924, 50.0}, p);
  CHECK(o.next.mf == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(o.T_gen == 0.0);
  CHECK(surrogate_maps({}, p).mf == 0.0);
}

TEST_CASE("plant rejects out-of-range controls and a negative discriminant") {
  HevParams p;
  CHECK_THROWS_AS(plant_step({0.47, 0}, {40.0, 0, 0}, false, {}, p), DomainError);
  CHECK_THROWS_AS(plant_step({0.47, 0}, {10.0, 700, 80}, true, {}, p), DomainError);
  // a huge traction demand drains more power than the battery can deliver
  CHECK_THROWS_AS(plant_step({0.47, 0}, {35.0, 0, 0}, false, {0, 1e5}, p), DomainError);
}

TEST_CASE("surrogate maps") {
  HevParams p;
  std::mt19937_64 g(301);
  MapPoint z;
  z.T_mot = 50.0;
  CHECK(surrogate_maps(z, p).mot == 0.0);
  for (double s = 0.05; s <= 0.55 + 1e-12; s += 0.01) {
    MapPoint pt;
    pt.soc = s;
    auto m = surrogate_maps(pt, p);
    CHECK(m.rdc > m.rc);
    CHECK(m.rc > 0.0);
  }
  auto msg = [&](MapPoint pt) {
    try {
      surrogate_maps(pt, p);
    } catch (const DomainError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  MapPoint bad;
  bad.soc = 1.5;
  CHECK(msg(bad).find("soc") != std::string::npos);
  bad = {};
  bad.w_eng = 900;
  CHECK(msg(bad).find("w_eng") != std::string::npos);
  bad = {};
  bad.T_eng = -5;
  CHECK(msg(bad).find("T_eng") != std::string::npos);
  // gradients against central differences
  for (int k = 0; k < 100; ++k) {
    MapPoint pt;
    pt.w_eng = unif(g, 90, 590);
    pt.T_eng = unif(g, 5, 160);
    pt.w_mot = unif(g, 0, 300);
    pt.T_mot = unif(g, -100, 100);
    pt.w_gen = unif(g, -500, 900);
    pt.T_gen = unif(g, -50, 0);
    pt.soc = unif(g, 0.06, 0.54);
    auto m = surrogate_maps(pt, p);
    auto rel = [](double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(b)); };
    auto fd = [&](auto set, auto get, double h) {
      MapPoint a = pt, b = pt;
      set(a, +h);
      set(b, -h);
      return (get(surrogate_maps(a, p)) - get(surrogate_maps(b, p))) / (2 * h);
    };
    double h = 1e-3;
    CHECK(rel(m.dmf_dw, fd([](MapPoint& q, double d) { q.w_eng += d; }, [](const MapValues& v) { return v.mf; }, h)));
    CHECK(rel(m.dmf_dT, fd([](MapPoint& q, double d) { q.T_eng += d; }, [](const MapValues& v) { return v.mf; }, h)));
    CHECK(rel(m.dmot_dw, fd([](MapPoint& q, double d) { q.w_mot += d; }, [](const MapValues& v) { return v.mot; }, h)));
    CHECK(rel(m.dmot_dT, fd([](MapPoint& q, double d) { q.T_mot += d; }, [](const MapValues& v) { return v.mot; }, h)));
    CHECK(rel(m.dgen_dw, fd([](MapPoint& q, double d) { q.w_gen += d; }, [](const MapValues& v) { return v.gen; }, h)));
    CHECK(rel(m.dgen_dT, fd([](MapPoint& q, double d) { q.T_gen += d; }, [](const MapValues& v) { return v.gen; }, h)));
    CHECK(rel(m.dvoc, fd([](MapPoint& q, double d) { q.soc += d; }, [](const MapValues& v) { return v.voc; }, 1e-6)));
    CHECK(rel(m.drdc, fd([](MapPoint& q, double d) { q.soc += d; }, [](const MapValues& v) { return v.rdc; }, 1e-6)));
    CHECK(rel(m.drc, fd([](MapPoint& q, double d) { q.soc += d; }, [](const MapValues& v) { return v.rc; }, 1e-6)));
  }
}

TEST_CASE("linearize: exact at the expansion point, both branches") {
  HevParams p;
  p.gamma = 0.01;
  OpPoint op{{0.47, 1.0}, {9.924, 300.0, 80.0}};
  for (double Td : {0.0, 150.0, -200.0}) {
    HevLinear L = linearize(op, p, Td, Td);
    PlantOutput on = plant_step(op.x, op.u, true, {9.924, Td}, p);
    Vec a = affine_next(L, op.x, op.u, true);
    CHECK(a[0] == doctest::Approx(on.next.soc).epsilon(1e-13));
    CHECK(a[1] == doctest::Approx(on.next.mf).epsilon(1e-13));
    HevControl off{op.u.V, 0, 0};
    PlantOutput po = plant_step(op.x, off, false, {9.924, Td}, p);
    Vec b = affine_next(L, op.x, off, false);
    CHECK(b[0] == doctest::Approx(po.next.soc).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(po.next.mf).epsilon(1e-13));
    CHECK(L.C(0, 1) == 0.0);
    CHECK(L.C(1, 1) == 0.0);
  }
  p.gamma = 0.0;
  CHECK(linearize(op, p, 0.0, 0.0).A(1, 1) == 0.0);
}

TEST_CASE("linearize: second-order error decay") {
  HevParams p;
  p.gamma = 0.01;
  OpPoint op{{0.47, 1.0}, {9.924, 300.0, 80.0}};
  const double Td = 40.0;
  HevLinear L = linearize(op, p, Td, Td);
  // direction scaled to each variable's range
  auto err = [&](double h) {
    HevState x{op.x.soc + 0.05 * h, op.x.mf + 0.5 * h};
    HevControl u{op.u.V + 2.0 * h, op.u.w_eng + 50.0 * h, op.u.T_eng + 20.0 * h};
    PlantOutput o = plant_step(x, u, true, {0, Td}, p);
    Vec a = affine_next(L, x, u, true);
    return std::hypot(o.next.soc - a[0], o.next.mf - a[1]);
  };
  double e1 = err(1e-1), e2 = err(1e-2), e3 = err(1e-3);
  double s12 = std::log10(e1 / e2), s23 = std::log10(e2 / e3);
  MESSAGE("slopes " << s12 << " " << s23);
  CHECK(s12 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(s23 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(e1 / (0.1 * 0.1) < 10.0);  // finite constant
  CHECK_THROWS_AS(linearize(op, p, 1e6, 1e6), DomainError);
}

TEST_CASE("build_hev_hcp structure") {
  HevParams p;
  OpPoint op{{p.soc0, 0.0}, {p.V0, p.weng0, p.Teng0}};
  std::vector<Disturbance> fc(5, Disturbance{10.0, 30.0});
  HcpInstance in = build_hev_hcp(p, op, fc, 5);
  CHECK(validate(in, true).ok());
  CHECK(in.dx == 2);
  CHECK(in.dy == 3);
  CHECK(in.dz == 2);
  CHECK(in.mode_exactly_one);
  // engine off column pins w_eng and T_eng to zero; V keeps its range in both columns
  CHECK(in.G[0](1, 1) == 0.0);
  CHECK(in.H[0](1, 1) == 0.0);
  CHECK(in.G[0](2, 1) == 0.0);
  CHECK(in.H[0](2, 1) == 0.0);
  CHECK(in.G[0](0, 0) == in.G[0](0, 1));
  CHECK(in.H[0](0, 0) == in.H[0](0, 1));
  CHECK(in.S[0](0, 0) == p.s);
  CHECK(in.S[0](1, 1) == 0.0);
  REQUIRE(in.x_init);
  CHECK((*in.x_init)[0] == p.soc0);
  CHECK_THROWS_AS(build_hev_hcp(p, op, fc, 6), DimensionError);
  // collapsed to one indicator (z_on): C z = C_on z_on because the off column is zero
  CHECK(in.C[0].col(1).isZero());
  // cost constant: objective at a fixed pattern equals the expanded tracking cost
  RelaxPoint pt = solve_pattern(in, std::vector<std::vector<double>>(5, {0.0, 1.0}));
  REQUIRE(pt.optimal());
  Assignment a = extract(in, pt.values);
  double direct = 0.0;
  for (int t = 0; t <= 5; ++t) {
    double e = a.x[t][0] - p.SOC_ref;
    direct += p.q1 * e * e + p.q2 * a.x[t][1] * a.x[t][1];
  }
  for (int t = 0; t < 5; ++t) {
    double e = a.y[t][0] - fc[t].V_r;
    direct += p.r1 * e * e;
  }
  CHECK(pt.objective == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("profile csv") {
  auto prof = synthetic_profile(20.0, 0.5);
  CHECK(prof.size() == 41);
  CHECK(prof[0].d.V_r == doctest::Approx(9.924));
  std::string path = "hev_profile_test.csv";
  write_profile_csv(path, prof);
  auto back = read_profile_csv(path);
  REQUIRE(back.size() == prof.size());
  CHECK(back[3].d.T_d == doctest::Approx(prof[3].d.T_d).epsilon(1e-5));
  auto mid = profile_at(prof, 0.25);
  CHECK(mid.V_r == doctest::Approx(0.5 * (prof[0].d.V_r + prof[1].d.V_r)));
  {
    std::ofstream os(path);
    os << "time_s,V_r,T_d\n0,1,2\n1,x,3\n";
  }
  try {
    read_profile_csv(path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_profile_csv("/nonexistent/p.csv"), IoError);
}

TEST_CASE("mpc: steady cruise keeps the engine off") {
  HevParams p;
  p.duration = 15.0;
  p.horizon = 8;
  p.SOC_ref = 0.5;
  p.soc0 = 0.5;
  std::vector<ProfilePoint> prof = {{0.0, {p.V0, 0.0}}, {100.0, {p.V0, 0.0}}};
  MpcTrace tr = mpc_run(p, prof, Variant::WcG);
  REQUIRE(tr.steps.size() == 15);
  CHECK(tr.bound_violations == 0);
  for (const auto& s : tr.steps) {
    CHECK(s.z_eng == 0);
    CHECK(std::abs(s.control.w_eng) <= 1e-7);
    CHECK(std::abs(s.control.T_eng) <= 1e-7);
    CHECK(s.state.soc >= p.soc_min);
    CHECK(s.state.soc <= p.soc_max);
  }
  // by hand: with no demand the off mode costs nothing extra, on costs s plus fuel
  CHECK(p.s > 0.0);
}

TEST_CASE("mpc: variants agree step by step") {
  HevParams p;
  p.duration = 12.0;
  p.horizon = 10;
  auto prof = synthetic_profile(40.0, 0.5);
  MpcTrace a = mpc_run(p, prof, Variant::Miqp), b = mpc_run(p, prof, Variant::WcG);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t k = 0; k < a.steps.size(); ++k) {
    if (a.steps[k].status != "optimal" || b.steps[k].status != "optimal") continue;
    CHECK(a.steps[k].z_eng == b.steps[k].z_eng);
    CHECK(std::abs(a.steps[k].control.V - b.steps[k].control.V) <= 1e-5);
  }
  CHECK(b.total_nodes <= a.total_nodes);
  CHECK(a.to_csv().substr(0, 5) == "time,");
}
