#include "doctest.h"

#include <limits>

#include "hcpcut/qpsolve.hpp"
#include "oracle.hpp"

using namespace hcpcut;
using namespace tsupport;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

ConvexModel one_var(double lo, double hi, double q) {
  ConvexModel m;
  m.layout = {0, 1, 0, 0};
  m.bounds = {{lo, hi}};
  m.integral = {0};
  m.lin = {0.0};
  m.quad_idx = {0};
  m.quad = m1(q);
  return m;
}
}  // namespace

TEST_CASE("qp examples") {
  RelaxPoint a = solve_relaxation(one_var(-kInf, kInf, 2.0));
  REQUIRE(a.optimal());
  CHECK(std::abs(a.values[0]) < 1e-8);
  CHECK(std::abs(a.objective) < 1e-12);

  ConvexModel m = one_var(-kInf, kInf, 1.0);
  LinearRow r;
  r.idx = {0};
  r.val = {1.0};
  r.sense = Sense::GreaterEq;
  r.rhs = 3.0;
  m.rows.push_back(r);
  RelaxPoint b = solve_relaxation(m);
  REQUIRE(b.optimal());
  CHECK(b.values[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(b.objective == doctest::Approx(9.0).epsilon(1e-9));
  // multiplier of x >= 3 is -6 in the library sign convention
  CHECK(b.row_duals[0] == doctest::Approx(-6.0).epsilon(1e-7));
}

TEST_CASE("conflicting bounds and rows are infeasible") {
  ConvexModel m = one_var(0.0, 1.0, 1.0);
  LinearRow r;
  r.idx = {0};
  r.val = {1.0};
  r.sense = Sense::GreaterEq;
  r.rhs = 2.0;
  m.rows.push_back(r);
  CHECK(solve_relaxation(m).status == SolveStatus::Infeasible);
  ConvexModel fixed = one_var(0.0, 1.0, 1.0);
  fixed.bounds[0] = {1.0, 1.0};
  fixed.rows.push_back(r);
  CHECK(solve_relaxation(fixed).status == SolveStatus::Infeasible);
}

TEST_CASE("random qps: residual contract, independent KKT, projected-gradient oracle") {
  std::mt19937_64 g(101);
  for (int rep = 0; rep < 60; ++rep) {
    ConvexModel m = random_qp(g);
    RelaxPoint p = solve_relaxation(m);
    REQUIRE(p.optimal());
    double s = 1.0 + p.data_norm;
    CHECK(p.primal_residual <= 1e-8 * s);
    CHECK(p.dual_residual <= 1e-8 * s);
    CHECK(p.gap <= 1e-8);
    auto k = independent_kkt(m, p.values, p.row_duals, p.epi_duals);
    CHECK(k.stationarity <= 1e-7 * k.scale);
    CHECK(k.primal <= 1e-8 * k.scale);
    CHECK(k.complementarity <= 1e-7 * k.scale);
    CHECK(k.dual_sign <= 1e-8 * k.scale);
    auto o = PgOracle(m).solve();
    CHECK(o.max_violation <= 1e-9);
    CHECK(p.objective == doctest::Approx(o.objective).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("warm start: same optimum after a fix, monotone after a cut, infeasible child") {
  std::mt19937_64 g(103);
  SyntheticConfig cfg;
  cfg.n = 4;
  cfg.dx = 2;
  cfg.dy = 2;
  HcpInstance in = generate_synthetic(cfg, 3);
  ConvexModel m = build_epigraph(in);
  RelaxPoint root = solve_relaxation(m);
  REQUIRE(root.optimal());
  for (int t = 0; t < in.n; ++t) {
    ConvexModel c = fix_variable(m, {VarKind::Indicator, t, 0}, t % 2);
    RelaxPoint cold = solve_relaxation(c), warm = warm_start(c, root);
    REQUIRE(cold.status == warm.status);
    if (cold.optimal()) CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-7).scale(1.0));
  }
  // a cut w_0 >= current w_0 + 1 only tightens
  LinearRow cut;
  cut.idx = {m.layout.w(0)};
  cut.val = {1.0};
  cut.sense = Sense::GreaterEq;
  cut.rhs = root.values[m.layout.w(0)] + 1.0;
  ConvexModel mc = with_rows(m, {cut});
  RelaxPoint tight = warm_start(mc, root);
  REQUIRE(tight.optimal());
  CHECK(tight.objective >= root.objective - 1e-9);
  // z fixed to 1 and to 0 in one child via an extra row
  ConvexModel bad = fix_variable(m, {VarKind::Indicator, 0, 0}, 1.0);
  LinearRow off;
  off.idx = {m.layout.z(0, 0)};
  off.val = {1.0};
  off.sense = Sense::LessEq;
  off.rhs = 0.0;
  bad = with_rows(bad, {off});
  CHECK(warm_start(bad, root).status == SolveStatus::Infeasible);
}

TEST_CASE("epigraph rows are tight at optimum") {
  std::mt19937_64 g(107);
  for (int rep = 0; rep < 20; ++rep) {
    HcpInstance in = random_instance(g, 3, 2, 2, 1);
    ConvexModel m = build_epigraph(in);
    RelaxPoint p = solve_relaxation(m);
    REQUIRE(p.optimal());
    for (const auto& e : m.epis) CHECK(p.values[e.w] - e.form(p.values) <= 1e-7);
    auto k = kkt_check(m, p);
    CHECK(k.stationarity <= 1e-7 * (1 + p.data_norm));
  }
}

TEST_CASE("adding cuts never lowers the relaxation") {
  SyntheticConfig cfg;
  cfg.n = 5;
  HcpInstance in = generate_synthetic(cfg, 13);
  ConvexModel m = build_epigraph(in);
  Separator sep(in);
  RelaxPoint p = solve_relaxation(m);
  REQUIRE(p.optimal());
  double prev = p.objective;
  for (int round = 0; round < 10; ++round) {
    auto cuts = sep.separate(p.values);
    if (cuts.empty()) break;
    std::vector<LinearRow> rows;
    for (const auto& c : cuts) rows.push_back(c.to_row(m.layout));
    m = with_rows(m, rows);
    p = warm_start(m, p);
    REQUIRE(p.optimal());
    CHECK(p.objective >= prev - 1e-9);
    prev = p.objective;
  }
}

TEST_CASE("solver is deterministic") {
  std::mt19937_64 g(109);
  ConvexModel m = random_qp(g);
  RelaxPoint a = solve_relaxation(m), b = solve_relaxation(m);
  CHECK(a.values == b.values);
  CHECK(a.iterations == b.iterations);
}
