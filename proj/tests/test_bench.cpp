#include "doctest.h"

#include <sstream>

#include "hcpcut/bench.hpp"
#include "hcpcut/instance_io.hpp"
#include "support.hpp"

using namespace hcpcut;
using namespace tsupport;

namespace {
std::vector<std::vector<std::string>> csv(const std::string& s) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(s);
  for (std::string line; std::getline(ss, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    out.push_back(cells);
  }
  return out;
}
}  // namespace

TEST_CASE("generator: fixed matrices and A range") {
  SyntheticConfig cfg;
  cfg.n = 3;
  HcpInstance in = generate_synthetic(cfg, 1);
  CHECK(in.Q[0](0, 0) == 2.0);
  CHECK(in.R[0](0, 0) == 0.01);
  CHECK(in.S[0](0, 0) == 1.0);
  CHECK(in.C[0](0, 0) == 0.5);
  CHECK(in.lb[2][0] == 0.1);
  CHECK(in.ub[2][0] == 10.0);
  cfg.dx = 3;
  cfg.dy = 5;
  for (std::uint64_t s = 0; s < 20; ++s) {
    HcpInstance b = generate_synthetic(cfg, s);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double a = b.A[0](i, j);
        if (i == j) CHECK((a >= 1.5 && a <= 2.5));
        else CHECK((a >= 0.0 && a <= 1.0));
      }
    CHECK(b.A[0] == b.A[2]);  // time invariant
  }
}

TEST_CASE("generator: same seed, same bits") {
  SyntheticConfig cfg;
  cfg.n = 5;
  cfg.dx = 2;
  cfg.dy = 3;
  CHECK(serialize_instance(generate_synthetic(cfg, 42)) == serialize_instance(generate_synthetic(cfg, 42)));
  CHECK(serialize_instance(generate_synthetic(cfg, 42)) != serialize_instance(generate_synthetic(cfg, 43)));
}

TEST_CASE("generator: uniform entries have sane means") {
  SyntheticConfig cfg;
  cfg.n = 1;
  cfg.dx = 2;
  cfg.dy = 3;
  cfg.require_feasible = false;
  Mat sa = Mat::Zero(2, 2), sb = Mat::Zero(2, 3);
  for (std::uint64_t s = 0; s < 100; ++s) {
    HcpInstance in = generate_synthetic(cfg, stream_seed(s, 2, 3, 0));
    sa += in.A[0] - 1.5 * Mat::Identity(2, 2);
    sb += in.B[0];
  }
  sa /= 100;
  sb /= 100;
  CHECK(sa.minCoeff() >= 0.4);
  CHECK(sa.maxCoeff() <= 0.6);
  CHECK(sb.minCoeff() >= 0.4);
  CHECK(sb.maxCoeff() <= 0.6);
}

TEST_CASE("generator: valid and MIQP feasible") {
  SyntheticConfig cfg;
  cfg.n = 3;
  for (int dx = 1; dx <= 3; ++dx)
    for (std::uint64_t s = 0; s < 5; ++s) {
      cfg.dx = dx;
      cfg.dy = dx + static_cast<int>(s % 3);
      HcpInstance in = generate_synthetic(cfg, s);
      CHECK(validate(in).ok());
      CHECK(enumerate_patterns(in).feasible_patterns > 0);
    }
}

TEST_CASE("generator: range checks") {
  SyntheticConfig cfg;
  cfg.dx = 6;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), DimensionError);
  cfg.dx = 2;
  cfg.dy = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), DimensionError);
  cfg.check_ranges = false;
  cfg.n = 2;
  CHECK_NOTHROW(generate_synthetic(cfg, 1));
}

TEST_CASE("benchmark csv: arity, aggregates, rerun") {
  BenchConfig bc;
  bc.cells = {{1, 1}, {2, 2}};
  bc.variants = {Variant::Miqp, Variant::WcG};
  bc.seeds = {1, 2, 3};
  bc.n = 4;
  bc.threads = 3;
  auto rows = run_benchmark_rows(bc);
  std::string a = benchmark_csv(rows, bc);
  auto t = csv(a);
  REQUIRE(t.size() == 1 + 12 + 4);
  CHECK(t[0].size() == 11);
  CHECK(t[0][0] == "instance_id");
  for (size_t i = 1; i < t.size(); ++i) CHECK(t[i].size() == 11);
  for (size_t i = 13; i < t.size(); ++i) CHECK(t[i][10].rfind("aggregate(", 0) == 0);
  // wc-g mean gap <= miqp mean gap per cell
  for (int c = 0; c < 2; ++c) {
    double miqp = std::stod(t[13 + 2 * c][6]), wcg = std::stod(t[14 + 2 * c][6]);
    CHECK(wcg <= miqp + 1e-6);
  }
  // rerun, single thread: identical except time_s
  bc.threads = 1;
  auto t2 = csv(run_benchmark(bc));
  REQUIRE(t2.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i)
    for (size_t j = 0; j < t[i].size(); ++j)
      if (j != 7 || i == 0) CHECK(t[i][j] == t2[i][j]);
}
