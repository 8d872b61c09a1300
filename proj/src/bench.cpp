#include "hcpcut/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "hcpcut/qpsolve.hpp"

namespace hcpcut {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, int dx, int dy, int index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(dx) << 32 | static_cast<std::uint32_t>(dy)));
  return splitmix64(s ^ static_cast<std::uint64_t>(index));
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

namespace {

HcpInstance draw(const SyntheticConfig& c, std::mt19937_64& g) {
  HcpInstance in;
  in.n = c.n;
  in.dx = c.dx;
  in.dy = c.dy;
  in.dz = c.dz;
  Mat A = 1.5 * Mat::Identity(c.dx, c.dx);
  for (int i = 0; i < c.dx; ++i)
    for (int j = 0; j < c.dx; ++j) A(i, j) += uniform01(g);
  Mat B(c.dx, c.dy);
  for (int i = 0; i < c.dx; ++i)
    for (int j = 0; j < c.dy; ++j) B(i, j) = uniform01(g);
  Mat C = Mat::Constant(c.dx, c.dz, 0.5);
  for (int t = 0; t <= c.n; ++t) {
    in.Q.push_back(2.0 * Mat::Identity(c.dx, c.dx));
    in.lb.push_back(Vec::Constant(c.dx, 0.1));
    in.ub.push_back(Vec::Constant(c.dx, 10.0));
  }
  for (int t = 0; t < c.n; ++t) {
    in.R.push_back(0.01 * Mat::Identity(c.dy, c.dy));
    in.S.push_back(Mat::Identity(c.dz, c.dz));
    in.A.push_back(A);
    in.B.push_back(B);
    in.C.push_back(C);
    in.f.push_back(Vec::Zero(c.dx));
    in.G.push_back(Mat::Constant(c.dy, c.dz, c.g));
    in.H.push_back(Mat::Constant(c.dy, c.dz, c.h));
  }
  return in;
}

}  // namespace

HcpInstance generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (cfg.n < 1) throw DimensionError("n must be >= 1");
  if (cfg.check_ranges) {
    if (cfg.dx < 1 || cfg.dx > 5) throw DimensionError("dx must be in 1..5");
    if (cfg.dy < cfg.dx || cfg.dy > cfg.dx + 4) throw DimensionError("dy must be in dx..dx+4");
    if (cfg.dz != 1) throw DimensionError("dz must be 1");
  }
  std::mt19937_64 g(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    HcpInstance in = draw(cfg, g);
    if (!cfg.require_feasible) return in;
    std::vector<std::vector<double>> on(cfg.n, std::vector<double>(cfg.dz, 1.0));
    if (solve_pattern(in, on).optimal()) return in;
  }
  throw DomainError("no feasible synthetic instance after 1000 draws");
}

std::vector<BenchRow> run_benchmark_rows(const BenchConfig& cfg) {
  struct Job {
    int cell, seed_idx, variant;
  };
  std::vector<Job> jobs;
  for (size_t c = 0; c < cfg.cells.size(); ++c)
    for (size_t s = 0; s < cfg.seeds.size(); ++s)
      for (size_t v = 0; v < cfg.variants.size(); ++v)
        jobs.push_back({static_cast<int>(c), static_cast<int>(s), static_cast<int>(v)});
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Job& jb = jobs[j];
      auto [dx, dy] = cfg.cells[jb.cell];
      BenchRow& r = rows[j];
      r.seed = cfg.seeds[jb.seed_idx];
      r.dx = dx;
      r.dy = dy;
      r.n = cfg.n;
      r.variant = cfg.variants[jb.variant];
      r.instance_id = "d" + std::to_string(dx) + "x" + std::to_string(dy) + "-s" + std::to_string(r.seed);
      try {
        SyntheticConfig sc;
        sc.n = cfg.n;
        sc.dx = dx;
        sc.dy = dy;
        HcpInstance in = generate_synthetic(sc, stream_seed(r.seed, dx, dy, jb.seed_idx));
        SolveConfig so = cfg.solve;
        so.variant = r.variant;
        BnbReport rep = solve_miqp(in, so);
        r.root_gap_pct = rep.root_gap_pct;
        r.time_s = rep.time_s;
        r.nodes = rep.nodes;
        r.cuts_added = rep.cuts_added();
        r.status = to_string(rep.status);
      } catch (const std::exception& e) {
        r.status = "error";
        r.root_gap_pct = std::nan("");
      }
    }
  };
  int nt = std::max(1, cfg.threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

namespace {
std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
}  // namespace

std::string benchmark_csv(const std::vector<BenchRow>& rows, const BenchConfig& cfg) {
  std::ostringstream os;
  os << "instance_id,seed,dx,dy,n,variant,root_gap_pct,time_s,nodes,cuts_added,status\n";
  for (const auto& r : rows)
    os << r.instance_id << ',' << r.seed << ',' << r.dx << ',' << r.dy << ',' << r.n << ','
       << to_string(r.variant) << ',' << num(r.root_gap_pct) << ',' << num(r.time_s) << ','
       << r.nodes << ',' << r.cuts_added << ',' << r.status << '\n';
  // aggregate rows: means over the instances that solved
  for (auto [dx, dy] : cfg.cells)
    for (Variant v : cfg.variants) {
      double gap = 0.0, time = 0.0, nodes = 0.0;
      int cnt = 0;
      for (const auto& r : rows)
        if (r.dx == dx && r.dy == dy && r.variant == v && r.status == "optimal") {
          gap += r.root_gap_pct;
          time += r.time_s;
          nodes += r.nodes;
          ++cnt;
        }
      double d = cnt ? cnt : 1;
      os << "mean-d" << dx << "x" << dy << ",," << dx << ',' << dy << ',' << cfg.n << ','
         << to_string(v) << ',' << num(cnt ? gap / d : std::nan("")) << ',' << num(time / d)
         << ',' << num(nodes / d) << ",," << "aggregate(" << cnt << ")\n";
    }
  return os.str();
}

std::string run_benchmark(const BenchConfig& cfg) {
  return benchmark_csv(run_benchmark_rows(cfg), cfg);
}

}  // namespace hcpcut
