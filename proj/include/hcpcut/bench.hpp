#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hcpcut/bnb.hpp"
#include "hcpcut/model.hpp"

namespace hcpcut {

struct SyntheticConfig {
  int n = 50;
  int dx = 1;
  int dy = 1;
  int dz = 1;
  std::uint64_t seed = 1;
  int count = 10;         // instances per cell
  double g = -2.3;        // lower control bound when the mode is on
  double h = 2.3;
  bool require_feasible = true;  // resample until the all-on pattern is feasible
  bool check_ranges = true;      // dx in 1..5, dy in dx..dx+4, dz = 1
};

std::uint64_t splitmix64(std::uint64_t x);
// independent stream per (seed, cell, index)
std::uint64_t stream_seed(std::uint64_t seed, int dx, int dy, int index);
// uniform in [0, 1) from the top 53 bits
double uniform01(std::mt19937_64& g);

HcpInstance generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

struct BenchConfig {
  std::vector<std::pair<int, int>> cells;  // (dx, dy)
  std::vector<Variant> variants;
  std::vector<std::uint64_t> seeds;        // one instance per seed and cell
  int n = 10;
  SolveConfig solve;
  int threads = 1;
};

struct BenchRow {
  std::string instance_id;
  std::uint64_t seed = 0;
  int dx = 0, dy = 0, n = 0;
  Variant variant = Variant::WcG;
  double root_gap_pct = 0.0;
  double time_s = 0.0;
  long nodes = 0;
  int cuts_added = 0;
  std::string status;
};

std::vector<BenchRow> run_benchmark_rows(const BenchConfig& cfg);
// detail rows in (cell, seed, variant) order, then one aggregate row per (cell, variant)
std::string benchmark_csv(const std::vector<BenchRow>& rows, const BenchConfig& cfg);
std::string run_benchmark(const BenchConfig& cfg);

}  // namespace hcpcut
