#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcpcut/cuts.hpp"
#include "hcpcut/model.hpp"
#include "hcpcut/qpsolve.hpp"

namespace hcpcut {

enum class Variant { Miqp, WcG };
const char* to_string(Variant v);
std::optional<Variant> parse_variant(const std::string& s);

enum class BnbStatus { Optimal, TimeLimit, Infeasible };
const char* to_string(BnbStatus s);

struct SolveConfig {
  Variant variant = Variant::WcG;
  int root_cut_rounds = 50;
  int node_cut_rounds = 0;  // 0 = cut-and-branch
  double int_tol = 1e-6;
  double gap_tol = 1e-6;    // relative
  double time_limit = 3600.0;
  SplitPolicy split_policy = SplitPolicy::Singletons;
  std::vector<std::vector<int>> custom_splits;
  bool dive = true;
  QpSettings qp;
};

struct BnbReport {
  Variant variant = Variant::WcG;
  BnbStatus status = BnbStatus::Infeasible;
  double incumbent = 0.0;      // +inf when none
  double best_bound = 0.0;
  double root_bound = 0.0;     // after the root cut loop
  double root_bound_plain = 0.0;  // first root relaxation (before separation)
  double root_gap_pct = 0.0;
  long nodes = 0;
  int root_rounds = 0;
  std::map<Provenance, int> cuts;  // rows added by provenance
  std::vector<int> fixed_periods;  // periods whose indicator was fixed at build
  double time_s = 0.0;
  std::vector<double> values;      // incumbent, full model vector
  Assignment assignment;

  int cuts_added() const;
  // flat "key=value" lines; time_s is the only nondeterministic field
  std::string to_record() const;
};

BnbReport solve_miqp(const HcpInstance& inst, const SolveConfig& cfg = {});

double root_gap(double incumbent, double root_bound);
double root_gap(const BnbReport& r);

// Fixed-indicator QP: z given per period (size n, each dz long).
RelaxPoint solve_pattern(const HcpInstance& inst, const std::vector<std::vector<double>>& z,
                         const QpSettings& qp = {});

struct EnumResult {
  double best = 0.0;  // +inf if every pattern is infeasible
  std::vector<std::vector<double>> best_z;
  std::vector<double> best_values;
  int feasible_patterns = 0;
  std::vector<std::vector<double>> optimal_values;  // every pattern within 1e-9 rel of best
};
// All 2^(n*dz) patterns; throws DimensionError above 20 binary digits.
EnumResult enumerate_patterns(const HcpInstance& inst, const QpSettings& qp = {});

}  // namespace hcpcut
