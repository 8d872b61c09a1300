#pragma once

#include <vector>

#include "hcpcut/model.hpp"

namespace hcpcut {

enum class SolveStatus { Optimal, Infeasible, IterationLimit };
const char* to_string(SolveStatus s);

struct QpSettings {
  int max_iter = 120;
  double tol = 1e-9;         // target; "optimal" still requires the 1e-8 contract
  double accept_tol = 1e-8;  // residual contract
  int ruiz_iters = 12;
  double infeas_tol = 1e-7;  // phase-1 threshold
};

struct RelaxPoint {
  VarLayout layout;
  std::vector<double> values;
  double objective = 0.0;
  SolveStatus status = SolveStatus::IterationLimit;
  double primal_residual = 0.0;  // absolute, unscaled
  double dual_residual = 0.0;
  double gap = 0.0;              // relative
  double data_norm = 0.0;
  int iterations = 0;
  // multipliers, sign convention: grad f + sum row_duals*a + sum epi_duals*grad(form - w) = reduced_costs
  // LessEq rows >= 0, GreaterEq rows <= 0, Equal free; reduced_costs > 0 only at lower bounds
  std::vector<double> row_duals;
  std::vector<double> epi_duals;
  std::vector<double> reduced_costs;

  double value(const VarId& v) const { return values[layout.col(v)]; }
  bool optimal() const { return status == SolveStatus::Optimal; }
};

RelaxPoint solve_relaxation(const ConvexModel& m, const QpSettings& s = {});
// Starts from base.values; the optimum is the same as a cold start up to tolerance.
RelaxPoint warm_start(const ConvexModel& m, const RelaxPoint& base, const QpSettings& s = {});

struct KktReport {
  double stationarity = 0.0;     // inf-norm, free variables, after bound multipliers
  double primal = 0.0;           // worst constraint violation
  double complementarity = 0.0;  // worst |dual * slack|
  double dual_sign = 0.0;        // worst sign violation of inequality multipliers
};
KktReport kkt_check(const ConvexModel& m, const RelaxPoint& p);

}  // namespace hcpcut
