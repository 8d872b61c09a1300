#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hcpcut/bounds.hpp"
#include "hcpcut/model.hpp"

namespace hcpcut {

// sum coef * v >= rhs
struct LinearCut {
  std::map<VarId, double> coef;
  double rhs = 0.0;
  Provenance prov = Provenance::Feasibility;
  int period = -1;
  int split = -1;           // -1 on the scalar-indicator path
  double violation = 0.0;   // at the generating point

  double lhs(const VarLayout& L, const std::vector<double>& values) const;
  double violation_at(const VarLayout& L, const std::vector<double>& values) const;
  LinearRow to_row(const VarLayout& L) const;
  std::string to_string() const;
};

// lhs >= rhs, normalized; returns nullopt when no variable survives
std::optional<LinearCut> make_cut(const AffineExpr& lhs, const AffineExpr& rhs, Provenance p,
                                  int period, int split = -1);

struct DisjunctionSplit {
  std::vector<int> K1, K2;
  std::vector<int> J1, J2;  // controls not forced to zero when the other side is off
  // derived partition of the controls
  std::vector<int> shared;  // J1 ∩ J2
  std::vector<int> J1only, J2only;
};

DisjunctionSplit make_split(const PeriodData& pd, std::vector<int> K1);

enum class SplitPolicy { Singletons, Custom };
std::vector<DisjunctionSplit> enumerate_splits(const HcpInstance& inst, int t,
                                               SplitPolicy policy = SplitPolicy::Singletons,
                                               const std::vector<std::vector<int>>& custom = {});

// Six static cuts per state coordinate, scalar indicator only.
std::vector<LinearCut> feasibility_cuts_1d(const PeriodData& pd);
// Eight static cuts per state coordinate for a (K1, K2) split.
std::vector<LinearCut> feasibility_cuts_multi(const DisjunctionSplit& sp, const PeriodData& pd);

enum class SigmaCase { Inside, BelowConst, BelowFrac, AboveConst, AboveFrac, NoCut };
const char* to_string(SigmaCase c);

struct CutWorkspace {
  int t = 0;
  int split = -1;
  Vec lo, hi;     // projection bounds at the point
  Vec sigma;      // clamp point
  double tau = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  std::vector<double> point;  // full model vector of the generating point
  std::vector<SigmaCase> cases;
};

// Per-period geometry for one split (the scalar path uses K1 = {0}, K2 = {}).
class PeriodCutter {
 public:
  PeriodCutter(const HcpInstance& inst, int t, std::optional<DisjunctionSplit> split,
               int split_id = -1);

  const DisjunctionSplit& split() const { return sp_; }
  const PeriodData& data() const { return pd_; }
  const IntervalImage& image() const { return img_; }  // shifted by f
  int split_id() const { return split_id_; }

  double lambda(const std::vector<double>& v) const;
  std::optional<std::pair<Vec, Vec>> projection_bounds(const std::vector<double>& v,
                                                       double eps = 1e-6) const;
  std::optional<CutWorkspace> select_sigma_case(const std::vector<double>& v,
                                                double eps = 1e-6) const;
  double mu_eval(const CutWorkspace& ws, const std::vector<double>& v) const;
  // gradient over the model columns touched by this period
  std::vector<std::pair<int, double>> mu_gradient(const CutWorkspace& ws,
                                                  const std::vector<double>& v) const;
  LinearCut gradient_cut(const CutWorkspace& ws) const;

  // workspace with caller-chosen rows (tests, hand examples)
  CutWorkspace workspace(const std::vector<double>& v, std::vector<SigmaCase> cases) const;

 private:
  double row_s(int i, SigmaCase c, const std::vector<double>& v, double lam) const;
  double h(int i, const std::vector<double>& v) const;
  double a2(int i, const std::vector<double>& v) const;

  VarLayout L_;
  PeriodData pd_;
  DisjunctionSplit sp_;
  int split_id_;
  bool plain_controls_ = false;  // R couples shared and gated controls
  IntervalImage img_;
  Vec q_;
};

// Free-function forms
std::optional<std::pair<Vec, Vec>> projection_bounds(const HcpInstance& inst, int t,
                                                     const std::vector<double>& v,
                                                     std::optional<DisjunctionSplit> split = {});
std::pair<double, Vec> tau_closed_form(const Vec& x2, const Vec& lo, const Vec& hi, const Vec& q);

struct SeparationConfig {
  double min_violation = 1e-7;
  double eps = 1e-6;
  SplitPolicy policy = SplitPolicy::Singletons;
  std::vector<std::vector<int>> custom_splits;
};

// Stateful separator: remembers emitted gradient cuts per (period, split).
class Separator {
 public:
  Separator(const HcpInstance& inst, SeparationConfig cfg = {});
  std::vector<LinearCut> separate(const std::vector<double>& values);
  // all static feasibility cuts (skips periods listed in fixed)
  std::vector<LinearCut> feasibility_cuts(const std::vector<char>& fixed) const;
  const std::vector<PeriodCutter>& cutters() const { return cutters_; }

 private:
  VarLayout L_;
  SeparationConfig cfg_;
  std::vector<PeriodCutter> cutters_;
  std::vector<std::vector<LinearCut>> emitted_;  // parallel to cutters_
};

}  // namespace hcpcut
