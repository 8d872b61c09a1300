#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hcpcut {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// distinct types so callers (cli, tests) can tell failures apart
class DimensionError : public Error { using Error::Error; };
class InfeasibleFix : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };

// Periods are 0-based in code: states x_0..x_n, controls/modes/epigraphs 0..n-1.
// Human-facing text (reports, validation messages) prints t+1.
struct HcpInstance {
  int n = 0, dx = 0, dy = 0, dz = 0;
  bool mode_exactly_one = false;
  std::vector<Mat> Q;       // n+1
  std::vector<Mat> R, S;    // n
  std::vector<Mat> A, B, C; // n
  std::vector<Vec> f;       // n
  std::vector<Mat> G, H;    // n, dy x dz
  std::vector<Vec> lb, ub;  // n+1
  std::vector<Vec> lin_x;   // empty or n+1
  std::vector<Vec> lin_y;   // empty or n
  std::optional<Vec> x_init;
  double obj_offset = 0.0;  // constant added to the objective (reference expansions)

  // lb/ub of x_0 after applying x_init
  Vec state_lb(int t) const;
  Vec state_ub(int t) const;
};

struct Violation {
  std::string invariant;
  std::string where;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const HcpInstance& inst, bool cuts_enabled = true);

enum class VarKind { State, Control, Indicator, Epigraph };

struct VarId {
  VarKind kind = VarKind::State;
  int t = 0;
  int i = 0;
  auto operator<=>(const VarId&) const = default;
};

std::string to_string(const VarId& v);

// Column layout: all x, then y, then z, then w.
struct VarLayout {
  int n = 0, dx = 0, dy = 0, dz = 0;
  int x(int t, int i) const { return t * dx + i; }
  int y(int t, int j) const { return (n + 1) * dx + t * dy + j; }
  int z(int t, int k) const { return (n + 1) * dx + n * dy + t * dz + k; }
  int w(int t) const { return (n + 1) * dx + n * (dy + dz) + t; }
  int size() const { return (n + 1) * dx + n * (dy + dz + 1); }
  int col(const VarId& v) const;
  VarId id(int col) const;
  bool operator==(const VarLayout&) const = default;
};

enum class Sense { LessEq, GreaterEq, Equal };
enum class Provenance { Original, Feasibility, Gradient, ModeFix };
const char* to_string(Provenance p);

struct LinearRow {
  std::vector<int> idx;
  std::vector<double> val;
  Sense sense = Sense::LessEq;
  double rhs = 0.0;
  Provenance prov = Provenance::Original;
  int period = -1;
  double activity(const std::vector<double>& x) const;
  // positive when violated
  double violation(const std::vector<double>& x) const;
};

// v' P v <= w with v = x[idx]
struct EpigraphRow {
  std::vector<int> idx;
  Mat P;
  int w = -1;
  int period = -1;
  double form(const std::vector<double>& x) const;
};

struct Bound {
  double lo = 0.0, hi = 0.0;
};

// Epigraph relaxation. Treat as a value: operations return modified copies.
struct ConvexModel {
  VarLayout layout;
  std::vector<Bound> bounds;
  std::vector<char> integral;
  std::vector<int> quad_idx;  // objective quadratic v'Mv over x[quad_idx]
  Mat quad;
  std::vector<double> lin;
  double constant = 0.0;
  std::vector<LinearRow> rows;
  std::vector<EpigraphRow> epis;

  int num_vars() const { return static_cast<int>(bounds.size()); }
  double objective(const std::vector<double>& x) const;
  int count_rows(Provenance p) const;
};

ConvexModel build_epigraph(const HcpInstance& inst);
ConvexModel fix_variable(const ConvexModel& m, const VarId& v, double value);
ConvexModel with_rows(const ConvexModel& m, const std::vector<LinearRow>& extra);

// Plain (x, y, z) trajectory, used for direct evaluation of the MIQP.
struct Assignment {
  std::vector<Vec> x, y, z;
};

Assignment extract(const HcpInstance& inst, const std::vector<double>& values);
// Direct objective of the hybrid control problem (no epigraph variables).
double direct_objective(const HcpInstance& inst, const Assignment& a);
// Largest constraint violation of the original problem (integrality not included).
double max_violation(const HcpInstance& inst, const Assignment& a);

}  // namespace hcpcut
