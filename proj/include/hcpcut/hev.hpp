#pragma once

#include <string>
#include <vector>

#include "hcpcut/bnb.hpp"
#include "hcpcut/model.hpp"

namespace hcpcut {

struct HevParams {
  // drivetrain
  double N_S = 30.0, N_R = 78.0;
  double T_b = 0.0;
  double g_f = 3.268;
  double r_w = 0.32;
  double C_batt_Ah = 24.7;
  double SOC_ref = 0.55;
  // bounds
  double soc_min = 0.05, soc_max = 0.55;
  double mf_min = 0.0, mf_max = 45.45;
  double V_min = 0.0, V_max = 35.486;
  double weng_min = 80.0, weng_max = 600.0;
  double Teng_min = 0.0, Teng_max = 168.0;
  // costs
  double q1 = 5500.0, q2 = 10.0;
  double r1 = 1.0, r2 = 0.0, r3 = 0.0;
  double s = 1000.0;
  double gamma = 0.0;
  double Ts = 1.0;
  int horizon = 20;
  double duration = 100.0;
  // initial condition
  double soc0 = 0.47, mf0 = 0.0, V0 = 9.924, weng0 = 300.0, Teng0 = 80.0;
  // predicted SOC is kept this far inside its bounds (absorbs linearization error)
  double soc_margin = 2e-3;
  // surrogate map coefficients
  double mf_c0 = 0.0, mf_c1 = 6.5e-8, mf_c2 = 2e-9, mf_c3 = 2e-8;
  double eta_mot = 0.9;
  double eta_gen = 1.0 / 0.9;  // generator power flows the other way, so the divisor exceeds 1
  double voc_a = 180.0, voc_b = 120.0;        // Voc = a + b SOC
  double rdc_a = 0.30, rdc_b = -0.10;         // discharge resistance
  double rc_a = 0.25, rc_b = -0.10;           // charge resistance

  double C_batt_As() const { return C_batt_Ah * 3600.0; }
  int steps() const;
};

// throws DomainError naming the first bad field
void check_params(const HevParams& p);

struct MapPoint {
  double w_eng = 0.0, T_eng = 0.0;
  double w_mot = 0.0, T_mot = 0.0;
  double w_gen = 0.0, T_gen = 0.0;
  double soc = 0.5;
};

struct MapValues {
  double mf = 0.0, dmf_dw = 0.0, dmf_dT = 0.0;
  double mot = 0.0, dmot_dw = 0.0, dmot_dT = 0.0;
  double gen = 0.0, dgen_dw = 0.0, dgen_dT = 0.0;
  double voc = 0.0, dvoc = 0.0;
  double rdc = 0.0, drdc = 0.0;
  double rc = 0.0, drc = 0.0;
};

MapValues surrogate_maps(const MapPoint& pt, const HevParams& p);

struct HevState {
  double soc = 0.0, mf = 0.0;
};

struct HevControl {
  double V = 0.0, w_eng = 0.0, T_eng = 0.0;
};

struct Disturbance {
  double V_r = 0.0, T_d = 0.0;
};

struct PlantOutput {
  HevState next;
  double I = 0.0, P_batt = 0.0, V_oc = 0.0, R_batt = 0.0;
  double w_gen = 0.0, w_mot = 0.0, T_gen = 0.0, T_mot = 0.0;
};

// nonlinear surrogate plant; DomainError on a negative discriminant
PlantOutput plant_step(const HevState& x, const HevControl& u, bool engine_on, const Disturbance& d,
                       const HevParams& p);

struct OpPoint {
  HevState x;
  HevControl u;
};

// one period of the affine model; columns of C are (engine-on, engine-off)
struct HevLinear {
  Mat A, B, C;
  Vec f;
};

// expansion at (op, T_d0); T_d is the forecast disturbance of the period
HevLinear linearize(const OpPoint& op, const HevParams& p, double T_d0, double T_d);

HcpInstance build_hev_hcp(const HevParams& p, const OpPoint& op,
                          const std::vector<Disturbance>& forecast, int horizon);

struct ProfilePoint {
  double time_s = 0.0;
  Disturbance d;
};

std::vector<ProfilePoint> read_profile_csv(const std::string& path);
void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& prof);
// smooth synthetic drive cycle sampled every dt seconds over [0, duration]
std::vector<ProfilePoint> synthetic_profile(double duration, double dt);
// value at time t, linear interpolation, clamped at the ends
Disturbance profile_at(const std::vector<ProfilePoint>& prof, double t);

struct TraceStep {
  double time = 0.0;
  HevState state;     // state at the start of the step
  HevControl control; // applied
  int z_eng = 0;
  Disturbance d;
  PlantOutput plant;
  std::string variant;
  std::string status;
  double root_gap_pct = 0.0;
  long nodes = 0;
  double time_s = 0.0;
  bool fallback = false;
};

struct MpcTrace {
  std::vector<TraceStep> steps;
  HevState final_state;
  int bound_violations = 0;
  long total_nodes = 0;
  double mean_root_gap = 0.0;  // over steps that solved to optimality
  int solved_steps = 0;

  std::string to_csv() const;
};

MpcTrace mpc_run(const HevParams& p, const std::vector<ProfilePoint>& prof, Variant variant,
                 const SolveConfig& cfg = {});

}  // namespace hcpcut
