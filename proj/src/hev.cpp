#include "hcpcut/hev.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hcpcut/instance_io.hpp"

namespace hcpcut {

namespace {

constexpr double kDiscEps = 1e-9;

void need(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

struct Kinematics {
  double w_mot, T_mot, w_gen, T_gen;
};

Kinematics kinematics(const HevControl& u, double T_d, const HevParams& p) {
  Kinematics k;
  k.w_mot = p.g_f / p.r_w * u.V;
  k.w_gen = (p.N_S + p.N_R) / p.N_S * u.w_eng - p.N_R / p.N_S * k.w_mot;
  k.T_gen = -p.N_S / (p.N_S + p.N_R) * u.T_eng;
  k.T_mot = (T_d - p.T_b) / p.g_f - p.N_R / (p.N_S + p.N_R) * u.T_eng;
  return k;
}

// battery power and its partials in (V, w_eng, T_eng, T_d)
struct Power {
  double P, dV, dw, dT, dTd;
  Kinematics k;
};

Power battery_power(const HevControl& u, double T_d, const HevParams& p) {
  Power o;
  o.k = kinematics(u, T_d, p);
  const Kinematics& k = o.k;
  o.P = k.w_mot * k.T_mot / p.eta_mot + k.w_gen * k.T_gen / p.eta_gen;
  const double dwm_dV = p.g_f / p.r_w;
  o.dV = dwm_dV * (k.T_mot / p.eta_mot - p.N_R / p.N_S * k.T_gen / p.eta_gen);
  o.dw = (p.N_S + p.N_R) / p.N_S * k.T_gen / p.eta_gen;
  o.dT = -k.w_mot * p.N_R / (p.N_S + p.N_R) / p.eta_mot - k.w_gen * p.N_S / (p.N_S + p.N_R) / p.eta_gen;
  o.dTd = k.w_mot / (p.g_f * p.eta_mot);
  return o;
}

struct Current {
  double I, dP, dsoc, voc, R, disc;
};

Current battery_current(double P, double soc, const HevParams& p) {
  Current c;
  c.voc = p.voc_a + p.voc_b * soc;
  bool discharge = P >= 0.0;
  c.R = discharge ? p.rdc_a + p.rdc_b * soc : p.rc_a + p.rc_b * soc;
  double dR = discharge ? p.rdc_b : p.rc_b;
  c.disc = c.voc * c.voc - 4.0 * c.R * P;
  if (c.disc < 0.0) throw DomainError("battery power exceeds the discriminant limit");
  double D = std::sqrt(c.disc);
  c.I = (c.voc - D) / (2.0 * c.R);
  c.dP = D > 0.0 ? 1.0 / D : 0.0;
  double dI_dvoc = D > 0.0 ? (1.0 - c.voc / D) / (2.0 * c.R) : 0.0;
  double dI_dR = D > 0.0 ? P / (c.R * D) - (c.voc - D) / (2.0 * c.R * c.R) : 0.0;
  c.dsoc = dI_dvoc * p.voc_b + dI_dR * dR;
  return c;
}

double fuel(double w, double T, const HevParams& p) {
  return p.mf_c0 + p.mf_c1 * w * T + p.mf_c2 * w * w + p.mf_c3 * T * T;
}

}  // namespace

int HevParams::steps() const { return static_cast<int>(std::lround(duration / Ts)); }

void check_params(const HevParams& p) {
  need(p.N_S > 0 && p.N_R > 0, "N_S, N_R must be positive");
  need(p.g_f > 0, "g_f must be positive");
  need(p.r_w > 0, "r_w must be positive");
  need(p.C_batt_Ah > 0, "C_batt must be positive");
  need(p.soc_min < p.soc_max, "soc bounds out of order");
  need(p.mf_min <= p.mf_max, "mf bounds out of order");
  need(p.V_min <= p.V_max, "V bounds out of order");
  need(p.weng_min <= p.weng_max, "w_eng bounds out of order");
  need(p.Teng_min <= p.Teng_max, "T_eng bounds out of order");
  need(p.Ts > 0, "Ts must be positive");
  need(p.horizon >= 1, "horizon must be >= 1");
  need(p.duration > 0, "duration must be positive");
  need(p.q1 >= 0 && p.q2 >= 0 && p.r1 >= 0 && p.r2 >= 0 && p.r3 >= 0 && p.s >= 0,
       "cost weights must be nonnegative");
  need(p.gamma >= 0, "gamma must be nonnegative");
  need(p.eta_mot > 0 && p.eta_gen > 0, "efficiencies must be positive");
  need(2 * p.soc_margin < p.soc_max - p.soc_min, "soc_margin too large");
  for (double s : {p.soc_min, p.soc_max}) {
    need(p.rc_a + p.rc_b * s > 0, "charge resistance must stay positive");
    need(p.rdc_a + p.rdc_b * s >= p.rc_a + p.rc_b * s, "discharge resistance below charge resistance");
  }
}

MapValues surrogate_maps(const MapPoint& pt, const HevParams& p) {
  const double tol = 1e-9;
  if (pt.soc < -tol || pt.soc > 1.0 + tol) throw DomainError("surrogate_maps: soc outside [0, 1]");
  if (pt.w_eng < -tol || pt.w_eng > p.weng_max + tol)
    throw DomainError("surrogate_maps: w_eng outside [0, w_eng max]");
  if (pt.T_eng < -tol || pt.T_eng > p.Teng_max + tol)
    throw DomainError("surrogate_maps: T_eng outside [0, T_eng max]");
  MapValues m;
  const double w = pt.w_eng, T = pt.T_eng;
  m.mf = fuel(w, T, p);
  m.dmf_dw = p.mf_c1 * T + 2.0 * p.mf_c2 * w;
  m.dmf_dT = p.mf_c1 * w + 2.0 * p.mf_c3 * T;
  m.mot = pt.w_mot * pt.T_mot / p.eta_mot;
  m.dmot_dw = pt.T_mot / p.eta_mot;
  m.dmot_dT = pt.w_mot / p.eta_mot;
  m.gen = pt.w_gen * pt.T_gen / p.eta_gen;
  m.dgen_dw = pt.T_gen / p.eta_gen;
  m.dgen_dT = pt.w_gen / p.eta_gen;
  m.voc = p.voc_a + p.voc_b * pt.soc;
  m.dvoc = p.voc_b;
  m.rdc = p.rdc_a + p.rdc_b * pt.soc;
  m.drdc = p.rdc_b;
  m.rc = p.rc_a + p.rc_b * pt.soc;
  m.drc = p.rc_b;
  return m;
}

PlantOutput plant_step(const HevState& x, const HevControl& u_in, bool engine_on,
                       const Disturbance& d, const HevParams& p) {
  HevControl u = u_in;
  if (!engine_on) u.w_eng = u.T_eng = 0.0;
  const double tol = 1e-7;
  if (u.V < p.V_min - tol || u.V > p.V_max + tol) throw DomainError("plant_step: V out of bounds");
  if (engine_on) {
    if (u.w_eng < p.weng_min - tol || u.w_eng > p.weng_max + tol)
      throw DomainError("plant_step: w_eng out of bounds");
    if (u.T_eng < p.Teng_min - tol || u.T_eng > p.Teng_max + tol)
      throw DomainError("plant_step: T_eng out of bounds");
  }
  Power pw = battery_power(u, d.T_d, p);
  Current c = battery_current(pw.P, x.soc, p);
  PlantOutput o;
  o.I = c.I;
  o.P_batt = pw.P;
  o.V_oc = c.voc;
  o.R_batt = c.R;
  o.w_mot = pw.k.w_mot;
  o.w_gen = pw.k.w_gen;
  o.T_mot = pw.k.T_mot;
  o.T_gen = pw.k.T_gen;
  o.next.soc = x.soc - p.Ts / p.C_batt_As() * c.I;
  o.next.mf = p.gamma * x.mf + fuel(u.w_eng, u.T_eng, p);
  return o;
}

HevLinear linearize(const OpPoint& op, const HevParams& p, double T_d0, double T_d) {
  const double k = p.Ts / p.C_batt_As();
  Power pw = battery_power(op.u, T_d0, p);
  Current c = battery_current(pw.P, op.x.soc, p);
  if (c.disc <= kDiscEps) throw DomainError("linearization singular: discriminant at the expansion point");
  HevLinear L;
  L.A = Mat::Zero(2, 2);
  L.B = Mat::Zero(2, 3);
  L.C = Mat::Zero(2, 2);
  L.f = Vec::Zero(2);
  L.A(0, 0) = 1.0 - k * c.dsoc;
  L.A(1, 1) = p.gamma;
  L.B(0, 0) = -k * c.dP * pw.dV;
  L.B(0, 1) = -k * c.dP * pw.dw;
  L.B(0, 2) = -k * c.dP * pw.dT;
  const double w0 = op.u.w_eng, T0 = op.u.T_eng;
  L.B(1, 1) = p.mf_c1 * T0 + 2.0 * p.mf_c2 * w0;
  L.B(1, 2) = p.mf_c1 * w0 + 2.0 * p.mf_c3 * T0;
  const double dd = -k * c.dP * pw.dTd * (T_d - T_d0);

  Vec x0(2), y0(3);
  x0 << op.x.soc, op.x.mf;
  y0 << op.u.V, w0, T0;
  Vec F0(2);
  F0 << op.x.soc - k * c.I, p.gamma * op.x.mf + fuel(w0, T0, p);
  Vec kappa = F0 - L.A * x0 - L.B * y0;
  kappa[0] += dd;
  // off branch: exact at (x0, V0, 0, 0); the on column carries the remaining offset
  Vec yoff(3);
  yoff << op.u.V, 0.0, 0.0;
  Vec Foff(2);
  try {
    HevControl uo{op.u.V, 0.0, 0.0};
    Power po = battery_power(uo, T_d0, p);
    Current co = battery_current(po.P, op.x.soc, p);
    Foff << op.x.soc - k * co.I, p.gamma * op.x.mf + fuel(0.0, 0.0, p);
    L.f = Foff - L.A * x0 - L.B * yoff;
    L.f[0] += dd;
  } catch (const DomainError&) {
    L.f = kappa;
  }
  L.C(0, 0) = kappa[0] - L.f[0];
  L.C(1, 0) = kappa[1] - L.f[1];
  return L;
}

HcpInstance build_hev_hcp(const HevParams& p, const OpPoint& op,
                          const std::vector<Disturbance>& forecast, int horizon) {
  if (static_cast<int>(forecast.size()) < horizon)
    throw DimensionError("forecast shorter than the horizon");
  HcpInstance in;
  in.n = horizon;
  in.dx = 2;
  in.dy = 3;
  in.dz = 2;
  in.mode_exactly_one = true;
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = p.q1;
  Q(1, 1) = p.q2;
  Mat R = Mat::Zero(3, 3);
  R(0, 0) = p.r1;
  R(1, 1) = p.r2;
  R(2, 2) = p.r3;
  Mat S = Mat::Zero(2, 2);
  S(0, 0) = p.s;
  Mat G(3, 2), H(3, 2);
  // columns: engine on, engine off
  G << p.V_min, p.V_min, p.weng_min, 0.0, p.Teng_min, 0.0;
  H << p.V_max, p.V_max, p.weng_max, 0.0, p.Teng_max, 0.0;
  Vec lb_state(2), ub_state(2), lb0(2), ub0(2);
  lb_state << p.soc_min + p.soc_margin, p.mf_min;
  ub_state << p.soc_max - p.soc_margin, p.mf_max;
  lb0 << 0.0, std::min(p.mf_min, op.x.mf);
  ub0 << 1.0, std::max(p.mf_max, op.x.mf);
  double offset = 0.0;
  for (int t = 0; t <= horizon; ++t) {
    in.Q.push_back(Q);
    in.lb.push_back(t == 0 ? lb0 : lb_state);
    in.ub.push_back(t == 0 ? ub0 : ub_state);
    Vec lx = Vec::Zero(2);
    if (t > 0) {
      // q1 (SOC - SOC_ref)^2 expanded; the t = 0 term is a constant of the fixed state
      lx[0] = -2.0 * p.q1 * p.SOC_ref;
      offset += p.q1 * p.SOC_ref * p.SOC_ref;
    }
    in.lin_x.push_back(lx);
  }
  if (in.lin_x.size() > 0) {
    // SOC(t0) enters q1 SOC^2 through Q[0]; complete its square too
    in.lin_x[0][0] = -2.0 * p.q1 * p.SOC_ref;
    offset += p.q1 * p.SOC_ref * p.SOC_ref;
  }
  for (int t = 0; t < horizon; ++t) {
    HevLinear L = linearize(op, p, forecast[0].T_d, forecast[t].T_d);
    in.A.push_back(L.A);
    in.B.push_back(L.B);
    in.C.push_back(L.C);
    in.f.push_back(L.f);
    in.R.push_back(R);
    in.S.push_back(S);
    in.G.push_back(G);
    in.H.push_back(H);
    Vec ly = Vec::Zero(3);
    ly[0] = -2.0 * p.r1 * forecast[t].V_r;
    offset += p.r1 * forecast[t].V_r * forecast[t].V_r;
    in.lin_y.push_back(ly);
  }
  Vec xi(2);
  xi << op.x.soc, op.x.mf;
  in.x_init = xi;
  in.obj_offset = offset;
  return in;
}

std::vector<ProfilePoint> read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  std::vector<ProfilePoint> out;
  int ln = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (header.empty()) {
      header = cells;
      if (header.size() < 3 || header[0] != "time_s" || header[1] != "V_r" || header[2] != "T_d")
        throw ParseError("line 1: expected header time_s,V_r,T_d");
      continue;
    }
    if (cells.size() < 3) throw ParseError("line " + std::to_string(ln) + ": expected 3 columns");
    try {
      ProfilePoint pp;
      pp.time_s = std::stod(cells[0]);
      pp.d.V_r = std::stod(cells[1]);
      pp.d.T_d = std::stod(cells[2]);
      out.push_back(pp);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(ln) + ": malformed number");
    }
  }
  if (out.empty()) throw ParseError("profile has no rows");
  for (size_t i = 1; i < out.size(); ++i)
    if (!(out[i].time_s > out[i - 1].time_s)) throw ParseError("profile times must increase");
  return out;
}

void write_profile_csv(const std::string& path, const std::vector<ProfilePoint>& prof) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "time_s,V_r,T_d\n";
  char buf[128];
  for (const auto& pp : prof) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g\n", pp.time_s, pp.d.V_r, pp.d.T_d);
    os << buf;
  }
}

std::vector<ProfilePoint> synthetic_profile(double duration, double dt) {
  // speed oscillating around the initial 9.924 m/s; wheel torque from a point-mass vehicle
  const double mass = 1400.0, rw = 0.32, roll = 150.0, drag = 0.45;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<ProfilePoint> out;
  int m = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i <= m; ++i) {
    double t = i * dt;
    double V = 9.924 + 5.0 * std::sin(two_pi * t / 50.0) + 2.0 * std::sin(two_pi * t / 17.0);
    double a = 5.0 * two_pi / 50.0 * std::cos(two_pi * t / 50.0) +
               2.0 * two_pi / 17.0 * std::cos(two_pi * t / 17.0);
    double Td = rw * (mass * a + roll + drag * V * V);
    out.push_back({t, {V, Td}});
  }
  return out;
}

Disturbance profile_at(const std::vector<ProfilePoint>& prof, double t) {
  if (prof.empty()) throw DimensionError("empty profile");
  if (t <= prof.front().time_s) return prof.front().d;
  if (t >= prof.back().time_s) return prof.back().d;
  auto it = std::upper_bound(prof.begin(), prof.end(), t,
                             [](double v, const ProfilePoint& p) { return v < p.time_s; });
  const ProfilePoint& b = *it;
  const ProfilePoint& a = *(it - 1);
  double w = (t - a.time_s) / (b.time_s - a.time_s);
  return {a.d.V_r + w * (b.d.V_r - a.d.V_r), a.d.T_d + w * (b.d.T_d - a.d.T_d)};
}

std::string MpcTrace::to_csv() const {
  std::ostringstream os;
  os << "time,SOC,mdot_f,V,w_eng,T_eng,z_eng,V_r,T_d,I,P_batt,V_oc,R_batt,w_gen,w_mot,T_gen,T_mot,"
        "variant,status,root_gap_pct,nodes,time_s,fallback\n";
  char buf[512];
  for (const auto& s : steps) {
    const PlantOutput& o = s.plant;
    std::snprintf(buf, sizeof buf,
                  "%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,",
                  s.time, s.state.soc, s.state.mf, s.control.V, s.control.w_eng, s.control.T_eng,
                  s.z_eng, s.d.V_r, s.d.T_d, o.I, o.P_batt, o.V_oc, o.R_batt, o.w_gen, o.w_mot,
                  o.T_gen, o.T_mot);
    os << buf << s.variant << ',' << s.status << ',';
    std::snprintf(buf, sizeof buf, "%.6g,%ld,%.6g,%d\n", s.root_gap_pct, s.nodes, s.time_s,
                  s.fallback ? 1 : 0);
    os << buf;
  }
  return os.str();
}

MpcTrace mpc_run(const HevParams& p, const std::vector<ProfilePoint>& prof, Variant variant,
                 const SolveConfig& cfg_in) {
  check_params(p);
  SolveConfig cfg = cfg_in;
  cfg.variant = variant;
  MpcTrace tr;
  HevState x{p.soc0, p.mf0};
  HevControl prev{p.V0, p.weng0, p.Teng0};
  const int steps = p.steps();
  double gap_sum = 0.0;
  for (int k = 0; k < steps; ++k) {
    TraceStep st;
    st.time = k * p.Ts;
    st.state = x;
    st.variant = to_string(variant);
    st.d = profile_at(prof, st.time);
    std::vector<Disturbance> fc;
    for (int j = 0; j < p.horizon; ++j) fc.push_back(profile_at(prof, st.time + j * p.Ts));

    HevControl u{std::clamp(prev.V, p.V_min, p.V_max), 0.0, 0.0};
    bool on = false;
    try {
      HcpInstance inst = build_hev_hcp(p, {x, prev}, fc, p.horizon);
      BnbReport rep = solve_miqp(inst, cfg);
      st.status = to_string(rep.status);
      st.nodes = rep.nodes;
      st.time_s = rep.time_s;
      tr.total_nodes += rep.nodes;
      if (rep.status == BnbStatus::Optimal) {
        st.root_gap_pct = rep.root_gap_pct;
        gap_sum += rep.root_gap_pct;
        ++tr.solved_steps;
        const Assignment& a = rep.assignment;
        on = a.z[0][0] > 0.5;
        u.V = std::clamp(a.y[0][0], p.V_min, p.V_max);
        u.w_eng = on ? std::clamp(a.y[0][1], p.weng_min, p.weng_max) : 0.0;
        u.T_eng = on ? std::clamp(a.y[0][2], p.Teng_min, p.Teng_max) : 0.0;
      } else {
        st.fallback = true;
      }
    } catch (const Error& e) {
      st.status = std::string("error: ") + e.what();
      st.fallback = true;
    }
    try {
      st.plant = plant_step(x, u, on, st.d, p);
    } catch (const DomainError&) {
      // battery limit: engine-off hold is the safe fallback
      st.fallback = true;
      on = false;
      u = {std::clamp(prev.V, p.V_min, p.V_max), 0.0, 0.0};
      st.plant = plant_step(x, u, on, st.d, p);
    }
    st.control = u;
    st.z_eng = on ? 1 : 0;
    x = st.plant.next;
    if (x.soc < p.soc_min - 1e-9 || x.soc > p.soc_max + 1e-9 || x.mf < p.mf_min - 1e-9 ||
        x.mf > p.mf_max + 1e-9)
      ++tr.bound_violations;
    prev = u;
    tr.steps.push_back(std::move(st));
  }
  tr.final_state = x;
  tr.mean_root_gap = tr.solved_steps ? gap_sum / tr.solved_steps : 0.0;
  return tr;
}

}  // namespace hcpcut
