// hcpcut command line: generate | solve | bench | hev-sim
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcpcut/bench.hpp"
#include "hcpcut/bnb.hpp"
#include "hcpcut/hev.hpp"
#include "hcpcut/instance_io.hpp"

using namespace hcpcut;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolve = 2, kIo = 3 };

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << text;
  if (!os) throw IoError("write failed for " + path);
}

std::vector<std::pair<int, int>> parse_cells(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(s);
  for (std::string c; std::getline(ss, c, ',');) {
    auto x = c.find('x');
    if (x == std::string::npos) throw CLI::ValidationError("--cells", "expected DXxDY items, got " + c);
    try {
      out.emplace_back(std::stoi(c.substr(0, x)), std::stoi(c.substr(x + 1)));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--cells", "expected DXxDY items, got " + c);
    }
  }
  return out;
}

std::map<std::string, double*> hev_fields(HevParams& p) {
  return {{"N_S", &p.N_S},         {"N_R", &p.N_R},         {"T_b", &p.T_b},
          {"g_f", &p.g_f},         {"r_w", &p.r_w},         {"C_batt_Ah", &p.C_batt_Ah},
          {"SOC_ref", &p.SOC_ref}, {"soc_min", &p.soc_min}, {"soc_max", &p.soc_max},
          {"mf_min", &p.mf_min},   {"mf_max", &p.mf_max},   {"V_min", &p.V_min},
          {"V_max", &p.V_max},     {"weng_min", &p.weng_min}, {"weng_max", &p.weng_max},
          {"Teng_min", &p.Teng_min}, {"Teng_max", &p.Teng_max}, {"q1", &p.q1},
          {"q2", &p.q2},           {"r1", &p.r1},           {"r2", &p.r2},
          {"r3", &p.r3},           {"s", &p.s},             {"gamma", &p.gamma},
          {"Ts", &p.Ts},           {"duration", &p.duration}, {"soc0", &p.soc0},
          {"mf0", &p.mf0},         {"V0", &p.V0},           {"weng0", &p.weng0},
          {"Teng0", &p.Teng0},     {"soc_margin", &p.soc_margin}, {"mf_c0", &p.mf_c0},
          {"mf_c1", &p.mf_c1},     {"mf_c2", &p.mf_c2},     {"mf_c3", &p.mf_c3},
          {"eta_mot", &p.eta_mot}, {"eta_gen", &p.eta_gen}, {"voc_a", &p.voc_a},
          {"voc_b", &p.voc_b},     {"rdc_a", &p.rdc_a},     {"rdc_b", &p.rdc_b},
          {"rc_a", &p.rc_a},       {"rc_b", &p.rc_b}};
}

void load_hev_params(const std::string& path, HevParams& p) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": malformed JSON (" + e.what() + ")");
  }
  auto fields = hev_fields(p);
  for (const auto& [k, v] : j.items()) {
    if (k == "horizon") {
      if (!v.is_number_integer()) throw ParseError("field 'horizon': expected an integer");
      p.horizon = v.get<int>();
      continue;
    }
    auto it = fields.find(k);
    if (it == fields.end()) throw ParseError("unknown field '" + k + "'");
    if (!v.is_number()) throw ParseError("field '" + k + "': expected a number");
    *it->second = v.get<double>();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid control problems: cut generation, branch-and-bound, HEV simulation"};
  app.require_subcommand(1);
  // --h is a generator field, so help keeps only the long form
  app.set_help_flag("--help", "print help and exit");
  bool verbose = false;
  app.add_flag("--verbose", verbose, "progress lines on stdout");

  // generate
  SyntheticConfig gc;
  gc.n = 10;
  gc.count = 1;
  std::string gen_out;
  bool override_ranges = false;
  auto* gen = app.add_subcommand("generate", "write seeded synthetic instances");
  gen->add_option("--n", gc.n, "periods")->capture_default_str();
  gen->add_option("--dx", gc.dx, "state dimension (1..5)")->capture_default_str();
  gen->add_option("--dy", gc.dy, "control dimension (dx..dx+4)")->capture_default_str();
  gen->add_option("--dz", gc.dz, "indicator dimension")->capture_default_str();
  gen->add_option("--seed", gc.seed, "base seed")->capture_default_str();
  gen->add_option("--count", gc.count, "instances; >1 writes OUT-<i>.json")->capture_default_str();
  gen->add_option("--g", gc.g, "lower control bound when on")->capture_default_str();
  gen->add_option("--h", gc.h, "upper control bound when on")->capture_default_str();
  gen->add_flag("--override-ranges", override_ranges, "allow dimensions outside the default ranges");
  gen->add_option("--out", gen_out, "output path")->required();

  // solve
  std::string solve_in, solve_out = "-", variant_s = "wc-g";
  SolveConfig sc;
  auto* sol = app.add_subcommand("solve", "branch-and-bound on one instance file");
  sol->add_option("--in", solve_in, "instance JSON")->required();
  sol->add_option("--variant", variant_s, "miqp | wc-g")->capture_default_str();
  sol->add_option("--time-limit", sc.time_limit, "seconds")->capture_default_str();
  sol->add_option("--root-cut-rounds", sc.root_cut_rounds, "root separation rounds")->capture_default_str();
  sol->add_option("--node-cut-rounds", sc.node_cut_rounds, "separation rounds per node")->capture_default_str();
  sol->add_option("--int-tol", sc.int_tol, "integrality tolerance")->capture_default_str();
  sol->add_option("--gap-tol", sc.gap_tol, "relative optimality gap")->capture_default_str();
  sol->add_option("--out", solve_out, "report path, - for stdout")->capture_default_str();

  // bench
  std::string cells_s = "1x1,2x2,4x4", bench_out = "-";
  std::vector<std::string> bench_variants{"miqp", "wc-g"};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  BenchConfig bc;
  auto* ben = app.add_subcommand("bench", "benchmark sweep to CSV");
  ben->add_option("--cells", cells_s, "comma list of DXxDY")->capture_default_str();
  ben->add_option("--seeds", seeds, "seeds, one instance per seed and cell")->capture_default_str();
  ben->add_option("--variant", bench_variants, "variants to run")->capture_default_str();
  ben->add_option("--n", bc.n, "periods")->capture_default_str();
  ben->add_option("--threads", bc.threads, "worker threads")->capture_default_str();
  ben->add_option("--time-limit", bc.solve.time_limit, "seconds per solve")->capture_default_str();
  ben->add_option("--root-cut-rounds", bc.solve.root_cut_rounds, "root separation rounds")->capture_default_str();
  ben->add_option("--out", bench_out, "CSV path, - for stdout")->capture_default_str();

  // hev-sim
  HevParams hp;
  std::string params_path, profile_path, hev_out = "-", hev_variant = "wc-g";
  auto* hev = app.add_subcommand("hev-sim", "closed-loop MPC on the surrogate HEV plant");
  hev->add_option("--params", params_path, "JSON of HevParams overrides");
  hev->add_option("--profile", profile_path, "CSV time_s,V_r,T_d (default: built-in cycle)");
  hev->add_option("--variant", hev_variant, "miqp | wc-g")->capture_default_str();
  hev->add_option("--r1", hp.r1, "speed tracking weight")->capture_default_str();
  hev->add_option("--gamma", hp.gamma, "fuel-rate memory")->capture_default_str();
  hev->add_option("--ts", hp.Ts, "sampling time, s")->capture_default_str();
  hev->add_option("--horizon", hp.horizon, "MPC periods")->capture_default_str();
  hev->add_option("--duration", hp.duration, "simulated seconds")->capture_default_str();
  hev->add_option("--out", hev_out, "trace CSV path, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (*gen) {
      gc.check_ranges = !override_ranges;
      for (int i = 0; i < gc.count; ++i) {
        HcpInstance in = generate_synthetic(gc, stream_seed(gc.seed, gc.dx, gc.dy, i));
        std::string path = gc.count == 1 ? gen_out : gen_out + "-" + std::to_string(i) + ".json";
        write_instance_file(path, in);
        if (verbose) std::cout << "wrote " << path << "\n";
      }
      return kOk;
    }
    if (*sol) {
      auto v = parse_variant(variant_s);
      if (!v) {
        std::cerr << "unknown variant '" << variant_s << "'\n" << sol->help();
        return kUsage;
      }
      sc.variant = *v;
      HcpInstance in = read_instance_file(solve_in);
      BnbReport rep = solve_miqp(in, sc);
      write_text(solve_out, rep.to_record());
      return rep.status == BnbStatus::Optimal ? kOk : kSolve;
    }
    if (*ben) {
      bc.cells = parse_cells(cells_s);
      for (const auto& s : bench_variants) {
        auto v = parse_variant(s);
        if (!v) {
          std::cerr << "unknown variant '" << s << "'\n" << ben->help();
          return kUsage;
        }
        bc.variants.push_back(*v);
      }
      bc.seeds = seeds;
      auto rows = run_benchmark_rows(bc);
      write_text(bench_out, benchmark_csv(rows, bc));
      for (const auto& r : rows)
        if (r.status == "error") return kSolve;
      return kOk;
    }
    if (*hev) {
      auto v = parse_variant(hev_variant);
      if (!v) {
        std::cerr << "unknown variant '" << hev_variant << "'\n" << hev->help();
        return kUsage;
      }
      // flags override the params file
      HevParams base;
      if (!params_path.empty()) load_hev_params(params_path, base);
      if (hev->count("--r1")) base.r1 = hp.r1;
      if (hev->count("--gamma")) base.gamma = hp.gamma;
      if (hev->count("--ts")) base.Ts = hp.Ts;
      if (hev->count("--horizon")) base.horizon = hp.horizon;
      if (hev->count("--duration")) base.duration = hp.duration;
      std::vector<ProfilePoint> prof =
          profile_path.empty() ? synthetic_profile(base.duration + base.horizon * base.Ts, 0.5)
                               : read_profile_csv(profile_path);
      MpcTrace tr = mpc_run(base, prof, *v);
      write_text(hev_out, tr.to_csv());
      std::cerr << "steps=" << tr.steps.size() << " bound_violations=" << tr.bound_violations
                << " total_nodes=" << tr.total_nodes << " mean_root_gap_pct=" << tr.mean_root_gap
                << "\n";
      return tr.solved_steps == static_cast<int>(tr.steps.size()) ? kOk : kSolve;
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kIo;
  } catch (const DimensionError& e) {
    // bad generator ranges come from the command line
    std::cerr << "error: " << e.what() << "\n";
    return *gen ? kUsage : kSolve;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolve;
  }
  return kUsage;
}
