#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hcpcut/bench.hpp"
#include "hcpcut/bnb.hpp"
#include "hcpcut/cuts.hpp"
#include "hcpcut/hev.hpp"
#include "hcpcut/instance_io.hpp"

namespace py = pybind11;
using namespace hcpcut;

namespace {

Variant variant_of(const std::string& s) {
  auto v = parse_variant(s);
  if (!v) throw py::value_error("unknown variant '" + s + "' (miqp | wc-g)");
  return *v;
}

py::dict report_dict(const BnbReport& r) {
  py::dict d;
  d["variant"] = to_string(r.variant);
  d["status"] = to_string(r.status);
  d["incumbent"] = r.incumbent;
  d["best_bound"] = r.best_bound;
  d["root_bound"] = r.root_bound;
  d["root_bound_plain"] = r.root_bound_plain;
  d["root_gap_pct"] = r.root_gap_pct;
  d["nodes"] = r.nodes;
  d["root_rounds"] = r.root_rounds;
  d["cuts_added"] = r.cuts_added();
  d["fixed_periods"] = r.fixed_periods;
  d["time_s"] = r.time_s;
  d["values"] = r.values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hcpcut, m) {
  m.doc() = "cut generation and branch-and-bound for hybrid control problems";

  // translators run newest first, so the catch-all goes in before the subclasses
  static py::exception<Error> base(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      base(e.what());
    }
  });
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  py::class_<HcpInstance>(m, "Instance")
      .def_readonly("n", &HcpInstance::n)
      .def_readonly("dx", &HcpInstance::dx)
      .def_readonly("dy", &HcpInstance::dy)
      .def_readonly("dz", &HcpInstance::dz)
      .def_readonly("mode_exactly_one", &HcpInstance::mode_exactly_one)
      .def_static("from_json", &parse_instance, py::arg("text"))
      .def("to_json", &serialize_instance)
      .def_static("read", &read_instance_file, py::arg("path"))
      .def("write", [](const HcpInstance& in, const std::string& path) { write_instance_file(path, in); },
           py::arg("path"))
      .def("__repr__", [](const HcpInstance& in) {
        return "<Instance n=" + std::to_string(in.n) + " dx=" + std::to_string(in.dx) +
               " dy=" + std::to_string(in.dy) + " dz=" + std::to_string(in.dz) + ">";
      });

  m.def(
      "generate",
      [](int n, int dx, int dy, std::uint64_t seed, int index, double g, double h, bool require_feasible) {
        SyntheticConfig c;
        c.n = n;
        c.dx = dx;
        c.dy = dy;
        c.g = g;
        c.h = h;
        c.require_feasible = require_feasible;
        return generate_synthetic(c, stream_seed(seed, dx, dy, index));
      },
      py::arg("n") = 10, py::arg("dx") = 1, py::arg("dy") = 1, py::arg("seed") = 1, py::arg("index") = 0,
      py::arg("g") = -2.3, py::arg("h") = 2.3, py::arg("require_feasible") = true);

  m.def(
      "solve",
      [](const HcpInstance& in, const std::string& variant, int root_cut_rounds, int node_cut_rounds,
         double gap_tol, double time_limit) {
        SolveConfig c;
        c.variant = variant_of(variant);
        c.root_cut_rounds = root_cut_rounds;
        c.node_cut_rounds = node_cut_rounds;
        c.gap_tol = gap_tol;
        c.time_limit = time_limit;
        BnbReport r;
        {
          py::gil_scoped_release nogil;
          r = solve_miqp(in, c);
        }
        return report_dict(r);
      },
      py::arg("instance"), py::arg("variant") = "wc-g", py::arg("root_cut_rounds") = 50,
      py::arg("node_cut_rounds") = 0, py::arg("gap_tol") = 1e-6, py::arg("time_limit") = 3600.0);

  m.def(
      "enumerate_best",
      [](const HcpInstance& in) {
        EnumResult e = enumerate_patterns(in);
        return py::make_tuple(e.best, e.best_z, e.feasible_patterns);
      },
      py::arg("instance"), "brute force over all indicator patterns: (best, z, feasible count)");

  m.def(
      "tau",
      [](const Vec& x2, const Vec& lo, const Vec& hi, const Vec& q) {
        auto [t, s] = tau_closed_form(x2, lo, hi, q);
        return py::make_tuple(t, s);
      },
      py::arg("x2"), py::arg("lo"), py::arg("hi"), py::arg("q"));

  m.def(
      "benchmark",
      [](const std::vector<std::pair<int, int>>& cells, const std::vector<std::uint64_t>& seeds,
         const std::vector<std::string>& variants, int n, int threads) {
        BenchConfig c;
        c.cells = cells;
        c.seeds = seeds;
        for (const auto& v : variants) c.variants.push_back(variant_of(v));
        c.n = n;
        c.threads = threads;
        py::gil_scoped_release nogil;
        return run_benchmark(c);
      },
      py::arg("cells"), py::arg("seeds"), py::arg("variants") = std::vector<std::string>{"miqp", "wc-g"},
      py::arg("n") = 10, py::arg("threads") = 1, "CSV text, same layout as the CLI");

  m.def(
      "hev_sim",
      [](const std::string& variant, double r1, double gamma, double ts, int horizon, double duration) {
        HevParams p;
        p.r1 = r1;
        p.gamma = gamma;
        p.Ts = ts;
        p.horizon = horizon;
        p.duration = duration;
        check_params(p);
        Variant v = variant_of(variant);
        MpcTrace tr;
        {
          py::gil_scoped_release nogil;
          tr = mpc_run(p, synthetic_profile(p.duration + p.horizon * p.Ts, 0.5), v);
        }
        py::dict d;
        d["steps"] = tr.steps.size();
        d["solved_steps"] = tr.solved_steps;
        d["bound_violations"] = tr.bound_violations;
        d["total_nodes"] = tr.total_nodes;
        d["mean_root_gap"] = tr.mean_root_gap;
        d["final_soc"] = tr.final_state.soc;
        d["csv"] = tr.to_csv();
        return d;
      },
      py::arg("variant") = "wc-g", py::arg("r1") = 1.0, py::arg("gamma") = 0.0, py::arg("ts") = 1.0,
      py::arg("horizon") = 20, py::arg("duration") = 100.0);
}
