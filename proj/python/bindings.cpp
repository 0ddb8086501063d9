#include <algorithm>
#include <cmath>
#include <random>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slip/config.hpp"
#include "slip/control.hpp"
#include "slip/error.hpp"
#include "slip/geometry.hpp"
#include "slip/objective.hpp"
#include "slip/slip.hpp"
#include "slip/subproblem.hpp"

namespace py = pybind11;

namespace {

using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

// numpy arrays are (ny, nx): row j holds cells j * nx .. j * nx + nx - 1
slip::GridSpec grid_of(const py::buffer_info& info, double lx, double ly) {
  if (info.ndim != 2) throw slip::UsageError("expected a 2-D array of shape (ny, nx)");
  return slip::GridSpec(static_cast<int>(info.shape[1]), static_cast<int>(info.shape[0]), lx, ly);
}

slip::ControlField to_control(const IntArray& a, const std::vector<int>& labels, double lx, double ly) {
  const auto info = a.request();
  const slip::GridSpec g = grid_of(info, lx, ly);
  const int* p = static_cast<const int*>(info.ptr);
  return slip::ControlField(g, slip::LabelSet(labels), std::vector<int>(p, p + g.num_cells()));
}

IntArray to_array(const slip::ControlField& v) {
  IntArray out({v.grid().ny(), v.grid().nx()});
  std::copy(v.values().begin(), v.values().end(), out.mutable_data());
  return out;
}

py::dict record_dict(const slip::IterationRecord& r) {
  py::dict d;
  d["outer"] = r.outer;
  d["inner"] = r.inner;
  d["delta"] = r.delta;
  d["pred"] = r.pred;
  d["ared"] = r.ared ? py::object(py::float_(*r.ared)) : py::object(py::none());
  d["accepted"] = r.accepted;
  d["j_value"] = r.j_value;
  d["f_value"] = r.f_value;
  d["tv_value"] = r.tv_value;
  d["subproblem_status"] = slip::to_string(r.subproblem_status);
  d["subproblem_nodes"] = r.subproblem_nodes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trust-region solver for TV-regularized integer control on rectangular grids";

  py::register_exception<slip::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<slip::UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<slip::NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def(
      "tv",
      [](const IntArray& v, std::vector<int> labels, double lx, double ly) {
        return slip::tv(to_control(v, labels, lx, ly));
      },
      py::arg("values"), py::arg("labels"), py::arg("lx") = 1.0, py::arg("ly") = 1.0);

  m.def(
      "pairwise_interfaces",
      [](const IntArray& v, std::vector<int> labels, double lx, double ly) {
        return slip::pairwise_interfaces(to_control(v, labels, lx, ly));
      },
      py::arg("values"), py::arg("labels"), py::arg("lx") = 1.0, py::arg("ly") = 1.0,
      "Interface measures keyed by 0-based label index pairs (i, j), i < j.");

  m.def(
      "level_set_perimeters",
      [](const IntArray& v, std::vector<int> labels) { return slip::level_set_perimeters(to_control(v, labels, 1, 1)); },
      py::arg("values"), py::arg("labels"));

  m.def(
      "solve_subproblem",
      [](const IntArray& vbar, const RealArray& c, std::vector<int> labels, double delta, double alpha,
         const std::string& solver, long node_limit) {
        const slip::ControlField v = to_control(vbar, labels, 1, 1);
        const auto info = c.request();
        if (grid_of(info, 1, 1) != v.grid()) throw slip::UsageError("c and vbar shapes differ");
        const double* p = static_cast<const double*>(info.ptr);
        const slip::TRInstance inst{v, slip::GradientField{v.grid(), std::vector<double>(p, p + v.grid().num_cells())},
                                    delta, alpha};
        if (solver != "exhaustive" && solver != "bnb") throw slip::UsageError("solver must be 'bnb' or 'exhaustive'");
        const slip::IPSolution sol = [&] {
          py::gil_scoped_release release;
          return solver == "exhaustive" ? slip::solve_exhaustive(inst)
                                        : slip::solve_bnb(inst, slip::BnbOptions{node_limit, 0});
        }();
        py::dict d;
        d["v"] = to_array(sol.v_opt);
        d["objective"] = sol.objective;
        d["status"] = slip::to_string(sol.status);
        d["nodes"] = sol.nodes;
        return d;
      },
      py::arg("vbar"), py::arg("c"), py::arg("labels"), py::arg("delta"), py::arg("alpha"),
      py::arg("solver") = "bnb", py::arg("node_limit") = 100000);

  m.def(
      "parse_config",
      [](const std::string& text) {
        const slip::ConfigParse parsed = slip::parse_config(text);
        py::dict d;
        d["valid"] = parsed.config.has_value();
        d["errors"] = parsed.errors;
        d["normalized"] = parsed.config ? py::object(py::str(slip::format_config(*parsed.config))) : py::none();
        return d;
      },
      py::arg("text"));

  m.def(
      "solve",
      [](const std::string& config_path) {
        const slip::RunConfig cfg = slip::load_config(config_path);
        const slip::Problem prob = slip::build_problem(cfg);
        const slip::ControlField v0 = slip::initial_control(cfg);
        const slip::SlipTrace tr = [&] {
          py::gil_scoped_release release;
          return slip::run(prob, v0, cfg.slip());
        }();
        py::list records;
        for (const auto& r : tr.records) records.append(record_dict(r));
        py::dict d;
        d["records"] = records;
        d["termination"] = slip::to_string(tr.reason);
        d["initial_j"] = slip::j_value(prob, v0);
        d["final_j"] = tr.final_j;
        d["final_f"] = tr.final_f;
        d["final_tv"] = tr.final_tv;
        d["final_control"] = to_array(tr.final_control);
        return d;
      },
      py::arg("config_path"));

  m.def(
      "iteration_record_json",
      [](const py::dict& r) {
        slip::IterationRecord rec;
        rec.outer = r["outer"].cast<int>();
        rec.inner = r["inner"].cast<int>();
        rec.delta = r["delta"].cast<double>();
        rec.pred = r["pred"].cast<double>();
        if (!r["ared"].is_none()) rec.ared = r["ared"].cast<double>();
        rec.accepted = r["accepted"].cast<bool>();
        rec.j_value = r["j_value"].cast<double>();
        rec.f_value = r["f_value"].cast<double>();
        rec.tv_value = r["tv_value"].cast<double>();
        rec.subproblem_status =
            r["subproblem_status"].cast<std::string>() == "optimal" ? slip::IPStatus::optimal : slip::IPStatus::node_limit;
        rec.subproblem_nodes = r["subproblem_nodes"].cast<long>();
        return slip::to_json(rec);
      },
      py::arg("record"));

  m.def(
      "check_gradient",
      [](const std::string& config_path, int grid, int samples, std::uint64_t seed) {
        slip::RunConfig cfg = slip::load_config(config_path);
        if (grid > 0) cfg.grid_nx = cfg.grid_ny = grid;
        const slip::Problem prob = slip::build_problem(cfg);
        const auto n = static_cast<std::size_t>(prob.control_grid().num_cells());
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1, 1);
        double worst = 0.0;
        for (int s = 0; s < samples; ++s) {
          std::vector<double> w(n), d(n);
          for (auto& x : w) x = cfg.labels[rng() % cfg.labels.size()];
          for (auto& x : d) x = u(rng);
          worst = std::max(worst, slip::check_gradient(*prob.smooth, w, d).best_relative_error);
        }
        return worst;
      },
      py::arg("config_path"), py::arg("grid") = 0, py::arg("samples") = 20, py::arg("seed") = 0,
      "Largest best-step relative error of central differences against the gradient.");

  m.def(
      "verify_fixture",
      [](const std::string& name, int resolution) {
        if (name != "disk" && name != "stripes") throw slip::UsageError("fixture must be 'disk' or 'stripes'");
        const auto fx = name == "disk" ? slip::disk_fixture() : slip::stripes_fixture();
        std::vector<slip::VerificationRow> rows;
        {
          py::gil_scoped_release release;
          rows = slip::verify_fixture(fx, resolution);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d;
          d["check"] = r.check;
          d["value"] = r.value;
          d["threshold"] = r.threshold;
          d["passed"] = r.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("fixture"), py::arg("resolution") = 512);

  m.def(
      "inverse_map_residual",
      [](double cx, double cy, double plateau, double outer, double t_fraction, double x, double y) {
        const auto phi = slip::radial_field({cx, cy}, plateau, outer);
        const double t = t_fraction / phi.lipschitz_bound;
        const slip::Point back = slip::forward_map(phi, t, slip::inverse_map(phi, t, {x, y}));
        return std::hypot(back.x - x, back.y - y);
      },
      py::arg("cx"), py::arg("cy"), py::arg("plateau"), py::arg("outer"), py::arg("t_fraction"), py::arg("x"),
      py::arg("y"), "Round-trip residual of the radial field's inverse map at t = t_fraction / L.");
}
