#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sps/asymptotics.hpp"
#include "sps/cli.hpp"
#include "sps/coulomb.hpp"
#include "sps/functionals.hpp"
#include "sps/io.hpp"
#include "sps/radial.hpp"
#include "sps/solver.hpp"

namespace py = pybind11;
using namespace sps;

namespace {

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

RadialFunction from_array(const GridPtr& grid, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1) throw std::invalid_argument("profile must be one-dimensional");
  return RadialFunction(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict residuals_dict(const Residuals& r) {
  py::dict d;
  d["nehari"] = r.nehari;
  d["pohozaev"] = r.pohozaev;
  d["manifold"] = r.manifold;
  d["ode_sup"] = r.ode_sup;
  return d;
}

SolverConfig make_config(int n, double r_max, double stretch, double tol, int max_iters) {
  SolverConfig cfg;
  cfg.grid = GridSpec{n, r_max, stretch};
  cfg.tol_residual = tol;
  cfg.max_iters = max_iters;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radial ground states of the Schrodinger-Poisson-Slater equation";
  m.attr("__version__") = version();

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
      .def(py::init([](int n, double r_max, double stretch) {
             return std::const_pointer_cast<RadialGrid>(make_grid(n, r_max, stretch));
           }),
           py::arg("n"), py::arg("r_max"), py::arg("stretch") = 1.0)
      .def_property_readonly("size", &RadialGrid::size)
      .def_property_readonly("r_max", &RadialGrid::r_max)
      .def_property_readonly("stretch", &RadialGrid::stretch)
      .def_property_readonly("nodes", [](const RadialGrid& g) { return to_array(g.nodes()); });

  py::class_<RadialFunction>(m, "RadialFunction")
      .def(py::init([](std::shared_ptr<RadialGrid> g, py::array_t<double> values) {
             return from_array(std::const_pointer_cast<const RadialGrid>(g), values);
           }),
           py::arg("grid"), py::arg("values"))
      .def_property_readonly("r", [](const RadialFunction& f) { return to_array(f.grid().nodes()); })
      .def_property_readonly("values", [](const RadialFunction& f) { return to_array(f.values()); })
      .def("max_abs", &RadialFunction::max_abs)
      .def("__len__", &RadialFunction::size);

  m.def("integrate", &integrate, "int_{R^3} f for a radial f");
  m.def("lp_power", &lp_power, py::arg("u"), py::arg("q"));
  m.def("coulomb_energy", py::overload_cast<const RadialFunction&>(&coulomb_energy));
  m.def("brute_force_coulomb", &brute_force_coulomb);
  m.def("potential", [](const RadialFunction& u) { return newtonian_potential(u).phi; });

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def(py::init([](double A, double B, double C, double D, double p) { return EnergyBreakdown{A, B, C, D, p}; }),
           py::arg("A"), py::arg("B"), py::arg("C"), py::arg("D"), py::arg("p") = 4.0)
      .def_readwrite("A", &EnergyBreakdown::A)
      .def_readwrite("B", &EnergyBreakdown::B)
      .def_readwrite("C", &EnergyBreakdown::C)
      .def_readwrite("D", &EnergyBreakdown::D)
      .def_readwrite("p", &EnergyBreakdown::p)
      .def("__repr__", [](const EnergyBreakdown& b) {
        std::ostringstream os;
        os << "EnergyBreakdown(A=" << b.A << ", B=" << b.B << ", C=" << b.C << ", D=" << b.D << ", p=" << b.p << ")";
        return os.str();
      });

  m.def("breakdown", &breakdown, py::arg("u"), py::arg("p"));
  m.def("energy", &energy, py::arg("bd"), py::arg("eps"));
  m.def("pohozaev_manifold", &pohozaev_manifold, py::arg("bd"), py::arg("eps"));
  m.def("nehari", &nehari, py::arg("bd"), py::arg("eps"));
  m.def("pohozaev_identity", &pohozaev_identity, py::arg("bd"), py::arg("eps"));
  m.def("dilate", &dilate, py::arg("bd"), py::arg("t"));
  m.def("fiber_energy", &fiber_energy, py::arg("bd"), py::arg("eps"), py::arg("t"));
  m.def("fiber_project", &fiber_project, py::arg("bd"), py::arg("eps"));
  m.def("manifold_energy", &manifold_energy, py::arg("bd"), py::arg("eps"), py::arg("tol") = 1e-8);
  m.def("m_functional", &m_functional);
  m.def("e_norm", &e_norm);

  py::class_<ProblemParams>(m, "ProblemParams")
      .def_static("from_eps", &ProblemParams::from_eps, py::arg("p"), py::arg("eps"))
      .def_static("from_lambda", &ProblemParams::from_lambda, py::arg("p"), py::arg("lambda_"))
      .def_readonly("p", &ProblemParams::p)
      .def_readonly("eps", &ProblemParams::eps)
      .def_readonly("lambda_", &ProblemParams::lambda)
      .def_readwrite("coupling", &ProblemParams::coupling);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init(&make_config), py::arg("n") = GridSpec{}.n, py::arg("r_max") = GridSpec{}.r_max,
           py::arg("stretch") = GridSpec{}.stretch, py::arg("tol") = SolverConfig{}.tol_residual,
           py::arg("max_iters") = SolverConfig{}.max_iters)
      .def_property_readonly("n", [](const SolverConfig& c) { return c.grid.n; })
      .def_property_readonly("r_max", [](const SolverConfig& c) { return c.grid.r_max; })
      .def_property_readonly("stretch", [](const SolverConfig& c) { return c.grid.stretch; })
      .def_readonly("tol", &SolverConfig::tol_residual)
      .def_readonly("max_iters", &SolverConfig::max_iters);

  py::class_<Solution>(m, "Solution")
      .def_readonly("params", &Solution::params)
      .def_readonly("u", &Solution::u)
      .def_readonly("phi", &Solution::phi)
      .def_readonly("bd", &Solution::bd)
      .def_readonly("m", &Solution::m)
      .def_readonly("iters", &Solution::iters)
      .def_readonly("converged", &Solution::converged)
      .def_readonly("min_m_functional", &Solution::min_m_functional)
      .def_readonly("energy_history", &Solution::energy_history)
      .def_property_readonly("residuals", [](const Solution& s) { return residuals_dict(s.residuals); })
      .def("save", [](const Solution& s, const std::string& path) { write_solution(path, s); })
      .def_static("load", [](const std::string& path) { return read_solution(path); });

  m.def(
      "ground_state",
      [](const ProblemParams& params, const SolverConfig& config) {
        py::gil_scoped_release release;
        return ground_state(params, config);
      },
      py::arg("params"), py::arg("config") = SolverConfig{});
  m.def(
      "scf_cross_check",
      [](const ProblemParams& params, const SolverConfig& config) {
        py::gil_scoped_release release;
        return scf_cross_check(params, config);
      },
      py::arg("params"), py::arg("config") = SolverConfig{});
  m.def(
      "verify",
      [](const Solution& sol, double tol) {
        const VerifyReport r = verify(sol, tol);
        py::dict d = residuals_dict(r.residuals);
        d["passed"] = r.passed;
        d["empty"] = r.empty;
        return d;
      },
      py::arg("solution"), py::arg("tol") = 1e-6);
  m.def("sup_distance", &sup_distance);

  m.def("eps_of_lambda", &eps_of_lambda, py::arg("lambda_"), py::arg("p"));
  m.def("lambda_of_eps", &lambda_of_eps, py::arg("eps"), py::arg("p"));
  m.def("decay_rate", &decay_rate);
  m.def("e_distance", [](const RadialFunction& v, const RadialFunction& w) { return e_distance(v, w).value; });

  m.def(
      "sweep",
      [](double p, std::vector<double> eps_list, const SolverConfig& config) {
        SweepReport rep;
        {
          py::gil_scoped_release release;
          rep = sweep(p, eps_list, config);
        }
        py::list rows;
        for (const SweepRow& r : rep.rows) {
          py::dict d;
          d["eps"] = r.eps;
          d["m_eps"] = r.m_eps;
          d["gap"] = r.gap;
          d["eps_times_B"] = r.eps_times_B;
          d["t_proj"] = r.t_proj;
          d["e_dist"] = r.e_dist;
          d["decay_rate"] = r.decay_rate;
          d["converged"] = r.converged;
          rows.append(d);
        }
        py::dict out;
        out["rows"] = rows;
        out["m_inf"] = rep.m_inf;
        out["slope"] = rep.slope;
        out["eta"] = rep.eta;
        out["passed"] = rep.checks.all();
        return out;
      },
      py::arg("p"), py::arg("eps_list"), py::arg("config") = SolverConfig{});

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one sps_lab command in process; returns (exit_code, stdout, stderr).");
}
