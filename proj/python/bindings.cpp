#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chemostokes/operators.hpp"
#include "chemostokes/orchestrate.hpp"

namespace py = pybind11;
using namespace chemostokes;

namespace {

py::array_t<double> scalar_to_numpy(const ScalarField& f) {
    py::array_t<double> out({f.ny, f.nx});
    auto r = out.mutable_unchecked<2>();
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) r(j, i) = f.at(i, j);
    return out;
}

ScalarField scalar_from_numpy(const GridSpec& g, py::array_t<double> a, ScalarBc bc) {
    if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx)
        throw ContractError("from_numpy: array must have shape (ny, nx)");
    ScalarField f(g, bc);
    auto r = a.unchecked<2>();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.at(i, j) = r(j, i);
    return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "2-D chemotaxis-Stokes finite-difference simulator and verification harness";

    py::register_exception<ContractError>(m, "ContractError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<SolverError>(m, "SolverError");
    py::register_exception<NumericalError>(m, "NumericalError");
    py::register_exception<BlowupError>(m, "BlowupError");
    py::register_exception<IoError>(m, "IoError");

    py::enum_<ScalarBc>(m, "ScalarBc")
        .value("Neumann", ScalarBc::Neumann)
        .value("Dirichlet", ScalarBc::Dirichlet);

    py::class_<GridSpec>(m, "GridSpec")
        .def_static("make", &GridSpec::make, py::arg("nx"), py::arg("ny"), py::arg("h"))
        .def_static("from_extent", &GridSpec::from_extent, py::arg("Lx"), py::arg("Ly"),
                    py::arg("nx"), py::arg("ny"))
        .def_static("unit_square", &GridSpec::unit_square, py::arg("n"))
        .def_readonly("nx", &GridSpec::nx)
        .def_readonly("ny", &GridSpec::ny)
        .def_readonly("h", &GridSpec::h)
        .def_readonly("Lx", &GridSpec::Lx)
        .def_readonly("Ly", &GridSpec::Ly)
        .def("is_boundary_cell", &GridSpec::is_boundary_cell)
        .def("__repr__", [](const GridSpec& g) {
            return "GridSpec(nx=" + std::to_string(g.nx) + ", ny=" + std::to_string(g.ny) +
                   ", h=" + std::to_string(g.h) + ")";
        });

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init<const GridSpec&, ScalarBc, double>(), py::arg("grid"), py::arg("bc"),
             py::arg("fill") = 0.0)
        .def_static("from_numpy", &scalar_from_numpy, py::arg("grid"), py::arg("values"),
                    py::arg("bc") = ScalarBc::Neumann)
        .def("to_numpy", &scalar_to_numpy)
        .def_readonly("nx", &ScalarField::nx)
        .def_readonly("ny", &ScalarField::ny)
        .def_readonly("bc", &ScalarField::bc)
        .def("min", &ScalarField::min_value)
        .def("max", &ScalarField::max_value);

    py::class_<VectorField>(m, "VectorField")
        .def(py::init<const GridSpec&, bool>(), py::arg("grid"), py::arg("no_slip") = true)
        .def_readonly("nx", &VectorField::nx)
        .def_readonly("ny", &VectorField::ny)
        .def_readonly("no_slip", &VectorField::no_slip)
        .def("x_to_numpy",
             [](const VectorField& v) {
                 py::array_t<double> out({v.ny, v.nx + 1});
                 auto r = out.mutable_unchecked<2>();
                 for (int j = 0; j < v.ny; ++j)
                     for (int i = 0; i <= v.nx; ++i) r(j, i) = v.ux(i, j);
                 return out;
             })
        .def("y_to_numpy",
             [](const VectorField& v) {
                 py::array_t<double> out({v.ny + 1, v.nx});
                 auto r = out.mutable_unchecked<2>();
                 for (int j = 0; j <= v.ny; ++j)
                     for (int i = 0; i < v.nx; ++i) r(j, i) = v.uy(i, j);
                 return out;
             })
        .def("max_abs", &VectorField::max_abs);

    m.def("sample_cells",
          [](const GridSpec& g, ScalarBc bc, const std::function<double(double, double)>& f) {
              return sample_cells(g, bc, f);
          });
    m.def("sample_dirichlet",
          [](const GridSpec& g, const std::function<double(double, double)>& f) {
              return sample_dirichlet(g, f);
          });

    // Discrete operators.
    m.def("laplacian", &laplacian, py::arg("f"), py::arg("grid"));
    m.def("grad_to_faces", &grad_to_faces, py::arg("f"), py::arg("grid"));
    m.def("divergence", &divergence, py::arg("v"), py::arg("grid"));
    m.def("integrate", &integrate, py::arg("f"), py::arg("grid"));
    m.def(
        "poisson_neumann",
        [](const ScalarField& rhs, const GridSpec& g, double tol) {
            const PoissonResult r = poisson_neumann(rhs, g, tol);
            return py::make_tuple(r.q, r.compatibility_shift, r.rel_residual);
        },
        py::arg("rhs"), py::arg("grid"), py::arg("tol") = 1e-10,
        "Returns (q, compatibility_shift, rel_residual)");
    m.def(
        "project",
        [](const VectorField& v, const GridSpec& g, double dt, double tol) {
            return project(v, g, dt, tol);
        },
        py::arg("v"), py::arg("grid"), py::arg("dt") = 1.0, py::arg("tol") = 1e-10);

    // Regularization family.
    m.def("smoothstep", &smoothstep);
    m.def("build_cutoff", &build_cutoff, py::arg("grid"), py::arg("epsilon"));
    m.def("f_eps", &f_eps, py::arg("s"), py::arg("epsilon"));
    m.def("g_eps", &g_eps, py::arg("s"), py::arg("epsilon"));

    // Simulation surface.
    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init<>())
        .def_readwrite("kappa", &PhysicalParams::kappa)
        .def_readwrite("mu", &PhysicalParams::mu)
        .def_readwrite("phi", &PhysicalParams::phi)
        .def_readwrite("c_star", &PhysicalParams::c_star);

    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init<>())
        .def_readwrite("cfl_sigma", &SchemeConfig::cfl_sigma)
        .def_readwrite("dt_max", &SchemeConfig::dt_max)
        .def_readwrite("projection_tol", &SchemeConfig::projection_tol)
        .def_readwrite("n_max_abort", &SchemeConfig::n_max_abort)
        .def_readwrite("dt_min_abort", &SchemeConfig::dt_min_abort)
        .def_readwrite("T", &SchemeConfig::T);

    py::class_<FunctionalRecord>(m, "FunctionalRecord")
        .def_readonly("t", &FunctionalRecord::t)
        .def_readonly("mass", &FunctionalRecord::mass)
        .def_readonly("l2n_sq", &FunctionalRecord::l2n_sq)
        .def_readonly("c_max", &FunctionalRecord::c_max)
        .def_readonly("c_min", &FunctionalRecord::c_min)
        .def_readonly("grad_c_l2_sq", &FunctionalRecord::grad_c_l2_sq)
        .def_readonly("lap_c_l2_sq", &FunctionalRecord::lap_c_l2_sq)
        .def_readonly("grad_c_l4", &FunctionalRecord::grad_c_l4)
        .def_readonly("kinetic", &FunctionalRecord::kinetic)
        .def_readonly("grad_u_l2_sq", &FunctionalRecord::grad_u_l2_sq)
        .def_readonly("u_l6", &FunctionalRecord::u_l6)
        .def_readonly("entropy", &FunctionalRecord::entropy)
        .def_readonly("fisher", &FunctionalRecord::fisher)
        .def_readonly("n2_log", &FunctionalRecord::n2_log)
        .def_readonly("grad_n_43", &FunctionalRecord::grad_n_43)
        .def_readonly("theta", &FunctionalRecord::theta)
        .def_readonly("chat_boundary_max", &FunctionalRecord::chat_boundary_max)
        .def_readonly("clipped_mass_cum", &FunctionalRecord::clipped_mass_cum)
        .def_readonly("u_forcing", &FunctionalRecord::u_forcing)
        .def("csv_row", &FunctionalRecord::csv_row);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("kappa", &RunConfig::kappa)
        .def_readwrite("mu", &RunConfig::mu)
        .def_readonly("epsilons", &RunConfig::epsilons)
        .def_readwrite("scheme", &RunConfig::scheme)
        .def_property_readonly("grid", [](const RunConfig& c) { return c.grid; });

    m.def("default_config", &default_config);
    m.def("load_config", [](const std::string& p) { return load_config(p); }, py::arg("path"));
    m.def("dump_config", &dump_config, py::arg("config"));
    m.def(
        "apply_override",
        [](RunConfig& cfg, const std::string& kv) { apply_override(cfg, kv); },
        py::arg("config"), py::arg("key_eq_value"));

    m.def(
        "simulate",
        [](const RunConfig& cfg, double epsilon, const std::string& out_dir) {
            const double eps = epsilon > 0.0 ? epsilon : cfg.epsilon();
            const bool write = !out_dir.empty();
            const RunArtifacts art =
                run_single(cfg, eps, out_dir.empty() ? "." : out_dir, write, false);
            py::dict out;
            out["epsilon"] = art.epsilon;
            out["records"] = art.records;
            out["aborted"] = art.aborted;
            out["abort_reason"] = art.abort_reason;
            out["dt"] = art.dt;
            py::list verdicts;
            for (const CheckVerdict& v : art.verdicts)
                verdicts.append(py::make_tuple(v.check_id, v.verdict, v.metric, v.threshold));
            out["verdicts"] = verdicts;
            return out;
        },
        py::arg("config"), py::arg("epsilon") = -1.0, py::arg("out_dir") = std::string(),
        "Runs one simulation; returns records, verdicts, and abort state.");

    m.def(
        "ode_comparison_check",
        [](const std::vector<double>& t, const std::vector<double>& y,
           const std::vector<double>& h, double a, double c, double tol) {
            const OdeComparisonResult r = ode_comparison_check(t, y, h, a, c, tol);
            const char* verdict = r.verdict == OdeVerdict::Pass ? "PASS"
                                  : r.verdict == OdeVerdict::Fail ? "FAIL"
                                                                  : "HYPOTHESIS-FAIL";
            return py::make_tuple(verdict, r.first_violation, r.worst_margin, r.bound);
        },
        py::arg("t"), py::arg("y"), py::arg("h"), py::arg("a"), py::arg("c"), py::arg("tol"));
}
