// Python bindings for the core operations: configuration, vertical modes,
// dispersion matrices, bifurcation search + verification, continuation,
// wavefield reconstruction, and the finite-dimensional reduction engine.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include <stratiwave/bifurcation.hpp>
#include <stratiwave/config.hpp>
#include <stratiwave/dispersion.hpp>
#include <stratiwave/errors.hpp>
#include <stratiwave/lyapunov_schmidt.hpp>
#include <stratiwave/manifest.hpp>
#include <stratiwave/serialize.hpp>
#include <stratiwave/trivial_flow.hpp>
#include <stratiwave/vertical_modes.hpp>
#include <stratiwave/wavefield.hpp>

#include <optional>

namespace py = pybind11;
using namespace stratiwave;

namespace {

// Structured results keep the exact shapes of the file formats; converting
// through the JSON layer guarantees that.
py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict resonance_to_py(const NonResonanceReport& r) {
    const auto hits = [](const std::vector<ResonanceHit>& v) {
        py::list out;
        for (const ResonanceHit& h : v) {
            py::dict d;
            d["layer"] = h.layer;
            d["m1"] = h.m1;
            d["m2"] = h.m2;
            d["kmag"] = h.kmag;
            d["t"] = h.t;
            d["nearest"] = h.nearest;
            d["distance"] = h.distance;
            out.append(d);
        }
        return out;
    };
    py::dict d;
    d["ok"] = r.ok;
    d["violations"] = hits(r.violations);
    d["warnings"] = hits(r.warnings);
    return d;
}

BifurcationProblem make_problem(const BifurcationProblem::Map& F,
                                const Eigen::VectorXd& c_star,
                                const Eigen::MatrixXd& kernel,
                                const Eigen::MatrixXd& cokernel) {
    BifurcationProblem pb;
    pb.F = F;
    pb.c_star = c_star;
    pb.kernel = kernel;
    pb.cokernel = cokernel;
    return pb;
}

} // namespace

PYBIND11_MODULE(_stratiwave, m) {
    m.doc() = "stratified gravity-capillary wave toolkit";
    m.attr("__version__") = tool_version;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ResonanceError>(m, "ResonanceError", PyExc_RuntimeError);
    py::register_exception<NumericsError>(m, "NumericsError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // ---- parameters ---------------------------------------------------------
    py::class_<Tau>(m, "Tau")
        .def(py::init([](double r, double theta) { return Tau{r, theta}; }),
             py::arg("r"), py::arg("theta"))
        .def_readwrite("r", &Tau::r)
        .def_readwrite("theta", &Tau::theta)
        .def("__repr__", [](const Tau& t) {
            return "Tau(r=" + std::to_string(t.r) + ", theta=" + std::to_string(t.theta) + ")";
        });

    py::class_<DualVector>(m, "DualVector")
        .def_readonly("v", &DualVector::v)
        .def_readonly("mag", &DualVector::mag)
        .def_readonly("gamma", &DualVector::gamma)
        .def_readonly("m1", &DualVector::m1)
        .def_readonly("m2", &DualVector::m2);

    py::class_<FluidStack>(m, "FluidStack")
        .def(py::init<>())
        .def_readwrite("n", &FluidStack::n)
        .def_readwrite("g", &FluidStack::g)
        .def_readwrite("rho", &FluidStack::rho_)
        .def_readwrite("alpha", &FluidStack::alpha_)
        .def_readwrite("d", &FluidStack::d_)
        .def_readwrite("sigma", &FluidStack::sigma_)
        .def("m", &FluidStack::m)
        .def("h", &FluidStack::h, py::arg("j"))
        .def("validate", &FluidStack::validate);

    py::class_<Lattice>(m, "Lattice")
        .def_static("from_generators", &Lattice::from_generators, py::arg("lambda1"),
                    py::arg("lambda2"))
        .def_readonly("lambda1", &Lattice::lambda1)
        .def_readonly("lambda2", &Lattice::lambda2)
        .def_readonly("cell_area", &Lattice::cell_area)
        .def("k1", &Lattice::k1)
        .def("k2", &Lattice::k2)
        .def("gamma2", &Lattice::gamma2)
        .def("dual", &Lattice::dual, py::arg("m1"), py::arg("m2"));

    py::class_<Config>(m, "Config")
        .def_readonly("fluid", &Config::fluid)
        .def_readonly("lattice", &Config::lattice);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("dual_lattice_points", &dual_lattice_points, py::arg("lattice"),
          py::arg("radius"));
    m.def(
        "check_non_resonance",
        [](const FluidStack& fs, const Lattice& lat, double radius_factor) {
            return resonance_to_py(check_non_resonance(fs, lat, radius_factor));
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("radius_factor") = 1.0);

    // ---- laminar flow and vertical modes ------------------------------------
    m.def("trivial_velocity", &trivial_velocity, py::arg("fluid"), py::arg("tau"),
          py::arg("j"), py::arg("z"));
    m.def("beta", &beta, py::arg("fluid"), py::arg("tau"), py::arg("j"),
          py::arg("gamma"));
    m.def("beta_perp", &beta_perp, py::arg("fluid"), py::arg("tau"), py::arg("j"),
          py::arg("gamma"));
    m.def("psi", &psi, py::arg("fluid"), py::arg("j"), py::arg("kmag"), py::arg("z"));
    m.def("psi_prime", &psi_prime, py::arg("fluid"), py::arg("j"), py::arg("kmag"),
          py::arg("z"));
    m.def("phi", &phi, py::arg("fluid"), py::arg("j"), py::arg("kmag"), py::arg("z"));
    m.def("phi_prime", &phi_prime, py::arg("fluid"), py::arg("j"), py::arg("kmag"),
          py::arg("z"));

    // ---- dispersion matrices -------------------------------------------------
    m.def(
        "assemble_dense",
        [](const FluidStack& fs, const Lattice& lat, const Tau& tau, const DualVector& k) {
            return assemble(fs, lat, tau, k).dense();
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("tau"), py::arg("k"));
    m.def(
        "assemble_parts",
        [](const FluidStack& fs, const Lattice& lat, const Tau& tau, const DualVector& k) {
            const DispersionMatrix A = assemble(fs, lat, tau, k);
            py::dict d;
            d["dense"] = A.dense();
            d["sigma_diag"] = A.sigma_diag;
            d["b_dense"] = A.b_dense();
            d["c_diag"] = A.c_diag;
            d["s_diag"] = A.s_diag;
            d["d_diag"] = A.d_diag;
            return d;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("tau"), py::arg("k"));
    m.def("assemble_R", &assemble_R, py::arg("fluid"), py::arg("lattice"),
          py::arg("theta"), py::arg("k"));
    m.def(
        "kernel",
        [](const FluidStack& fs, const Lattice& lat, const Tau& tau, const DualVector& k,
           double tol) {
            const KernelResult kr = kernel(assemble(fs, lat, tau, k), tol);
            py::dict d;
            d["dim"] = kr.dim;
            d["basis"] = kr.basis;
            d["residuals"] = kr.residuals;
            return d;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("tau"), py::arg("k"),
        py::arg("tol") = -1.0);
    m.def("dA_dr", &dA_dr, py::arg("fluid"), py::arg("lattice"), py::arg("tau"),
          py::arg("k"));
    m.def("dA_dtheta", &dA_dtheta, py::arg("fluid"), py::arg("lattice"), py::arg("tau"),
          py::arg("k"));

    // ---- bifurcation points ----------------------------------------------------
    py::class_<BifurcationPoint>(m, "BifurcationPoint")
        .def_readonly("tau_star", &BifurcationPoint::tau_star)
        .def_readonly("iota", &BifurcationPoint::iota)
        .def_readonly("kappa", &BifurcationPoint::kappa)
        .def_readonly("mu", &BifurcationPoint::mu)
        .def_readonly("eta1", &BifurcationPoint::eta1)
        .def_readonly("eta2", &BifurcationPoint::eta2)
        .def_readonly("nu", &BifurcationPoint::nu)
        .def_readonly("kernel_ok", &BifurcationPoint::kernel_ok)
        .def_readonly("canonical", &BifurcationPoint::canonical)
        .def("as_dict",
             [](const BifurcationPoint& p) { return json_to_py(point_to_json(p)); });

    m.def(
        "scan_eigencurves",
        [](const FluidStack& fs, const Lattice& lat, int grid) {
            const EigencurveScan s = scan_eigencurves(fs, lat, grid);
            py::list crossings;
            for (const auto& br : s.crossings) {
                py::dict b;
                b["iota"] = br.iota;
                b["kappa"] = br.kappa;
                b["seg"] = br.seg;
                b["theta_lo"] = br.theta_lo;
                b["theta_hi"] = br.theta_hi;
                crossings.append(b);
            }
            py::dict d;
            d["theta"] = s.theta;
            d["mu1"] = s.mu1;
            d["mu2"] = s.mu2;
            d["crossings"] = crossings;
            return d;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("grid") = 2048);
    m.def(
        "make_point",
        [](const FluidStack& fs, const Lattice& lat, double theta_star, int iota,
           int kappa) { return make_point(fs, lat, theta_star, iota, kappa); },
        py::arg("fluid"), py::arg("lattice"), py::arg("theta_star"), py::arg("iota"),
        py::arg("kappa"));
    m.def("compute_nu", &compute_nu, py::arg("fluid"), py::arg("lattice"),
          py::arg("tau"), py::arg("k1"), py::arg("k2"), py::arg("eta1"),
          py::arg("eta2"));
    m.def(
        "verify_point",
        [](const FluidStack& fs, const Lattice& lat, const BifurcationPoint& p) {
            return json_to_py(report_to_json(verify_point(fs, lat, p)));
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("point"));
    m.def(
        "check_two_layer_conditions",
        [](const FluidStack& fs, const Lattice& lat) {
            return json_to_py(two_layer_to_json(check_two_layer_conditions(fs, lat)));
        },
        py::arg("fluid"), py::arg("lattice"));
    m.def(
        "sigma_rescue",
        [](const FluidStack& fs, const Lattice& lat, const BifurcationPoint& p,
           std::optional<double> q) {
            const SigmaRescueResult r = sigma_rescue(fs, lat, p, q);
            py::dict d;
            d["found"] = r.found;
            d["q"] = r.q;
            d["fluid"] = r.fluid;
            d["point"] = r.point;
            d["report"] = json_to_py(report_to_json(r.report));
            return d;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("point"),
        py::arg("q") = std::nullopt);
    m.def(
        "continue_alpha",
        [](const FluidStack& fs, const Lattice& lat, const BifurcationPoint& p,
           const std::vector<double>& target, int steps) {
            const ContinuationResult r = continue_alpha(fs, lat, p, target, steps);
            py::dict d;
            d["ok"] = r.ok;
            d["achieved_fraction"] = r.achieved_fraction;
            d["message"] = r.message;
            d["fluid"] = r.fluid;
            d["point"] = r.point;
            d["report"] = json_to_py(report_to_json(r.report));
            return d;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("point"), py::arg("target"),
        py::arg("steps") = 8);
    m.def(
        "find_bifurcation_points",
        [](const FluidStack& fs, const Lattice& lat, int grid, bool rescue) {
            PipelineOptions opts;
            opts.grid = grid;
            opts.rescue = rescue;
            return json_to_py(pipeline_to_json(find_bifurcation_points(fs, lat, opts),
                                               fs, lat));
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("grid") = 2048,
        py::arg("rescue") = false);
    m.def(
        "bifurcation_points",
        [](const FluidStack& fs, const Lattice& lat, int grid) {
            PipelineOptions opts;
            opts.grid = grid;
            std::vector<BifurcationPoint> out;
            for (const PipelinePoint& pp : find_bifurcation_points(fs, lat, opts).points)
                out.push_back(pp.point);
            return out;
        },
        py::arg("fluid"), py::arg("lattice"), py::arg("grid") = 2048,
        "Accepted bifurcation points as objects (for wavefield assembly).");

    // ---- wavefields ------------------------------------------------------------
    m.def("mode_profile", &mode_profile, py::arg("fluid"), py::arg("tau"), py::arg("k"),
          py::arg("eta_hat"), py::arg("j"), py::arg("z"));
    m.def(
        "solve_mode",
        [](const FluidStack& fs, const Tau& tau, const DualVector& k,
           const Eigen::VectorXd& eta_hat, int nz) {
            const ModeProfiles mp = solve_mode(fs, tau, k, eta_hat, nz);
            py::dict d;
            d["eta_hat"] = mp.eta_hat;
            d["z"] = mp.z;
            d["w1"] = mp.w1;
            d["w2"] = mp.w2;
            d["w3"] = mp.w3;
            return d;
        },
        py::arg("fluid"), py::arg("tau"), py::arg("k"), py::arg("eta_hat"),
        py::arg("nz") = 33);

    py::class_<FirstOrderField>(m, "FirstOrderField")
        .def_readonly("tau", &FirstOrderField::tau)
        .def_readonly("t1", &FirstOrderField::t1)
        .def_readonly("t2", &FirstOrderField::t2)
        .def("eta", &FirstOrderField::eta, py::arg("j"), py::arg("x"), py::arg("y"))
        .def("eta_gradient", &FirstOrderField::eta_gradient, py::arg("j"), py::arg("x"),
             py::arg("y"))
        .def("velocity", &FirstOrderField::velocity, py::arg("j"), py::arg("x"),
             py::arg("y"), py::arg("z"))
        .def("pressure", &FirstOrderField::pressure, py::arg("j"), py::arg("x"),
             py::arg("y"), py::arg("z"));
    m.def("first_order_field", &first_order_field, py::arg("fluid"), py::arg("lattice"),
          py::arg("point"), py::arg("t1"), py::arg("t2"));

    py::class_<WaveFieldSample>(m, "WaveFieldSample")
        .def_readonly("nx", &WaveFieldSample::nx)
        .def_readonly("ny", &WaveFieldSample::ny)
        .def_readonly("nz", &WaveFieldSample::nz)
        .def_readonly("n", &WaveFieldSample::n)
        .def_readonly("m", &WaveFieldSample::m)
        .def_readonly("tau", &WaveFieldSample::tau)
        .def_readonly("iota", &WaveFieldSample::iota)
        .def_readonly("kappa", &WaveFieldSample::kappa)
        .def_readonly("t1", &WaveFieldSample::t1)
        .def_readonly("t2", &WaveFieldSample::t2)
        .def_readonly("eta1", &WaveFieldSample::eta1)
        .def_readonly("eta2", &WaveFieldSample::eta2)
        .def_readonly("max_slope", &WaveFieldSample::max_slope)
        .def_readonly("warnings", &WaveFieldSample::warnings)
        .def_readonly("eta_rows", &WaveFieldSample::eta_rows)
        .def_readonly("volume_rows", &WaveFieldSample::volume_rows);
    m.def("assemble_first_order", &assemble_first_order, py::arg("fluid"),
          py::arg("lattice"), py::arg("point"), py::arg("t1"), py::arg("t2"),
          py::arg("nx") = 64, py::arg("ny") = 64, py::arg("nz") = 33);
    m.def("export_field", &export_field, py::arg("sample"), py::arg("out_dir"),
          py::arg("config_hash") = "");

    // ---- reduction engine --------------------------------------------------------
    m.def(
        "ls_validate_problem",
        [](const BifurcationProblem::Map& F, const Eigen::VectorXd& c_star,
           const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& cokernel) {
            const ProblemCheck c = validate_problem(make_problem(F, c_star, kernel, cokernel));
            py::dict d;
            d["trivial_residual"] = c.trivial_residual;
            d["kernel_residual"] = c.kernel_residual;
            d["cokernel_residual"] = c.cokernel_residual;
            d["ok"] = c.ok;
            return d;
        },
        py::arg("F"), py::arg("c_star"), py::arg("kernel"), py::arg("cokernel"));
    m.def(
        "ls_reduce",
        [](const BifurcationProblem::Map& F, const Eigen::VectorXd& c_star,
           const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& cokernel,
           const Eigen::VectorXd& s, const Eigen::VectorXd& c) {
            return reduce(make_problem(F, c_star, kernel, cokernel), s, c);
        },
        py::arg("F"), py::arg("c_star"), py::arg("kernel"), py::arg("cokernel"),
        py::arg("s"), py::arg("c"));
    m.def(
        "ls_nu_matrix",
        [](const BifurcationProblem::Map& F, const Eigen::VectorXd& c_star,
           const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& cokernel) {
            return nu_matrix(make_problem(F, c_star, kernel, cokernel));
        },
        py::arg("F"), py::arg("c_star"), py::arg("kernel"), py::arg("cokernel"));
    m.def(
        "ls_solve_branch",
        [](const BifurcationProblem::Map& F, const Eigen::VectorXd& c_star,
           const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& cokernel,
           const Eigen::VectorXd& s) {
            const BranchPoint bp = solve_branch(make_problem(F, c_star, kernel, cokernel), s);
            py::dict d;
            d["s"] = bp.s;
            d["c"] = bp.c;
            d["x"] = bp.x;
            d["residual"] = bp.residual;
            d["iterations"] = bp.iterations;
            d["nu_condition"] = bp.nu_condition;
            return d;
        },
        py::arg("F"), py::arg("c_star"), py::arg("kernel"), py::arg("cokernel"),
        py::arg("s"));

    // ---- hashing / manifests -----------------------------------------------------
    m.def("fnv1a64_hex", &fnv1a64_hex, py::arg("data"));
    m.def("file_hash", &file_hash, py::arg("path"));
}
