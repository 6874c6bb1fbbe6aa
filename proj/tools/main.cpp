// Command-line front end: configuration validation, eigencurve scans,
// bifurcation-point search with assumption verification, swirl continuation,
// first-order wavefield export, and a reduction-engine demo.
//
// Exit codes: 0 success, 1 validation/usage failure, 2 numerical failure,
// 3 I/O failure.  Every file-producing command also writes a run manifest;
// existing outputs are never overwritten unless --force is given.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <stratiwave/bifurcation.hpp>
#include <stratiwave/config.hpp>
#include <stratiwave/dispersion.hpp>
#include <stratiwave/errors.hpp>
#include <stratiwave/lyapunov_schmidt.hpp>
#include <stratiwave/manifest.hpp>
#include <stratiwave/serialize.hpp>
#include <stratiwave/wavefield.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fsys = std::filesystem;
using nlohmann::json;
using namespace stratiwave;

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void refuse_overwrite(const std::string& path, bool force) {
    if (!force && fsys::exists(path))
        throw IoError("refusing to overwrite " + path + " (use --force)");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
}

// One manifest per command invocation, listing every produced file.
void emit_manifest(const std::string& manifest_path, const std::string& config_hash,
                   const std::string& command, const json& params,
                   const std::vector<std::string>& outputs, bool force) {
    refuse_overwrite(manifest_path, force);
    RunManifest m;
    m.config_hash = config_hash;
    m.command = command;
    m.parameters = &params;
    m.outputs = outputs;
    write_manifest(m, manifest_path);
}

json fluid_to_json(const FluidStack& fs) {
    return json{{"n", fs.n},         {"g", fs.g},       {"rho", fs.rho_},
                {"alpha", fs.alpha_}, {"d", fs.d_},      {"sigma", fs.sigma_}};
}

json hit_to_json(const ResonanceHit& h) {
    return json{{"layer", h.layer},     {"m1", h.m1},
                {"m2", h.m2},           {"kmag", h.kmag},
                {"t", h.t},             {"nearest", h.nearest},
                {"distance", h.distance}};
}

// ----------------------------------------------------------------- validate

int cmd_validate(const std::string& config_path, const std::string& out,
                 bool force) {
    json report;
    report["checks"] = json::array();
    bool ok = true;

    Config cfg;
    try {
        cfg = load_config(config_path);
        report["checks"].push_back(
            {{"name", "parameters"}, {"ok", true}, {"detail", "all invariants hold"}});
    } catch (const ConfigError& e) {
        ok = false;
        report["checks"].push_back(
            {{"name", "parameters"}, {"ok", false}, {"detail", e.what()}});
    }

    if (ok) {
        const NonResonanceReport nr = check_non_resonance(cfg.fluid, cfg.lattice);
        json entry{{"name", "non_resonance"}, {"ok", nr.ok}};
        entry["violations"] = json::array();
        for (const ResonanceHit& h : nr.violations) entry["violations"].push_back(hit_to_json(h));
        entry["warnings"] = json::array();
        for (const ResonanceHit& h : nr.warnings) entry["warnings"].push_back(hit_to_json(h));
        report["checks"].push_back(entry);
        ok = ok && nr.ok;
        report["fluid"] = fluid_to_json(cfg.fluid);
    }
    report["ok"] = ok;

    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        refuse_overwrite(out, force);
        write_text(out, text);
        emit_manifest(out + ".manifest.json", file_hash(config_path), "validate",
                      json::object(), {out}, force);
    }
    return ok ? 0 : 1;
}

// --------------------------------------------------------------------- scan

int cmd_scan(const std::string& config_path, int grid, const std::string& out,
             bool force) {
    const Config cfg = load_config(config_path);
    const EigencurveScan s = scan_eigencurves(cfg.fluid, cfg.lattice, grid);

    refuse_overwrite(out, force);
    std::ostringstream csv;
    csv << "theta";
    for (int i = 1; i <= s.n; ++i) csv << ",mu_" << i << "_k1";
    for (int i = 1; i <= s.n; ++i) csv << ",mu_" << i << "_k2";
    csv << "\n";
    for (std::size_t l = 0; l < s.theta.size(); ++l) {
        const auto row = static_cast<Eigen::Index>(l);
        csv << g17(s.theta[l]);
        for (int i = 0; i < s.n; ++i) csv << "," << g17(s.mu1(row, i));
        for (int i = 0; i < s.n; ++i) csv << "," << g17(s.mu2(row, i));
        csv << "\n";
    }
    write_text(out, csv.str());
    emit_manifest(out + ".manifest.json", file_hash(config_path), "scan",
                  json{{"grid", grid}}, {out}, force);
    return 0;
}

// ---------------------------------------------------------------- bifurcate

int cmd_bifurcate(const std::string& config_path, int grid, bool rescue,
                  const std::string& out, bool force) {
    const Config cfg = load_config(config_path);
    PipelineOptions opts;
    opts.grid = grid;
    opts.rescue = rescue;
    const PipelineResult res = find_bifurcation_points(cfg.fluid, cfg.lattice, opts);

    refuse_overwrite(out, force);
    write_text(out, pipeline_to_json(res, cfg.fluid, cfg.lattice).dump(2) + "\n");
    emit_manifest(out + ".manifest.json", file_hash(config_path), "bifurcate",
                  json{{"grid", grid}, {"rescue", rescue}}, {out}, force);

    std::cout << "accepted " << res.points.size() << " point(s), rejected "
              << res.rejections.size() << " crossing(s)\n";
    return 0;
}

// ---------------------------------------------------------------- wavefield

int cmd_wavefield(const std::string& config_path, const std::string& points_path,
                  int idx, double t1, double t2, int nx, int ny, int nz,
                  const std::string& out_dir, bool force) {
    const Config cfg = load_config(config_path);

    std::ifstream in(points_path);
    if (!in) throw IoError("cannot read " + points_path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed points file: ") + e.what());
    }
    if (!doc.contains("points") || !doc["points"].is_array())
        throw ConfigError("points file has no points array");
    const auto& arr = doc["points"];
    if (idx < 0 || idx >= static_cast<int>(arr.size()))
        throw ConfigError("point index " + std::to_string(idx) + " out of range (have " +
                          std::to_string(arr.size()) + ")");
    const json& entry = arr.at(static_cast<std::size_t>(idx));
    const BifurcationPoint pt = point_from_json(entry.at("point"));
    const bool verified = entry.contains("verification") &&
                          entry["verification"].value("ok", false);
    if (!verified && !force)
        throw ConfigError("point " + std::to_string(idx) +
                          " is not fully verified; use --force to render anyway");

    for (const char* name : {"eta.csv", "volume.csv", "metadata.json"})
        refuse_overwrite((fsys::path(out_dir) / name).string(), force);

    const WaveFieldSample sample =
        assemble_first_order(cfg.fluid, cfg.lattice, pt, t1, t2, nx, ny, nz);
    const std::string config_hash = file_hash(config_path);
    export_field(sample, out_dir, config_hash);
    const json params{{"points", points_path}, {"point", idx}, {"t1", t1},
                      {"t2", t2},              {"nx", nx},     {"ny", ny},
                      {"nz", nz}};
    emit_manifest((fsys::path(out_dir) / "manifest.json").string(), config_hash,
                  "wavefield", params,
                  {(fsys::path(out_dir) / "eta.csv").string(),
                   (fsys::path(out_dir) / "volume.csv").string(),
                   (fsys::path(out_dir) / "metadata.json").string()},
                  force);
    for (const std::string& w : sample.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

// ----------------------------------------------------------- continue-alpha

int cmd_continue_alpha(const std::string& config_path, std::vector<double> target,
                       int steps, int idx, int grid, const std::string& out,
                       bool force) {
    const Config cfg = load_config(config_path);
    if (static_cast<int>(target.size()) != cfg.fluid.n + 1)
        throw ConfigError("target swirl list must have " +
                          std::to_string(cfg.fluid.n + 1) + " entries");

    PipelineOptions opts;
    opts.grid = grid;
    const PipelineResult res = find_bifurcation_points(cfg.fluid, cfg.lattice, opts);
    if (idx < 0 || idx >= static_cast<int>(res.points.size()))
        throw ConfigError("point index " + std::to_string(idx) + " out of range (have " +
                          std::to_string(res.points.size()) + ")");
    const ContinuationResult cr = continue_alpha(cfg.fluid, cfg.lattice,
                                                 res.points[static_cast<std::size_t>(idx)].point,
                                                 target, steps);

    json doc{{"ok", cr.ok},
             {"achieved_fraction", cr.achieved_fraction},
             {"message", cr.message},
             {"fluid", fluid_to_json(cr.fluid)},
             {"point", point_to_json(cr.point)},
             {"verification", report_to_json(cr.report)}};
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        refuse_overwrite(out, force);
        write_text(out, text);
        const json params{{"target", target}, {"steps", steps}, {"point", idx},
                          {"grid", grid}};
        emit_manifest(out + ".manifest.json", file_hash(config_path), "continue-alpha",
                      params, {out}, force);
    }
    if (!cr.ok) {
        std::cerr << "continuation stalled at fraction " << cr.achieved_fraction << ": "
                  << cr.message << "\n";
        return 2;
    }
    return 0;
}

// ------------------------------------------------------------------- lsdemo

int cmd_lsdemo(const std::string& out, bool force) {
    struct Demo {
        std::string name;
        bool pass;
        double error;
    };
    std::vector<Demo> demos;

    // decoupled pitchfork: branches c_i = c_i* + s_i^2
    {
        BifurcationProblem pb;
        const Eigen::Vector2d c_star(0.3, -0.7);
        pb.c_star = c_star;
        pb.kernel = Eigen::Matrix2d::Identity();
        pb.cokernel = Eigen::Matrix2d::Identity();
        pb.F = [c_star](const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
            Eigen::VectorXd f(2);
            for (int i = 0; i < 2; ++i)
                f(i) = (c(i) - c_star(i)) * x(i) - x(i) * x(i) * x(i);
            return f;
        };
        const ProblemCheck chk = validate_problem(pb);
        const Eigen::Vector2d s(0.05, 0.12);
        const BranchPoint bp = solve_branch(pb, s);
        double err = 0.0;
        for (int i = 0; i < 2; ++i)
            err = std::max(err, std::abs(bp.c(i) - (c_star(i) + s(i) * s(i))));
        demos.push_back({"decoupled pitchfork", chk.ok && err < 1e-10, err});
    }

    // coupled pitchfork: closed-form parameter shifts with cross terms
    {
        const double a = 0.25, b = -0.4;
        BifurcationProblem pb;
        const Eigen::Vector2d c_star(0.1, 0.45);
        pb.c_star = c_star;
        pb.kernel = Eigen::Matrix2d::Identity();
        pb.cokernel = Eigen::Matrix2d::Identity();
        pb.F = [=](const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
            Eigen::VectorXd f(2);
            f(0) = (c(0) - c_star(0)) * x(0) - (1.0 - a) * x(0) * x(0) * x(0) +
                   a * x(0) * x(1) * x(1);
            f(1) = (c(1) - c_star(1)) * x(1) - (1.0 - b) * x(1) * x(1) * x(1) +
                   b * x(1) * x(0) * x(0);
            return f;
        };
        const Eigen::Vector2d s(0.05, 0.08);
        const BranchPoint bp = solve_branch(pb, s);
        const double want0 = c_star(0) + (1.0 - a) * s(0) * s(0) - a * s(1) * s(1);
        const double want1 = c_star(1) + (1.0 - b) * s(1) * s(1) - b * s(0) * s(0);
        const double err = std::max(std::abs(bp.c(0) - want0), std::abs(bp.c(1) - want1));
        demos.push_back({"coupled pitchfork", err < 1e-8, err});
    }

    // slaved complement variable: x3 = -s1^2 recovered by the reduction
    {
        BifurcationProblem pb;
        const Eigen::Vector2d c_star(0.3, -0.7);
        pb.c_star = c_star;
        pb.kernel = Eigen::MatrixXd::Zero(3, 2);
        pb.kernel(0, 0) = 1.0;
        pb.kernel(1, 1) = 1.0;
        pb.cokernel = pb.kernel;
        pb.F = [c_star](const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
            Eigen::VectorXd f(3);
            f(0) = (c(0) - c_star(0)) * x(0) - x(0) * x(0) * x(0);
            f(1) = (c(1) - c_star(1)) * x(1) - x(1) * x(1) * x(1);
            f(2) = x(2) + x(0) * x(0);
            return f;
        };
        const Eigen::Vector2d s(0.07, -0.04);
        const Eigen::VectorXd xt = reduce(pb, s, pb.c_star);
        const double err = std::abs(xt(2) + s(0) * s(0));
        demos.push_back({"slaved complement", err < 1e-10, err});
    }

    json results = json::array();
    int failures = 0;
    for (const Demo& d : demos) {
        std::printf("[%s] %s (error %.2e)\n", d.pass ? "PASS" : "FAIL", d.name.c_str(),
                    d.error);
        if (!d.pass) ++failures;
        results.push_back({{"name", d.name}, {"pass", d.pass}, {"error", d.error}});
    }
    if (!out.empty()) {
        refuse_overwrite(out, force);
        write_text(out, json{{"demos", results}, {"ok", failures == 0}}.dump(2) + "\n");
        emit_manifest(out + ".manifest.json", fnv1a64_hex(""), "lsdemo", json::object(),
                      {out}, force);
    }
    return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stratified gravity-capillary wave toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    // validate
    std::string v_config, v_out;
    bool v_force = false;
    CLI::App* validate = app.add_subcommand("validate", "check a configuration file");
    validate->add_option("config", v_config, "configuration JSON")->required();
    validate->add_option("--out", v_out, "write the JSON report to this file");
    validate->add_flag("--force", v_force, "overwrite existing outputs");
    validate->callback([&] { rc = cmd_validate(v_config, v_out, v_force); });

    // scan
    std::string s_config, s_out = "curves.csv";
    int s_grid = 2048;
    bool s_force = false;
    CLI::App* scan = app.add_subcommand("scan", "tabulate eigencurves over theta");
    scan->add_option("config", s_config, "configuration JSON")->required();
    scan->add_option("--grid", s_grid, "number of theta samples")->check(CLI::PositiveNumber);
    scan->add_option("--out", s_out, "output CSV path");
    scan->add_flag("--force", s_force, "overwrite existing outputs");
    scan->callback([&] { rc = cmd_scan(s_config, s_grid, s_out, s_force); });

    // bifurcate
    std::string b_config, b_out = "points.json";
    int b_grid = 2048;
    bool b_rescue = false, b_force = false;
    CLI::App* bifurcate =
        app.add_subcommand("bifurcate", "locate and verify bifurcation points");
    bifurcate->add_option("config", b_config, "configuration JSON")->required();
    bifurcate->add_option("--grid", b_grid, "theta scan resolution")->check(CLI::PositiveNumber);
    bifurcate->add_option("--out", b_out, "output JSON path");
    bifurcate->add_flag("--rescue", b_rescue,
                        "attempt a tension rescaling when isolation fails");
    bifurcate->add_flag("--force", b_force, "overwrite existing outputs");
    bifurcate->callback(
        [&] { rc = cmd_bifurcate(b_config, b_grid, b_rescue, b_out, b_force); });

    // wavefield
    std::string w_config, w_points = "points.json", w_out = "field";
    int w_idx = 0, w_nx = 64, w_ny = 64, w_nz = 33;
    double w_t1 = 0.01, w_t2 = 0.01;
    bool w_force = false;
    CLI::App* wavefield =
        app.add_subcommand("wavefield", "export a first-order wavefield");
    wavefield->add_option("config", w_config, "configuration JSON")->required();
    wavefield->add_option("--points", w_points, "bifurcate output to read");
    wavefield->add_option("--point", w_idx, "index into the accepted points");
    wavefield->add_option("--t1", w_t1, "amplitude along the first wavevector");
    wavefield->add_option("--t2", w_t2, "amplitude along the second wavevector");
    wavefield->add_option("--nx", w_nx, "horizontal samples along lambda1")->check(CLI::PositiveNumber);
    wavefield->add_option("--ny", w_ny, "horizontal samples along lambda2")->check(CLI::PositiveNumber);
    wavefield->add_option("--nz", w_nz, "vertical samples per layer")->check(CLI::PositiveNumber);
    wavefield->add_option("--out", w_out, "output directory");
    wavefield->add_flag("--force", w_force,
                        "overwrite outputs and render unverified points");
    wavefield->callback([&] {
        rc = cmd_wavefield(w_config, w_points, w_idx, w_t1, w_t2, w_nx, w_ny, w_nz,
                           w_out, w_force);
    });

    // continue-alpha
    std::string c_config, c_out;
    std::vector<double> c_target;
    int c_steps = 8, c_idx = 0, c_grid = 2048;
    bool c_force = false;
    CLI::App* cont = app.add_subcommand(
        "continue-alpha", "continue a vortex-free point toward a swirl target");
    cont->add_option("config", c_config, "configuration JSON")->required();
    cont->add_option("--target", c_target, "comma-separated swirl parameters")
        ->required()
        ->delimiter(',');
    cont->add_option("--steps", c_steps, "continuation steps")->check(CLI::PositiveNumber);
    cont->add_option("--point", c_idx, "index into the accepted points");
    cont->add_option("--grid", c_grid, "theta scan resolution")->check(CLI::PositiveNumber);
    cont->add_option("--out", c_out, "write the JSON result to this file");
    cont->add_flag("--force", c_force, "overwrite existing outputs");
    cont->callback([&] {
        rc = cmd_continue_alpha(c_config, c_target, c_steps, c_idx, c_grid, c_out,
                                c_force);
    });

    // lsdemo
    std::string l_out;
    bool l_force = false;
    CLI::App* lsdemo =
        app.add_subcommand("lsdemo", "run the reduction engine on toy problems");
    lsdemo->add_option("--out", l_out, "write the JSON results to this file");
    lsdemo->add_flag("--force", l_force, "overwrite existing outputs");
    lsdemo->callback([&] { rc = cmd_lsdemo(l_out, l_force); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ResonanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
