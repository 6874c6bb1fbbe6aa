#include "stratiwave/serialize.hpp"

#include "stratiwave/errors.hpp"
#include "stratiwave/manifest.hpp"

namespace stratiwave {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    const auto vals = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                             static_cast<Eigen::Index>(vals.size()));
}

nlohmann::json fluid_to_json(const FluidStack& fs) {
    nlohmann::json j;
    j["n"] = fs.n;
    j["g"] = fs.g;
    std::vector<double> rho, alpha, d, sigma;
    for (int i = 1; i <= fs.n + 1; ++i) {
        rho.push_back(fs.rho(i));
        alpha.push_back(fs.alpha(i));
        d.push_back(fs.d(i));
    }
    for (int i = 1; i <= fs.n; ++i) sigma.push_back(fs.sigma(i));
    j["rho"] = rho;
    j["alpha"] = alpha;
    j["d"] = d;
    j["sigma"] = sigma;
    return j;
}

} // namespace

nlohmann::json point_to_json(const BifurcationPoint& p) {
    nlohmann::json j;
    j["r_star"] = p.tau_star.r;
    j["theta_star"] = p.tau_star.theta;
    j["iota"] = p.iota + 1;
    j["kappa"] = p.kappa + 1;
    j["mu"] = p.mu;
    j["eta_hat_1"] = vec_to_json(p.eta1);
    j["eta_hat_2"] = vec_to_json(p.eta2);
    j["nu"] = {{p.nu(0, 0), p.nu(0, 1)}, {p.nu(1, 0), p.nu(1, 1)}};
    j["kernel_ok"] = p.kernel_ok;
    j["canonical"] = p.canonical;
    return j;
}

BifurcationPoint point_from_json(const nlohmann::json& j) {
    BifurcationPoint p;
    try {
        p.tau_star = Tau{j.at("r_star").get<double>(), j.at("theta_star").get<double>()};
        p.iota = j.at("iota").get<int>() - 1;
        p.kappa = j.at("kappa").get<int>() - 1;
        p.mu = j.at("mu").get<double>();
        p.eta1 = vec_from_json(j.at("eta_hat_1"));
        p.eta2 = vec_from_json(j.at("eta_hat_2"));
        const auto& nu = j.at("nu");
        p.nu << nu.at(0).at(0).get<double>(), nu.at(0).at(1).get<double>(),
            nu.at(1).at(0).get<double>(), nu.at(1).at(1).get<double>();
        p.kernel_ok = j.value("kernel_ok", true);
        p.canonical = j.value("canonical", true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed bifurcation point record: ") + e.what());
    }
    if (p.iota < 0 || p.kappa < 0 || p.eta1.size() == 0 ||
        p.eta1.size() != p.eta2.size() || !(p.tau_star.r > 0.0))
        throw ConfigError("malformed bifurcation point record: inconsistent fields");
    return p;
}

nlohmann::json report_to_json(const VerificationReport& r) {
    nlohmann::json j;
    j["kernel"] = {{"dim1", r.kernel.dim1},
                   {"dim2", r.kernel.dim2},
                   {"res1", r.kernel.res1},
                   {"res2", r.kernel.res2},
                   {"ok", r.kernel.ok}};
    j["transversality"] = {
        {"det_nu", r.transversality.det_nu}, {"tol", r.transversality.tol},
        {"ok", r.transversality.ok}};
    nlohmann::json viols = nlohmann::json::array();
    for (const DetViolation& v : r.isolation.violations)
        viols.push_back({{"m1", v.m1},
                         {"m2", v.m2},
                         {"kmag", v.kmag},
                         {"det", v.det},
                         {"scale", v.scale}});
    j["isolation"] = {{"k_max", r.isolation.k_max},
                      {"certified", r.isolation.certified},
                      {"scanned", r.isolation.scanned},
                      {"min_margin", r.isolation.min_margin},
                      {"violations", viols},
                      {"ok", r.isolation.ok}};
    j["lattice"] = {{"symmetric", r.lattice.symmetric},
                    {"nondegenerate", r.lattice.nondegenerate}};
    j["ok"] = r.ok;
    return j;
}

nlohmann::json two_layer_to_json(const TwoLayerReport& r) {
    nlohmann::json j;
    j["applicable"] = r.applicable;
    j["p1"] = r.p1;
    j["p2"] = r.p2;
    j["vorticity_flux"] = r.dvort;
    j["angle_diff"] = r.angle_diff;
    j["gamma2"] = r.gamma2;
    j["cond_flux"] = r.cond_flux;
    j["cond_angle"] = r.cond_angle;
    j["alternative"] = r.alternative;
    j["ok"] = r.ok;
    return j;
}

nlohmann::json pipeline_to_json(const PipelineResult& res, const FluidStack& fs,
                                const Lattice& lat) {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["fluid"] = fluid_to_json(fs);
    j["lattice"] = {{"lambda1", {lat.lambda1.x(), lat.lambda1.y()}},
                    {"lambda2", {lat.lambda2.x(), lat.lambda2.y()}},
                    {"k1", {lat.k1().v.x(), lat.k1().v.y()}},
                    {"k2", {lat.k2().v.x(), lat.k2().v.y()}},
                    {"gamma2", lat.gamma2()},
                    {"cell_area", lat.cell_area}};

    nlohmann::json pts = nlohmann::json::array();
    for (const PipelinePoint& pp : res.points) {
        nlohmann::json e;
        e["point"] = point_to_json(pp.point);
        e["verification"] = report_to_json(pp.report);
        if (pp.rescued) {
            nlohmann::json resc;
            resc["q"] = pp.rescue_q;
            if (pp.rescued_fluid) resc["fluid"] = fluid_to_json(*pp.rescued_fluid);
            if (pp.rescued_point) resc["point"] = point_to_json(*pp.rescued_point);
            if (pp.rescued_report) resc["verification"] = report_to_json(*pp.rescued_report);
            e["rescue"] = resc;
        }
        pts.push_back(e);
    }
    j["points"] = pts;

    nlohmann::json rej = nlohmann::json::array();
    for (const Rejection& r : res.rejections)
        rej.push_back({{"iota", r.iota + 1},
                       {"kappa", r.kappa + 1},
                       {"theta_lo", r.theta_lo},
                       {"theta_hi", r.theta_hi},
                       {"reason", r.reason}});
    j["rejections"] = rej;
    return j;
}

} // namespace stratiwave
