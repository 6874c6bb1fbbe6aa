#include "stratiwave/wavefield.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stratiwave/errors.hpp"
#include "stratiwave/manifest.hpp"
#include "stratiwave/vertical_modes.hpp"

namespace stratiwave {

namespace {

double amp_at(const Eigen::VectorXd& eta_hat, int j) {
    if (j < 1 || j > eta_hat.size()) return 0.0;
    return eta_hat[j - 1];
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Eigen::Vector3d mode_profile(const FluidStack& fs, const Tau& tau, const DualVector& k,
                             const Eigen::VectorXd& eta_hat, int j, double z) {
    if (j < 1 || j > fs.m())
        throw ConfigError("mode_profile: layer index out of range: " + std::to_string(j));
    if (eta_hat.size() != fs.n)
        throw ConfigError("mode_profile: amplitude vector must have one entry per interface");
    if (k.mag == 0.0) return Eigen::Vector3d::Zero();

    const double blo = beta(fs, tau, j - 1, k.gamma);
    const double bhi = beta(fs, tau, j, k.gamma);
    const double alo = amp_at(eta_hat, j - 1);
    const double ahi = amp_at(eta_hat, j);

    const double w3 = tau.r * k.mag *
                      (alo * blo * phi(fs, j, k.mag, z) + ahi * bhi * psi(fs, j, k.mag, z));
    const double w3p =
        tau.r * k.mag *
        (alo * blo * phi_prime(fs, j, k.mag, z) + ahi * bhi * psi_prime(fs, j, k.mag, z));
    const double cg = std::cos(k.gamma), sg = std::sin(k.gamma);
    const double aj = fs.alpha(j);
    const double w1 = (-cg * w3p - sg * aj * w3) / k.mag;
    const double w2 = (-sg * w3p + cg * aj * w3) / k.mag;
    return {w1, w2, w3};
}

ModeProfiles solve_mode(const FluidStack& fs, const Tau& tau, const DualVector& k,
                        const Eigen::VectorXd& eta_hat, int nz) {
    if (nz < 2) throw ConfigError("solve_mode: need at least two heights per layer");
    ModeProfiles mp;
    mp.k = k;
    mp.eta_hat = eta_hat;
    const int m = fs.m();
    mp.z.resize(static_cast<std::size_t>(m));
    mp.w1.resize(static_cast<std::size_t>(m));
    mp.w2.resize(static_cast<std::size_t>(m));
    mp.w3.resize(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        auto& z = mp.z[static_cast<std::size_t>(j - 1)];
        auto& w1 = mp.w1[static_cast<std::size_t>(j - 1)];
        auto& w2 = mp.w2[static_cast<std::size_t>(j - 1)];
        auto& w3 = mp.w3[static_cast<std::size_t>(j - 1)];
        z.resize(nz);
        w1.resize(nz);
        w2.resize(nz);
        w3.resize(nz);
        for (int iz = 0; iz < nz; ++iz) {
            const double zz =
                fs.d(j - 1) + fs.h(j) * static_cast<double>(iz) / (nz - 1);
            const Eigen::Vector3d w = mode_profile(fs, tau, k, eta_hat, j, zz);
            z[iz] = zz;
            w1[iz] = w.x();
            w2[iz] = w.y();
            w3[iz] = w.z();
        }
    }
    return mp;
}

double FirstOrderField::eta(int j, double x, double y) const {
    if (j <= 0 || j > fs.n) return 0.0;
    const Eigen::Vector2d xp(x, y);
    return t1 * eta1[j - 1] * std::cos(k1.v.dot(xp)) +
           t2 * eta2[j - 1] * std::cos(k2.v.dot(xp));
}

Eigen::Vector2d FirstOrderField::eta_gradient(int j, double x, double y) const {
    if (j <= 0 || j > fs.n) return Eigen::Vector2d::Zero();
    const Eigen::Vector2d xp(x, y);
    return -t1 * eta1[j - 1] * std::sin(k1.v.dot(xp)) * k1.v -
           t2 * eta2[j - 1] * std::sin(k2.v.dot(xp)) * k2.v;
}

Eigen::Vector3d FirstOrderField::velocity(int j, double x, double y, double z) const {
    const Eigen::Vector2d xp(x, y);
    Eigen::Vector3d u = trivial_velocity_unchecked(fs, tau, j, z);
    const double p1 = k1.v.dot(xp), p2 = k2.v.dot(xp);
    const Eigen::Vector3d w1 = mode_profile(fs, tau, k1, eta1, j, z);
    const Eigen::Vector3d w2 = mode_profile(fs, tau, k2, eta2, j, z);
    u.x() += t1 * w1.x() * std::cos(p1) + t2 * w2.x() * std::cos(p2);
    u.y() += t1 * w1.y() * std::cos(p1) + t2 * w2.y() * std::cos(p2);
    u.z() -= t1 * w1.z() * std::sin(p1) + t2 * w2.z() * std::sin(p2);
    return u;
}

double FirstOrderField::pressure(int j, double x, double y, double z) const {
    return bernoulli_pressure(fs, tau, j, velocity(j, x, y, z), z);
}

FirstOrderField first_order_field(const FluidStack& fs, const Lattice& lat,
                                  const BifurcationPoint& point, double t1, double t2) {
    FirstOrderField f;
    f.fs = fs;
    f.lat = lat;
    f.tau = point.tau_star;
    f.k1 = lat.k1();
    f.k2 = lat.k2();
    f.eta1 = point.eta1;
    f.eta2 = point.eta2;
    f.t1 = t1;
    f.t2 = t2;
    return f;
}

WaveFieldSample assemble_first_order(const FluidStack& fs, const Lattice& lat,
                                     const BifurcationPoint& point, double t1, double t2,
                                     int nx, int ny, int nz) {
    if (nx < 2 || ny < 2 || nz < 2)
        throw ConfigError("assemble_first_order: grid must be at least 2 in each direction");
    const FirstOrderField f = first_order_field(fs, lat, point, t1, t2);
    const int n = fs.n, m = fs.m();

    WaveFieldSample s;
    s.nx = nx;
    s.ny = ny;
    s.nz = nz;
    s.n = n;
    s.m = m;
    s.tau = point.tau_star;
    s.iota = point.iota + 1;
    s.kappa = point.kappa + 1;
    s.t1 = t1;
    s.t2 = t2;
    s.eta1 = point.eta1;
    s.eta2 = point.eta2;
    s.k1 = lat.k1();
    s.k2 = lat.k2();

    // Horizontal nodes of one lattice cell.
    Eigen::MatrixXd xs(ny, nx), ys(ny, nx);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const Eigen::Vector2d xp = (static_cast<double>(ix) / nx) * lat.lambda1 +
                                       (static_cast<double>(iy) / ny) * lat.lambda2;
            xs(iy, ix) = xp.x();
            ys(iy, ix) = xp.y();
        }

    s.eta_rows.resize(nx * ny, 2 + n);
    double max_slope = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int row = iy * nx + ix;
            s.eta_rows(row, 0) = xs(iy, ix);
            s.eta_rows(row, 1) = ys(iy, ix);
            for (int j = 1; j <= n; ++j) {
                s.eta_rows(row, 1 + j) = f.eta(j, xs(iy, ix), ys(iy, ix));
                max_slope =
                    std::max(max_slope, f.eta_gradient(j, xs(iy, ix), ys(iy, ix)).norm());
            }
        }
    s.max_slope = max_slope;
    if (max_slope > 0.3)
        s.warnings.push_back("maximal interface slope " + g17(max_slope) +
                             " exceeds 0.3: the first-order field is unreliable at this "
                             "amplitude");

    for (int j = 1; j <= m; ++j)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                const double lo = f.eta(j - 1, xs(iy, ix), ys(iy, ix));
                const double hi = f.eta(j, xs(iy, ix), ys(iy, ix));
                if (fs.h(j) + hi - lo <= 0.0)
                    throw NumericsError("displaced interfaces cross in layer " +
                                        std::to_string(j) +
                                        ": amplitudes (t1, t2) are too large");
            }

    // Cache the mode profiles at the sampling heights; only the horizontal
    // phases vary across a layer slice.
    const ModeProfiles mp1 = solve_mode(fs, point.tau_star, s.k1, point.eta1, nz);
    const ModeProfiles mp2 = solve_mode(fs, point.tau_star, s.k2, point.eta2, nz);

    s.volume_rows.resize(static_cast<Eigen::Index>(m) * nz * ny * nx, 8);
    Eigen::Index row = 0;
    for (int j = 1; j <= m; ++j) {
        const auto& z = mp1.z[static_cast<std::size_t>(j - 1)];
        for (int iz = 0; iz < nz; ++iz) {
            const Eigen::Vector3d w1(mp1.w1[static_cast<std::size_t>(j - 1)][iz],
                                     mp1.w2[static_cast<std::size_t>(j - 1)][iz],
                                     mp1.w3[static_cast<std::size_t>(j - 1)][iz]);
            const Eigen::Vector3d w2(mp2.w1[static_cast<std::size_t>(j - 1)][iz],
                                     mp2.w2[static_cast<std::size_t>(j - 1)][iz],
                                     mp2.w3[static_cast<std::size_t>(j - 1)][iz]);
            const Eigen::Vector3d ulam =
                trivial_velocity_unchecked(fs, point.tau_star, j, z[iz]);
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix, ++row) {
                    const Eigen::Vector2d xp(xs(iy, ix), ys(iy, ix));
                    const double p1 = s.k1.v.dot(xp), p2 = s.k2.v.dot(xp);
                    Eigen::Vector3d u = ulam;
                    u.x() += t1 * w1.x() * std::cos(p1) + t2 * w2.x() * std::cos(p2);
                    u.y() += t1 * w1.y() * std::cos(p1) + t2 * w2.y() * std::cos(p2);
                    u.z() -= t1 * w1.z() * std::sin(p1) + t2 * w2.z() * std::sin(p2);
                    s.volume_rows(row, 0) = xp.x();
                    s.volume_rows(row, 1) = xp.y();
                    s.volume_rows(row, 2) = z[iz];
                    s.volume_rows(row, 3) = j;
                    s.volume_rows(row, 4) = u.x();
                    s.volume_rows(row, 5) = u.y();
                    s.volume_rows(row, 6) = u.z();
                    s.volume_rows(row, 7) =
                        bernoulli_pressure(fs, point.tau_star, j, u, z[iz]);
                }
        }
    }
    return s;
}

void export_field(const WaveFieldSample& s, const std::string& out_dir,
                  const std::string& config_hash) {
    namespace fsys = std::filesystem;
    std::error_code ec;
    fsys::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    {
        std::ofstream eta(fsys::path(out_dir) / "eta.csv");
        if (!eta) throw IoError("cannot open " + out_dir + "/eta.csv for writing");
        eta << "x,y";
        for (int j = 1; j <= s.n; ++j) eta << ",eta_" << j;
        eta << "\n";
        for (Eigen::Index r = 0; r < s.eta_rows.rows(); ++r) {
            for (Eigen::Index c = 0; c < s.eta_rows.cols(); ++c)
                eta << (c ? "," : "") << g17(s.eta_rows(r, c));
            eta << "\n";
        }
    }
    {
        std::ofstream vol(fsys::path(out_dir) / "volume.csv");
        if (!vol) throw IoError("cannot open " + out_dir + "/volume.csv for writing");
        vol << "x,y,z,layer,u1,u2,u3,p\n";
        for (Eigen::Index r = 0; r < s.volume_rows.rows(); ++r) {
            for (Eigen::Index c = 0; c < s.volume_rows.cols(); ++c) {
                if (c) vol << ",";
                if (c == 3)
                    vol << static_cast<int>(s.volume_rows(r, c));
                else
                    vol << g17(s.volume_rows(r, c));
            }
            vol << "\n";
        }
    }
    {
        nlohmann::json meta;
        meta["tool_version"] = tool_version;
        if (!config_hash.empty()) meta["config_hash"] = config_hash;
        meta["tau_star"] = {{"r", s.tau.r}, {"theta", s.tau.theta}};
        meta["modes"] = {{"iota", s.iota}, {"kappa", s.kappa}};
        meta["amplitudes"] = {{"t1", s.t1}, {"t2", s.t2}};
        meta["k1"] = {s.k1.v.x(), s.k1.v.y()};
        meta["k2"] = {s.k2.v.x(), s.k2.v.y()};
        meta["eta_hat_1"] = std::vector<double>(s.eta1.data(), s.eta1.data() + s.eta1.size());
        meta["eta_hat_2"] = std::vector<double>(s.eta2.data(), s.eta2.data() + s.eta2.size());
        meta["normalization"] = "unit-norm-leading-positive";
        meta["grid"] = {{"nx", s.nx}, {"ny", s.ny}, {"nz", s.nz}};
        meta["fluid_layers"] = s.m;
        meta["interfaces"] = s.n;
        meta["max_slope"] = s.max_slope;
        meta["warnings"] = s.warnings;
        meta["heights"] = "flattened reference slabs; interface elevations are physical";
        std::ofstream mf(fsys::path(out_dir) / "metadata.json");
        if (!mf) throw IoError("cannot open " + out_dir + "/metadata.json for writing");
        mf << meta.dump(2) << "\n";
    }
}

} // namespace stratiwave
