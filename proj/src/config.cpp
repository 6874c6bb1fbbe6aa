#include "stratiwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stratiwave {

using nlohmann::json;

void FluidStack::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1, got " + std::to_string(n));
    if (!(g > 0.0)) throw ConfigError("g must be > 0");
    auto expect_size = [&](const std::vector<double>& v, size_t sz, const char* name) {
        if (v.size() != sz)
            throw ConfigError(std::string(name) + " must have length " + std::to_string(sz) +
                              ", got " + std::to_string(v.size()));
    };
    expect_size(rho_, size_t(n) + 1, "rho");
    expect_size(alpha_, size_t(n) + 1, "alpha");
    expect_size(d_, size_t(n) + 1, "d");
    expect_size(sigma_, size_t(n), "sigma");

    for (int j = 1; j <= n; ++j)
        if (!(rho(j) > rho(j + 1)))
            throw ConfigError("rho must be strictly decreasing: rho_" + std::to_string(j) +
                              " <= rho_" + std::to_string(j + 1));
    if (rho_.back() < 0.0) throw ConfigError("rho_{n+1} must be >= 0");
    for (int j = 0; j <= n; ++j)
        if (!(d(j) < d(j + 1)))
            throw ConfigError("d must be strictly increasing: d_" + std::to_string(j) +
                              " >= d_" + std::to_string(j + 1));
    for (int j = 1; j <= n; ++j)
        if (!(sigma(j) > 0.0))
            throw ConfigError("sigma_" + std::to_string(j) + " must be > 0");
    for (double a : alpha_)
        if (!std::isfinite(a)) throw ConfigError("alpha entries must be finite");
}

static DualVector make_dual(const Eigen::Vector2d& v, int m1, int m2) {
    DualVector d;
    d.v = v;
    d.mag = v.norm();
    d.gamma = std::atan2(v.y(), v.x());
    d.m1 = m1;
    d.m2 = m2;
    return d;
}

Lattice Lattice::from_generators(const Eigen::Vector2d& l1, const Eigen::Vector2d& l2) {
    const double det = l1.x() * l2.y() - l1.y() * l2.x();
    if (std::abs(det) < 1e-14 * std::max(l1.norm() * l2.norm(), 1e-300))
        throw ConfigError("lattice generators are linearly dependent");

    // dual basis: columns of 2*pi*(L^{-1})^T for L = [lambda1 lambda2]
    const double two_pi = 2.0 * M_PI;
    Eigen::Vector2d k1(two_pi * l2.y() / det, -two_pi * l2.x() / det);
    Eigen::Vector2d k2(-two_pi * l1.y() / det, two_pi * l1.x() / det);

    // rotate so k1 lies along +x, then reflect so k2 has positive y
    const double rot = -std::atan2(k1.y(), k1.x());
    Eigen::Rotation2D<double> R(rot);
    Eigen::Vector2d L1 = R * l1, L2 = R * l2, K1 = R * k1, K2 = R * k2;
    bool refl = K2.y() < 0.0;
    if (std::abs(K2.y()) < 1e-14 * K2.norm())
        throw ConfigError("dual generators are collinear");
    if (refl) {
        L1.y() = -L1.y();
        L2.y() = -L2.y();
        K1.y() = -K1.y();
        K2.y() = -K2.y();
    }
    K1.y() = 0.0;  // exact canonical frame

    Lattice lat;
    lat.lambda1 = L1;
    lat.lambda2 = L2;
    lat.k1_ = make_dual(K1, 1, 0);
    lat.k1_.gamma = 0.0;
    lat.k2_ = make_dual(K2, 0, 1);
    lat.cell_area = std::abs(L1.x() * L2.y() - L1.y() * L2.x());
    lat.rotation = rot;
    lat.reflected = refl;
    return lat;
}

DualVector Lattice::dual(int m1, int m2) const {
    return make_dual(double(m1) * k1_.v + double(m2) * k2_.v, m1, m2);
}

static std::vector<double> parse_array(const json& j, const char* name, size_t expected) {
    if (!j.contains(name)) throw ConfigError(std::string("missing field: ") + name);
    const auto& a = j.at(name);
    if (!a.is_array() || a.size() != expected)
        throw ConfigError(std::string(name) + " must be an array of length " +
                          std::to_string(expected));
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& x : a) {
        if (!x.is_number()) throw ConfigError(std::string(name) + " entries must be numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.contains("n") || !j.at("n").is_number_integer())
        throw ConfigError("missing or non-integer field: n");
    const int n = j.at("n").get<int>();
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!j.contains("g") || !j.at("g").is_number()) throw ConfigError("missing field: g");

    FluidStack fs;
    fs.n = n;
    fs.g = j.at("g").get<double>();
    fs.rho_ = parse_array(j, "rho", size_t(n) + 1);
    fs.alpha_ = parse_array(j, "alpha", size_t(n) + 1);
    fs.d_ = parse_array(j, "d", size_t(n) + 1);
    fs.sigma_ = parse_array(j, "sigma", size_t(n));
    fs.validate();

    if (!j.contains("lattice") || !j.at("lattice").is_object())
        throw ConfigError("missing object field: lattice");
    const auto& jl = j.at("lattice");
    auto l1 = parse_array(jl, "lambda1", 2);
    auto l2 = parse_array(jl, "lambda2", 2);
    Lattice lat = Lattice::from_generators(Eigen::Vector2d(l1[0], l1[1]),
                                           Eigen::Vector2d(l2[0], l2[1]));
    return Config{std::move(fs), std::move(lat)};
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<DualVector> dual_lattice_points(const Lattice& lat, double radius) {
    std::vector<DualVector> out;
    if (!(radius > 0.0)) return out;

    // coefficient bound from the smallest singular value of [k1 k2]
    Eigen::Matrix2d K;
    K.col(0) = lat.k1().v;
    K.col(1) = lat.k2().v;
    const double smin = K.jacobiSvd().singularValues()(1);
    const int M = int(std::ceil(radius / smin)) + 1;

    const double r2 = radius * radius * (1.0 + 4e-15);  // keep exact shells
    for (int m1 = -M; m1 <= M; ++m1)
        for (int m2 = -M; m2 <= M; ++m2) {
            if (m1 == 0 && m2 == 0) continue;
            DualVector dv = lat.dual(m1, m2);
            if (dv.v.squaredNorm() <= r2) out.push_back(dv);
        }
    std::sort(out.begin(), out.end(), [](const DualVector& a, const DualVector& b) {
        if (a.mag != b.mag) return a.mag < b.mag;
        if (a.m1 != b.m1) return a.m1 < b.m1;
        return a.m2 < b.m2;
    });
    return out;
}

NonResonanceReport check_non_resonance(const FluidStack& fs, const Lattice& lat,
                                       double radius_factor) {
    NonResonanceReport rep;
    const int m = fs.m();

    auto classify = [&](int layer, int m1, int m2, double kmag) {
        const double a = fs.alpha(layer);
        const double q2 = a * a - kmag * kmag;
        if (q2 <= 0.0) return;  // only |k| < |alpha_j| can resonate
        const double t = std::sqrt(q2) * fs.h(layer) / M_PI;
        const int nearest = int(std::lround(t));
        if (nearest < 1) return;
        const double dist = std::abs(t - nearest);
        const double scale = std::max(1.0, std::abs(t));
        if (dist < tol_res * scale) {
            rep.violations.push_back({layer, m1, m2, kmag, t, nearest, dist});
            rep.ok = false;
        } else if (dist < 10.0 * tol_res * scale) {
            rep.warnings.push_back({layer, m1, m2, kmag, t, nearest, dist});
        }
    };

    double amax = 0.0;
    for (int j = 1; j <= m; ++j) amax = std::max(amax, std::abs(fs.alpha(j)));
    std::vector<DualVector> pts;
    if (amax > 0.0) pts = dual_lattice_points(lat, amax * std::max(radius_factor, 1.0));

    for (int j = 1; j <= m; ++j) {
        if (fs.alpha(j) == 0.0) continue;
        classify(j, 0, 0, 0.0);  // k = 0
        for (const auto& p : pts) classify(j, p.m1, p.m2, p.mag);
    }
    return rep;
}

} // namespace stratiwave
