#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "stratiwave/config.hpp"

namespace testsup {

using namespace stratiwave;

// Lattice whose duals are k1 = k1mag (1, 0) and k2 = k2mag (cos g2, sin g2).
inline Lattice lattice_from_duals(double k1mag, double k2mag, double gamma2) {
    Eigen::Matrix2d K;
    K << k1mag, k2mag * std::cos(gamma2), 0.0, k2mag * std::sin(gamma2);
    const Eigen::Matrix2d L = 2.0 * std::numbers::pi * K.inverse().transpose();
    return Lattice::from_generators(L.col(0), L.col(1));
}

enum class AlphaKind { Zero, Small, Full };

struct RandomCase {
    FluidStack fs;
    Lattice lat;
};

// True when every oscillatory vertical-profile evaluation that the library
// may perform for this configuration stays a comfortable distance from the
// resonant set (where sqrt(alpha^2 - |k|^2) h / pi is a positive integer).
inline bool resonance_margin_ok(const FluidStack& fs, const Lattice& lat,
                                double margin = 0.02) {
    for (int j = 1; j <= fs.m(); ++j) {
        const double a = std::abs(fs.alpha(j));
        if (a == 0.0) continue;
        std::vector<double> mags{0.0};
        for (const DualVector& p : dual_lattice_points(lat, a)) mags.push_back(p.mag);
        for (double km : mags) {
            if (km >= a) continue;
            const double t = std::sqrt(a * a - km * km) * fs.h(j) / std::numbers::pi;
            if (std::round(t) >= 1.0 && std::abs(t - std::round(t)) < margin) return false;
        }
    }
    return true;
}

// Random valid, comfortably non-resonant configuration.  Densities decrease
// by gaps in [0.2, 0.8] from a top value that grows with the layer count so
// interior densities stay positive; layer heights in [0.5, 1.5]; tensions in
// [0.3, 1.5]; dual magnitudes in [0.7, 1.6] with gamma2 in [0.35, pi - 0.35].
inline RandomCase random_case(std::mt19937_64& rng, int n, AlphaKind kind,
                              bool symmetric = false,
                              std::optional<bool> vacuum = std::nullopt) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int attempt = 0; attempt < 500; ++attempt) {
        FluidStack fs;
        fs.n = n;
        fs.g = 0.5 + 1.5 * u01(rng);
        const bool vac = vacuum.value_or(u01(rng) < 0.5);
        fs.rho_.resize(static_cast<std::size_t>(n) + 1);
        fs.rho_[0] = 1.5 + 1.5 * u01(rng) + 0.5 * std::max(0, n - 2);
        bool rho_ok = true;
        for (int j = 1; j <= n; ++j) {
            fs.rho_[static_cast<std::size_t>(j)] =
                fs.rho_[static_cast<std::size_t>(j) - 1] - (0.2 + 0.6 * u01(rng));
            if (j < n && fs.rho_[static_cast<std::size_t>(j)] <= 0.05) {
                rho_ok = false;
                break;
            }
        }
        if (!rho_ok) continue;
        if (vac)
            fs.rho_[static_cast<std::size_t>(n)] = 0.0;
        else if (fs.rho_[static_cast<std::size_t>(n)] <= 0.05)
            continue;
        fs.d_.resize(static_cast<std::size_t>(n) + 1);
        double d = 0.0;
        for (int j = 0; j <= n; ++j) {
            d += 0.5 + 1.0 * u01(rng);
            fs.d_[static_cast<std::size_t>(j)] = d;
        }
        fs.sigma_.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            fs.sigma_[static_cast<std::size_t>(j)] = 0.3 + 1.2 * u01(rng);
        fs.alpha_.assign(static_cast<std::size_t>(n) + 1, 0.0);
        if (kind != AlphaKind::Zero) {
            const double scale = kind == AlphaKind::Small ? 1e-2 : 1.0;
            for (int j = 0; j <= n; ++j)
                fs.alpha_[static_cast<std::size_t>(j)] =
                    scale * (0.2 + 0.9 * u01(rng)) * (u01(rng) < 0.5 ? -1.0 : 1.0);
        }

        const double k1mag = 0.7 + 0.9 * u01(rng);
        const double k2mag = symmetric ? k1mag : 0.7 + 0.9 * u01(rng);
        const double g2 = 0.35 + (std::numbers::pi - 0.7) * u01(rng);
        const Lattice lat = lattice_from_duals(k1mag, k2mag, g2);

        fs.validate();
        const NonResonanceReport rep = check_non_resonance(fs, lat);
        if (!rep.ok || !rep.warnings.empty()) continue;
        if (!resonance_margin_ok(fs, lat)) continue;
        return {fs, lat};
    }
    throw std::runtime_error("could not generate a non-resonant random case");
}

} // namespace testsup
