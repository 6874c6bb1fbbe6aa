#include "stratiwave/flattening.hpp"

#include <cmath>
#include <numbers>

#include "stratiwave/errors.hpp"

namespace stratiwave {

namespace {

// Wrap a torus coordinate into [0, 1).
double wrap01(double a) {
    double w = a - std::floor(a);
    if (w >= 1.0) w -= 1.0;
    return w;
}

struct BilinearStencil {
    int ia0, ia1, ib0, ib1;
    double wa, wb;  // weights toward (ia1, ib1)
};

BilinearStencil stencil(const InterfaceGrid& g, double x, double y) {
    const double a = wrap01((g.k1.x() * x + g.k1.y() * y) / (2.0 * std::numbers::pi));
    const double b = wrap01((g.k2.x() * x + g.k2.y() * y) / (2.0 * std::numbers::pi));
    const double fa = a * g.na;
    const double fb = b * g.nb;
    BilinearStencil s;
    s.ia0 = static_cast<int>(std::floor(fa)) % g.na;
    s.ib0 = static_cast<int>(std::floor(fb)) % g.nb;
    s.ia1 = (s.ia0 + 1) % g.na;
    s.ib1 = (s.ib0 + 1) % g.nb;
    s.wa = fa - std::floor(fa);
    s.wb = fb - std::floor(fb);
    return s;
}

double interp(const Eigen::MatrixXd& f, const BilinearStencil& s) {
    return (1.0 - s.wb) * ((1.0 - s.wa) * f(s.ib0, s.ia0) + s.wa * f(s.ib0, s.ia1)) +
           s.wb * ((1.0 - s.wa) * f(s.ib1, s.ia0) + s.wa * f(s.ib1, s.ia1));
}

void check_interface_index(const InterfaceGrid& g, int j) {
    if (j < 0 || j > g.n + 1)
        throw ConfigError("interface index out of range: " + std::to_string(j));
}

// Taylor remainder of the laminar profile components at height d + eta about
// d: T_i = U_i(d + eta) - U_i(d) - eta U_i'(d), with U' expressed through the
// Beltrami relations U_1' = alpha U_2, U_2' = -alpha U_1.
Eigen::Vector2d taylor_remainder(const FluidStack& fs, const Tau& tau, int layer, double d,
                                 double eta) {
    const Eigen::Vector3d u_disp = trivial_velocity_unchecked(fs, tau, layer, d + eta);
    const Eigen::Vector3d u_ref = trivial_velocity_unchecked(fs, tau, layer, d);
    const double alpha = fs.alpha(layer);
    const double t1 = u_disp.x() - u_ref.x() - eta * alpha * u_ref.y();
    const double t2 = u_disp.y() - u_ref.y() + eta * alpha * u_ref.x();
    return {t1, t2};
}

} // namespace

double InterfaceGrid::value(int j, double x, double y) const {
    check_interface_index(*this, j);
    if (j == 0 || j == n + 1) return 0.0;
    return interp(eta[static_cast<std::size_t>(j - 1)], stencil(*this, x, y));
}

Eigen::Vector2d InterfaceGrid::gradient(int j, double x, double y) const {
    check_interface_index(*this, j);
    if (j == 0 || j == n + 1) return Eigen::Vector2d::Zero();
    const BilinearStencil s = stencil(*this, x, y);
    return {interp(deta_dx[static_cast<std::size_t>(j - 1)], s),
            interp(deta_dy[static_cast<std::size_t>(j - 1)], s)};
}

InterfaceGrid grid_from_modes(const FluidStack& fs, const Lattice& lat,
                              const std::vector<std::vector<FourierMode>>& modes, int na,
                              int nb) {
    if (static_cast<int>(modes.size()) != fs.n)
        throw ConfigError("expected one mode list per interface");
    if (na < 4 || nb < 4) throw ConfigError("interface grid must be at least 4 x 4");

    InterfaceGrid g;
    g.n = fs.n;
    g.na = na;
    g.nb = nb;
    g.lambda1 = lat.lambda1;
    g.lambda2 = lat.lambda2;
    g.k1 = lat.k1().v;
    g.k2 = lat.k2().v;
    g.cell_area = lat.cell_area;
    g.eta.assign(static_cast<std::size_t>(fs.n), Eigen::MatrixXd::Zero(nb, na));
    g.deta_dx.assign(static_cast<std::size_t>(fs.n), Eigen::MatrixXd::Zero(nb, na));
    g.deta_dy.assign(static_cast<std::size_t>(fs.n), Eigen::MatrixXd::Zero(nb, na));

    for (int j = 1; j <= fs.n; ++j) {
        auto& e = g.eta[static_cast<std::size_t>(j - 1)];
        auto& ex = g.deta_dx[static_cast<std::size_t>(j - 1)];
        auto& ey = g.deta_dy[static_cast<std::size_t>(j - 1)];
        for (int ib = 0; ib < nb; ++ib) {
            for (int ia = 0; ia < na; ++ia) {
                const Eigen::Vector2d xp = (static_cast<double>(ia) / na) * g.lambda1 +
                                           (static_cast<double>(ib) / nb) * g.lambda2;
                for (const FourierMode& md : modes[static_cast<std::size_t>(j - 1)]) {
                    const Eigen::Vector2d k = md.m1 * g.k1 + md.m2 * g.k2;
                    const double phase = k.dot(xp);
                    e(ib, ia) += md.amp * std::cos(phase);
                    ex(ib, ia) -= md.amp * std::sin(phase) * k.x();
                    ey(ib, ia) -= md.amp * std::sin(phase) * k.y();
                }
            }
        }
    }

    // The displaced slabs must stay disjoint: every fluid layer keeps positive
    // thickness at every grid node.
    for (int j = 1; j <= fs.m(); ++j) {
        const auto lo = [&](int ib, int ia) {
            return j - 1 == 0 ? 0.0 : g.eta[static_cast<std::size_t>(j - 2)](ib, ia);
        };
        const auto hi = [&](int ib, int ia) {
            return j == fs.n + 1 ? 0.0 : g.eta[static_cast<std::size_t>(j - 1)](ib, ia);
        };
        for (int ib = 0; ib < nb; ++ib)
            for (int ia = 0; ia < na; ++ia)
                if (fs.h(j) + hi(ib, ia) - lo(ib, ia) <= 0.0)
                    throw ConfigError("interface displacements cross in layer " +
                                      std::to_string(j));
    }
    return g;
}

FlattenResult flatten_map(const FluidStack& fs, const InterfaceGrid& grid, int j, double x,
                          double y, double z) {
    if (j < 1 || j > fs.m())
        throw ConfigError("flatten_map: layer index out of range: " + std::to_string(j));
    const double h = fs.h(j);
    const double dj = fs.d(j), djm = fs.d(j - 1);
    const double elo = grid.value(j - 1, x, y);
    const double ehi = grid.value(j, x, y);
    const Eigen::Vector2d glo = grid.gradient(j - 1, x, y);
    const Eigen::Vector2d ghi = grid.gradient(j, x, y);

    FlattenResult r;
    r.J = 1.0 + (ehi - elo) / h;
    if (r.J <= 0.0)
        throw NumericsError("flattening map degenerates: displaced interfaces cross");
    r.phi = r.J * z + (dj * elo - djm * ehi) / h;
    r.grad_phi = (ghi - glo) * (z / h) + (dj * glo - djm * ghi) / h;
    return r;
}

Eigen::Vector3d corrector_field(const FluidStack& fs, const Tau& tau,
                                const InterfaceGrid& grid, int j, double x, double y,
                                double z) {
    const FlattenResult f = flatten_map(fs, grid, j, x, y, z);
    const Eigen::Vector3d u = trivial_velocity_unchecked(fs, tau, j, z);
    const double alpha = fs.alpha(j);
    const double shear = f.J - 1.0;
    const double twist = alpha * (f.phi - z);
    return {shear * u.x() + twist * u.y(), shear * u.y() - twist * u.x(),
            -f.grad_phi.x() * u.x() - f.grad_phi.y() * u.y()};
}

std::pair<double, double> defect_integrals(const FluidStack& fs, const Tau& tau,
                                           const InterfaceGrid& grid, int j) {
    if (j < 1 || j > fs.m())
        throw ConfigError("defect_integrals: layer index out of range: " + std::to_string(j));
    const double alpha = fs.alpha(j);
    if (alpha == 0.0) return {0.0, 0.0};

    // Uniform periodic sampling integrates the smooth integrand with spectral
    // accuracy over one lattice cell.
    double sum1 = 0.0, sum2 = 0.0;
    for (int ib = 0; ib < grid.nb; ++ib) {
        for (int ia = 0; ia < grid.na; ++ia) {
            const double elo =
                j - 1 == 0 ? 0.0 : grid.eta[static_cast<std::size_t>(j - 2)](ib, ia);
            const double ehi =
                j == fs.n + 1 ? 0.0 : grid.eta[static_cast<std::size_t>(j - 1)](ib, ia);
            const Eigen::Vector2d thi = taylor_remainder(fs, tau, j, fs.d(j), ehi);
            const Eigen::Vector2d tlo = taylor_remainder(fs, tau, j, fs.d(j - 1), elo);
            sum1 += thi.x() - tlo.x();
            sum2 += thi.y() - tlo.y();
        }
    }
    const double mean_scale = grid.cell_area / (grid.na * grid.nb);
    return {-(mean_scale / alpha) * sum2, (mean_scale / alpha) * sum1};
}

std::pair<double, double> correction_coeffs(const FluidStack& fs, int j, double I1, double I2,
                                            double cell_area) {
    const double alpha = fs.alpha(j);
    if (alpha == 0.0) return {0.0, 0.0};
    const double h = fs.h(j);
    const double denom = 2.0 - 2.0 * std::cos(alpha * h);
    if (std::abs(denom) < 1e-12)
        throw ResonanceError("correction pair degenerate: alpha * h is a multiple of 2 pi "
                             "in layer " +
                             std::to_string(j));
    const double a = std::sin(alpha * fs.d(j)) - std::sin(alpha * fs.d(j - 1));
    const double b = std::cos(alpha * fs.d(j)) - std::cos(alpha * fs.d(j - 1));
    const double scale = alpha / (cell_area * denom);
    return {scale * (a * I1 + b * I2), scale * (-b * I1 + a * I2)};
}

std::pair<double, double> correction_coeffs(const FluidStack& fs, const Tau& tau,
                                            const InterfaceGrid& grid, int j) {
    const auto [I1, I2] = defect_integrals(fs, tau, grid, j);
    return correction_coeffs(fs, j, I1, I2, grid.cell_area);
}

} // namespace stratiwave
