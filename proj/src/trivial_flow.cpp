#include "stratiwave/trivial_flow.hpp"

#include <cmath>

namespace stratiwave {

std::vector<double> theta_layers(const FluidStack& fs, const Tau& tau) {
    const int m = fs.m();
    std::vector<double> th(static_cast<std::size_t>(m));
    th[0] = tau.theta;
    for (int j = 1; j < m; ++j)
        th[size_t(j)] = th[size_t(j) - 1] - fs.alpha(j) * fs.d(j) + fs.alpha(j + 1) * fs.d(j);
    return th;
}

static void check_layer(const FluidStack& fs, int j) {
    if (j < 1 || j > fs.m())
        throw ConfigError("layer index " + std::to_string(j) + " outside [1, " +
                          std::to_string(fs.m()) + "]");
}

Eigen::Vector3d trivial_velocity_unchecked(const FluidStack& fs, const Tau& tau, int j,
                                           double z) {
    check_layer(fs, j);
    const auto th = theta_layers(fs, tau);
    const double phase = th[size_t(j) - 1] - fs.alpha(j) * z;
    return {tau.r * std::cos(phase), tau.r * std::sin(phase), 0.0};
}

Eigen::Vector3d trivial_velocity(const FluidStack& fs, const Tau& tau, int j, double z) {
    check_layer(fs, j);
    if (z < fs.d(j - 1) - 1e-12 || z > fs.d(j) + 1e-12)
        throw ConfigError("z = " + std::to_string(z) + " outside layer " + std::to_string(j));
    return trivial_velocity_unchecked(fs, tau, j, z);
}

double beta(const FluidStack& fs, const Tau& tau, int j, double gamma) {
    const auto th = theta_layers(fs, tau);
    const int layer = std::max(j, 1);
    check_layer(fs, layer);
    const double phase = th[size_t(layer) - 1] - fs.alpha(layer) * fs.d(j) - gamma;
    return std::cos(phase);
}

double beta_perp(const FluidStack& fs, const Tau& tau, int j, double gamma) {
    const auto th = theta_layers(fs, tau);
    const int layer = std::max(j, 1);
    check_layer(fs, layer);
    const double phase = th[size_t(layer) - 1] - fs.alpha(layer) * fs.d(j) - gamma;
    return std::sin(phase);
}

PressureNormalization pressure_normalization(const FluidStack& fs, const Tau& tau) {
    const int m = fs.m();
    PressureNormalization pn;
    pn.C.resize(size_t(m));
    pn.Q.resize(size_t(m));
    pn.C[0] = 0.0;
    for (int j = 1; j < m; ++j)
        pn.C[size_t(j)] = pn.C[size_t(j) - 1] - (fs.rho(j) - fs.rho(j + 1)) * fs.g * fs.d(j);
    for (int j = 0; j < m; ++j)
        pn.Q[size_t(j)] = fs.rho(j + 1) * tau.r * tau.r / 2.0 + pn.C[size_t(j)];
    return pn;
}

double bernoulli_pressure(const FluidStack& fs, const Tau& tau, int j,
                          const Eigen::Vector3d& u, double z) {
    check_layer(fs, j);
    const auto pn = pressure_normalization(fs, tau);
    return -fs.rho(j) * (u.squaredNorm() / 2.0 + fs.g * z) + pn.Q[size_t(j) - 1];
}

} // namespace stratiwave
