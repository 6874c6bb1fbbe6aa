#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stratiwave/config.hpp"

namespace stratiwave {

// Shared laminar-flow parameters: horizontal speed r >= 0 and direction theta
// of the flow in layer 1 at z = 0.
struct Tau {
    double r = 0.0;
    double theta = 0.0;
};

// Directions theta_1..theta_m making the laminar velocity continuous across
// the rest interfaces: theta_{j+1} = theta_j - alpha_j d_j + alpha_{j+1} d_j.
std::vector<double> theta_layers(const FluidStack& fs, const Tau& tau);

// Laminar Beltrami velocity in layer j at height z:
//   U^(j)(z) = r (cos(theta_j - alpha_j z), sin(theta_j - alpha_j z), 0).
// Throws ConfigError if z lies outside [d_{j-1}, d_j].
Eigen::Vector3d trivial_velocity(const FluidStack& fs, const Tau& tau, int j, double z);

// Same formula without the layer-bounds check (the analytic expression is
// entire in z; interface correctors evaluate it slightly outside the slab).
Eigen::Vector3d trivial_velocity_unchecked(const FluidStack& fs, const Tau& tau, int j,
                                           double z);

// Phase factors of the laminar flow against a wavevector with polar angle
// gamma, evaluated at interface j (j = 0 uses layer 1 data at d_0 = 0,
// otherwise layer j data at d_j):
//   beta_j = cos(theta_j - alpha_j d_j - gamma),
//   beta_j_perp = sin(theta_j - alpha_j d_j - gamma).
double beta(const FluidStack& fs, const Tau& tau, int j, double gamma);
double beta_perp(const FluidStack& fs, const Tau& tau, int j, double gamma);

// Bernoulli constants Q_j = rho_j r^2 / 2 + C_j with C_1 = 0 and
// C_j - C_{j+1} = (rho_j - rho_{j+1}) g d_j, which make the laminar pressure
// continuous across the rest interfaces.
struct PressureNormalization {
    std::vector<double> C;  // C_1..C_m
    std::vector<double> Q;  // Q_1..Q_m
};
PressureNormalization pressure_normalization(const FluidStack& fs, const Tau& tau);

// p = -rho_j (|u|^2 / 2 + g z) + Q_j for a velocity u sampled in layer j.
double bernoulli_pressure(const FluidStack& fs, const Tau& tau, int j,
                          const Eigen::Vector3d& u, double z);

} // namespace stratiwave
