#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stratiwave/config.hpp"
#include "stratiwave/trivial_flow.hpp"

namespace stratiwave {

// Interface elevations eta_1..eta_n sampled on a uniform periodic grid over
// one lattice cell, parameterized by (a, b) in [0,1)^2 with x' = a lambda1 +
// b lambda2.  Values and horizontal gradients are stored per interface;
// eta_0 and eta_{n+1} (bed and lid) are identically zero.  Evaluation at
// arbitrary (x, y) interpolates bilinearly on the torus.
struct InterfaceGrid {
    int n = 0;      // interfaces
    int na = 0, nb = 0;
    Eigen::Vector2d lambda1, lambda2;
    Eigen::Vector2d k1, k2;  // duals / (2 pi): torus coordinates of (x, y)
    double cell_area = 0.0;
    std::vector<Eigen::MatrixXd> eta, deta_dx, deta_dy;  // nb x na each, j = 1..n

    double value(int j, double x, double y) const;
    Eigen::Vector2d gradient(int j, double x, double y) const;
};

// One cosine mode amp * cos((m1 k1 + m2 k2) . x') of an interface.
struct FourierMode {
    int m1 = 0, m2 = 0;
    double amp = 0.0;
};

// Build a grid from trigonometric interface data; modes[j-1] lists the cosine
// modes of interface j.  Throws ConfigError if the displaced fluid slabs are
// not disjoint somewhere on the grid.
InterfaceGrid grid_from_modes(const FluidStack& fs, const Lattice& lat,
                              const std::vector<std::vector<FourierMode>>& modes,
                              int na = 64, int nb = 64);

// Vertical flattening of fluid layer j: the linear-in-z diffeomorphism
//   phi_j(x', z) = (1 + (eta_j - eta_{j-1})/h_j) z
//                + (d_j eta_{j-1} - d_{j-1} eta_j)/h_j
// taking the reference slab (d_{j-1}, d_j) onto the displaced layer, with
// vertical stretch J_j = d(phi_j)/dz.  Throws NumericsError when J_j <= 0
// (layers crossed).
struct FlattenResult {
    double phi = 0.0;
    double J = 0.0;
    Eigen::Vector2d grad_phi = Eigen::Vector2d::Zero();  // horizontal gradient
};

FlattenResult flatten_map(const FluidStack& fs, const InterfaceGrid& grid, int j, double x,
                          double y, double z);

// First-order corrector restoring the Beltrami relation after flattening:
//   (  (J_j - 1) U_1 + alpha_j (phi_j - z) U_2,
//      (J_j - 1) U_2 - alpha_j (phi_j - z) U_1,
//      -dx(phi_j) U_1 - dy(phi_j) U_2  )
// with U = U^(j)(z) the laminar flow.
Eigen::Vector3d corrector_field(const FluidStack& fs, const Tau& tau,
                                const InterfaceGrid& grid, int j, double x, double y,
                                double z);

// Residual cell integrals of the corrector against the laminar flow,
//   I_1 = -(1/alpha_j) int_Gamma [ T_2(d_j, eta_j) - T_2(d_{j-1}, eta_{j-1}) ],
//   I_2 = +(1/alpha_j) int_Gamma [ T_1(d_j, eta_j) - T_1(d_{j-1}, eta_{j-1}) ],
// where T_i(d, eta) = U_i(d + eta) - U_i(d) - eta U_i'(d) is the Taylor
// remainder of the laminar profile.  Zero for alpha_j = 0.
std::pair<double, double> defect_integrals(const FluidStack& fs, const Tau& tau,
                                           const InterfaceGrid& grid, int j);

// Coefficients (c_1, c_2) of the homogeneous Beltrami pair that cancels the
// defect integrals:
//   (c_1, c_2) = alpha_j / (|Gamma| (2 - 2 cos(alpha_j h_j))) *
//                [ a  b; -b  a ] (I_1, I_2),
// a = sin(alpha_j d_j) - sin(alpha_j d_{j-1}), b the same with cos.  Zero for
// alpha_j = 0; throws ResonanceError when alpha_j h_j is a nonzero multiple
// of 2 pi.
std::pair<double, double> correction_coeffs(const FluidStack& fs, const Tau& tau,
                                            const InterfaceGrid& grid, int j);
std::pair<double, double> correction_coeffs(const FluidStack& fs, int j, double I1,
                                            double I2, double cell_area);

} // namespace stratiwave
