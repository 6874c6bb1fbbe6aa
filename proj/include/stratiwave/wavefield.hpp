#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratiwave/bifurcation.hpp"
#include "stratiwave/config.hpp"
#include "stratiwave/trivial_flow.hpp"

namespace stratiwave {

// Vertical profile of one linear wave mode.  The physical velocity
// contribution of the mode with interface amplitudes eta_hat and wave vector
// k is, at horizontal phase p = k . x',
//   ( w1(z) cos p, w2(z) cos p, -w3(z) sin p ),
// where in fluid layer j
//   w3    = r |k| ( eta_{j-1} beta_{j-1} phi_j(z) + eta_j beta_j psi_j(z) ),
//   w1    = ( -cos(gamma) w3' - sin(gamma) alpha_j w3 ) / |k|,
//   w2    = ( -sin(gamma) w3' + cos(gamma) alpha_j w3 ) / |k|,
// with gamma the direction angle of k and eta_0 = eta_{n+1} = 0.
struct ModeProfiles {
    DualVector k;
    Eigen::VectorXd eta_hat;
    std::vector<Eigen::VectorXd> z;              // per fluid layer, size nz
    std::vector<Eigen::VectorXd> w1, w2, w3;     // per fluid layer, size nz
};

ModeProfiles solve_mode(const FluidStack& fs, const Tau& tau, const DualVector& k,
                        const Eigen::VectorXd& eta_hat, int nz = 33);

// Point evaluation of (w1, w2, w3) in layer j at height z.
Eigen::Vector3d mode_profile(const FluidStack& fs, const Tau& tau, const DualVector& k,
                             const Eigen::VectorXd& eta_hat, int j, double z);

// First-order wave field at a bifurcation point: laminar flow plus the two
// kernel modes with amplitudes t1, t2.  Heights are taken in the flattened
// (reference-slab) coordinates; interface elevations are physical.
struct FirstOrderField {
    FluidStack fs;
    Lattice lat;
    Tau tau;
    DualVector k1, k2;
    Eigen::VectorXd eta1, eta2;
    double t1 = 0.0, t2 = 0.0;

    double eta(int j, double x, double y) const;
    Eigen::Vector2d eta_gradient(int j, double x, double y) const;
    Eigen::Vector3d velocity(int j, double x, double y, double z) const;
    double pressure(int j, double x, double y, double z) const;
};

FirstOrderField first_order_field(const FluidStack& fs, const Lattice& lat,
                                  const BifurcationPoint& point, double t1, double t2);

// Sampled first-order field over one lattice cell: nx x ny horizontal nodes
// at x' = (ix/nx) lambda1 + (iy/ny) lambda2, nz heights per fluid layer.
struct WaveFieldSample {
    int nx = 0, ny = 0, nz = 0;
    int n = 0, m = 0;
    Tau tau;
    int iota = 0, kappa = 0;  // 1-based mode labels
    double t1 = 0.0, t2 = 0.0;
    Eigen::VectorXd eta1, eta2;
    DualVector k1, k2;
    double max_slope = 0.0;
    std::vector<std::string> warnings;

    // eta_rows: one row per horizontal node: x, y, eta_1..eta_n.
    Eigen::MatrixXd eta_rows;
    // volume_rows: x, y, z, layer, u1, u2, u3, p; layer-major, then z, y, x.
    Eigen::MatrixXd volume_rows;
};

// Assemble the sampled field; throws NumericsError if the displaced
// interfaces cross at amplitude (t1, t2), and records a warning when the
// maximal interface slope exceeds 0.3 (the linearization is then dubious).
WaveFieldSample assemble_first_order(const FluidStack& fs, const Lattice& lat,
                                     const BifurcationPoint& point, double t1, double t2,
                                     int nx = 64, int ny = 64, int nz = 33);

// Write eta.csv, volume.csv and metadata.json into out_dir (created if
// missing).  Numeric fields use %.17g so re-runs are byte-identical.
void export_field(const WaveFieldSample& sample, const std::string& out_dir,
                  const std::string& config_hash = "");

} // namespace stratiwave
