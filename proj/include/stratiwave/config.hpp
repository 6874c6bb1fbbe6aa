#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "stratiwave/errors.hpp"

namespace stratiwave {

// Layered fluid at rest: n free interfaces between n+1 layers stacked on
// 0 < z < d_{n+1}.  Layer j occupies d_{j-1} < z < d_j (d_0 = 0).  The top
// layer may be vacuum (rho_{n+1} = 0), in which case only the first n layers
// carry fluid.
//
// All accessors are 1-based to mirror the usual mathematical indexing.
struct FluidStack {
    int n = 0;           // number of free interfaces
    double g = 0.0;      // gravitational acceleration
    std::vector<double> rho_;    // densities rho_1..rho_{n+1}, strictly decreasing
    std::vector<double> alpha_;  // Beltrami constants alpha_1..alpha_{n+1}
    std::vector<double> d_;      // interface rest heights d_1..d_{n+1} (d_0 = 0)
    std::vector<double> sigma_;  // interfacial tensions sigma_1..sigma_n, > 0

    // number of fluid layers: n+1, or n when the top layer is vacuum
    int m() const { return rho_.back() > 0.0 ? n + 1 : n; }

    double rho(int j) const { return rho_[j - 1]; }      // j in [1, n+1]
    double alpha(int j) const { return alpha_[j - 1]; }  // j in [1, n+1]
    double d(int j) const { return j == 0 ? 0.0 : d_[j - 1]; }  // j in [0, n+1]
    double sigma(int j) const { return sigma_[j - 1]; }  // j in [1, n]
    double h(int j) const { return d(j) - d(j - 1); }    // layer thickness, j in [1, n+1]

    // throws ConfigError naming the violated constraint
    void validate() const;
};

// One nonzero dual-lattice vector m1*k1 + m2*k2.
struct DualVector {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    double mag = 0.0;    // |v|
    double gamma = 0.0;  // polar angle of v
    int m1 = 0, m2 = 0;  // integer coordinates in the (k1, k2) basis
};

// Spatial period lattice spanned by lambda1, lambda2 and its dual spanned by
// k1, k2 with lambda_i . k_j = 2*pi*delta_ij.  On construction the plane is
// rotated (and reflected if needed) so that k1 points along +x and the polar
// angle of k2 lies in (0, pi).  The stored generators are in that frame.
struct Lattice {
    Eigen::Vector2d lambda1, lambda2;  // canonical frame
    DualVector k1_, k2_;
    double cell_area = 0.0;      // |det(lambda1, lambda2)|
    double rotation = 0.0;       // angle applied to the input generators
    bool reflected = false;      // whether y -> -y was applied

    static Lattice from_generators(const Eigen::Vector2d& l1, const Eigen::Vector2d& l2);

    const DualVector& k1() const { return k1_; }
    const DualVector& k2() const { return k2_; }
    double gamma2() const { return k2_.gamma; }

    // dual vector for integer coordinates (m1, m2)
    DualVector dual(int m1, int m2) const;
};

struct Config {
    FluidStack fluid;
    Lattice lattice;
};

// Parse and validate a JSON configuration (see README for the schema).
Config load_config(const std::string& path);
Config parse_config(const std::string& json_text);

// All nonzero dual vectors with |k| <= radius, sorted by (|k|, m1, m2).
std::vector<DualVector> dual_lattice_points(const Lattice& lat, double radius);

// Resonance proximity of one layer/wavevector combination.
struct ResonanceHit {
    int layer = 0;
    int m1 = 0, m2 = 0;      // dual coordinates; (0,0) marks the k = 0 test
    double kmag = 0.0;
    double t = 0.0;          // sqrt(alpha^2 - |k|^2) * h / pi
    int nearest = 0;         // nearest positive integer to t
    double distance = 0.0;   // |t - nearest|
};

struct NonResonanceReport {
    bool ok = true;
    std::vector<ResonanceHit> violations;  // within tol_res of a positive integer
    std::vector<ResonanceHit> warnings;    // within 10*tol_res but not violations
};

inline constexpr double tol_res = 1e-9;

// Checks, for every fluid layer j and every dual vector with |k| < |alpha_j|
// (k = 0 included when alpha_j != 0), that sqrt(alpha_j^2 - |k|^2) * h_j / pi
// stays away from the positive integers.  radius_factor widens the lattice
// scan beyond |alpha_j| (only useful for robustness tests; points with
// |k| >= |alpha_j| are never resonant).
NonResonanceReport check_non_resonance(const FluidStack& fs, const Lattice& lat,
                                       double radius_factor = 1.0);

} // namespace stratiwave
