#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratiwave/config.hpp"
#include "stratiwave/dispersion.hpp"
#include "stratiwave/trivial_flow.hpp"

namespace stratiwave {

// Eigenvalue curves theta -> mu_i(k, theta) of R(k, theta) for k in {k1, k2},
// sampled on a uniform grid in [0, pi) (offset by half a step so the grid
// avoids the angles where R degenerates to zero for irrotational flows).
// Columns are labeled by continuity: label c follows the eigenvector overlap
// from one angle to the next, starting from ascending order at the first
// angle.
struct EigencurveScan {
    int n = 0;
    std::vector<double> theta;
    Eigen::MatrixXd mu1, mu2;               // grid x n
    std::vector<Eigen::MatrixXd> xi1, xi2;  // eigenvector columns per angle
    struct Bracket {
        int iota = 0, kappa = 0;  // 0-based labels
        int seg = 0;              // grid segment index; theta_hi may wrap by +pi
        double theta_lo = 0.0, theta_hi = 0.0;
    };
    std::vector<Bracket> crossings;  // sign changes of mu_iota(k1) - mu_kappa(k2)
};

EigencurveScan scan_eigencurves(const FluidStack& fs, const Lattice& lat, int grid = 2048);

// One crossing sharpened by bisection to |mu_1 - mu_2| < 1e-12 (1 + |mu|).
struct RefinedCrossing {
    bool accepted = false;
    std::string reason;  // rejection reason when not accepted
    int iota = 0, kappa = 0;
    double theta_star = 0.0;
    double mu_star = 0.0;
    Eigen::VectorXd xi1, xi2;  // eigenvectors at theta_star
};

RefinedCrossing refine_crossing(const FluidStack& fs, const Lattice& lat,
                                const EigencurveScan& scan,
                                const EigencurveScan::Bracket& bracket);

// Candidate bifurcation point: laminar parameters tau* = (r*, theta*) at
// which A(tau*, k1) and A(tau*, k2) are simultaneously singular, the unit
// kernel vectors, and the 2x2 transversality matrix
//   nu_{i1} = eta_i . d_r A(tau*, k_i) eta_i,
//   nu_{i2} = eta_i . d_theta A(tau*, k_i) eta_i.
struct BifurcationPoint {
    Tau tau_star;
    int iota = 0, kappa = 0;  // 0-based eigencurve labels
    double mu = 0.0;          // shared eigenvalue, = -1 / r*^2
    Eigen::VectorXd eta1, eta2;
    Eigen::Matrix2d nu = Eigen::Matrix2d::Zero();
    bool kernel_ok = false;  // both kernels one-dimensional at assembly time
    bool canonical = true;   // smallest theta* among points with these labels
};

// Build the point data at theta_star.  Modes are selected by overlap with
// ref1/ref2 when given, otherwise by ascending eigenvalue index.
BifurcationPoint make_point(const FluidStack& fs, const Lattice& lat, double theta_star,
                            int iota, int kappa, const Eigen::VectorXd* ref1 = nullptr,
                            const Eigen::VectorXd* ref2 = nullptr);

Eigen::Matrix2d compute_nu(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                           const DualVector& k1, const DualVector& k2,
                           const Eigen::VectorXd& eta1, const Eigen::VectorXd& eta2);

// Full verification of a candidate point: (kernel) both matrices have
// one-dimensional kernels spanned by eta1/eta2; (transversality) det nu is
// bounded away from zero; (isolation) no other dual-lattice vector gives a
// singular matrix — checked directly up to a certified cutoff K_max beyond
// which diagonal dominance excludes kernels analytically.
struct DetViolation {
    int m1 = 0, m2 = 0;
    double kmag = 0.0, det = 0.0, scale = 0.0;
};

struct VerificationReport {
    struct Kernel {
        int dim1 = 0, dim2 = 0;
        double res1 = 0.0, res2 = 0.0;  // ||A eta|| / ||A||_inf
        bool ok = false;
    } kernel;
    struct Transversality {
        double det_nu = 0.0, tol = 0.0;
        bool ok = false;
    } transversality;
    struct Isolation {
        double k_max = 0.0;
        bool certified = false;  // dominance argument succeeded at k_max
        int scanned = 0;
        double min_margin = 0.0;  // min |det A| / scale over scanned vectors
        std::vector<DetViolation> violations;
        bool ok = false;
    } isolation;
    struct LatticeClass {
        bool symmetric = false;     // |k1| = |k2|
        bool nondegenerate = false; // no other dual vector on that shell
    } lattice;
    bool ok = false;
};

inline constexpr double tol_det_rel = 1e-10;  // relative to prod_j Sigma_jj(k)

VerificationReport verify_point(const FluidStack& fs, const Lattice& lat,
                                const BifurcationPoint& point);

// Surface-tension rescaling that moves sigma along the family
//   sigma_q,j = ((1+q) sigma_j |k1|^2 + q g (rho_j - rho_{j+1})) / |k1|^2,
// carrying the point to tau_q = (sqrt(1+q) r*, theta*).  On symmetric duals
// (|k1| = |k2|) this preserves both kernels exactly; the result is always
// re-verified.  Without an explicit q, sweeps |q| = 1e-4 * 2^i, both signs,
// until verification passes.
struct SigmaRescueResult {
    bool found = false;
    double q = 0.0;
    FluidStack fluid;  // rescaled stack (valid when found)
    BifurcationPoint point;
    VerificationReport report;
};

SigmaRescueResult sigma_rescue(const FluidStack& fs, const Lattice& lat,
                               const BifurcationPoint& point,
                               std::optional<double> q = std::nullopt);

// Continuation of a point in the Beltrami constants: linear homotopy from
// fs.alpha to alpha_target in `steps` increments, solving
//   (det A(tau, k1), det A(tau, k2)) = 0
// by Newton at each step (derivatives via the adjugate).
struct ContinuationResult {
    bool ok = false;
    double achieved_fraction = 0.0;  // 1.0 on success
    std::string message;
    FluidStack fluid;  // stack at the last converged alpha
    BifurcationPoint point;
    VerificationReport report;
};

ContinuationResult continue_alpha(const FluidStack& fs, const Lattice& lat,
                                  const BifurcationPoint& point,
                                  const std::vector<double>& alpha_target, int steps = 8);

// Closed-form existence conditions for one interface (n = 1): monotone
// vertical flux between the two wavenumbers plus an angular-width bound, or
// the degenerate alternative rho_1 alpha_1 = rho_2 alpha_2.
struct TwoLayerReport {
    bool applicable = false;  // n == 1
    double p1 = 0.0, p2 = 0.0;       // rho_2 psi_2'(d_2,k_i) + rho_1 psi_1'(d_1,k_i)
    double dvort = 0.0;              // rho_1 alpha_1 - rho_2 alpha_2
    double angle_diff = 0.0;         // arctan(p1/dvort) - arctan(p2/dvort)
    double gamma2 = 0.0;
    bool cond_flux = false;   // p1 >= p2 > 0 and dvort > 0
    bool cond_angle = false;  // angle_diff < gamma2
    bool alternative = false; // rho_1 alpha_1 = rho_2 alpha_2
    bool ok = false;
};

TwoLayerReport check_two_layer_conditions(const FluidStack& fs, const Lattice& lat);

// Whole pipeline: scan -> refine every crossing -> build + verify points.
struct PipelineOptions {
    int grid = 2048;
    bool rescue = false;  // attempt sigma_rescue when isolation fails
};

struct Rejection {
    int iota = 0, kappa = 0;
    double theta_lo = 0.0, theta_hi = 0.0;
    std::string reason;
};

struct PipelinePoint {
    BifurcationPoint point;
    VerificationReport report;
    bool rescued = false;
    double rescue_q = 0.0;
    std::optional<FluidStack> rescued_fluid;
    std::optional<BifurcationPoint> rescued_point;
    std::optional<VerificationReport> rescued_report;
};

struct PipelineResult {
    std::vector<PipelinePoint> points;
    std::vector<Rejection> rejections;
};

PipelineResult find_bifurcation_points(const FluidStack& fs, const Lattice& lat,
                                       const PipelineOptions& opts = {});

} // namespace stratiwave
