#pragma once

#include <Eigen/Dense>

#include "stratiwave/config.hpp"
#include "stratiwave/trivial_flow.hpp"

namespace stratiwave {

// Symmetric tridiagonal n x n matrix A(tau, k) whose kernel vectors are the
// interface amplitudes of linear waves riding on the laminar flow tau with
// horizontal wavevector k.  Alongside the assembled entries it keeps the
// pieces of the decomposition
//   A = Sigma + r^2 (C B C + C D S)
// with Sigma_jj = sigma_j |k|^2 + (rho_j - rho_{j+1}) g  (diagonal),
// C = diag(beta_j), S = diag(beta_j_perp), D_jj = rho_j alpha_j -
// rho_{j+1} alpha_{j+1}, and B the tridiagonal vertical-flux matrix
//   B_{j,j-1} = rho_j psi_j'(d_{j-1}),
//   B_{j,j}   = -rho_{j+1} psi_{j+1}'(d_{j+1}) - rho_j psi_j'(d_j),
//   B_{j,j+1} = rho_{j+1} psi_{j+1}'(d_j).
struct DispersionMatrix {
    int n = 0;
    Tau tau;
    double kmag = 0.0, gamma = 0.0;

    Eigen::VectorXd diag;      // a_jj, size n
    Eigen::VectorXd offdiag;   // a_{j,j+1}, size n-1 (symmetric storage)
    // raw per-row entries of the same off-diagonals, assembled independently
    // from row j (coupling to j+1) and from row j+1 (coupling to j)
    Eigen::VectorXd row_super; // size n-1, from row j
    Eigen::VectorXd row_sub;   // size n-1, from row j+1

    Eigen::VectorXd sigma_diag;            // Sigma_jj
    Eigen::VectorXd b_diag, b_off;         // B (symmetric tridiagonal)
    Eigen::VectorXd c_diag, s_diag, d_diag;  // C, S, D diagonals

    Eigen::MatrixXd dense() const;
    Eigen::MatrixXd b_dense() const;
};

// Assemble A(tau, k).  k = 0 yields the diagonal matrix (rho_j - rho_{j+1}) g.
// Preconditions: valid fs, non-resonant (fs, k) combinations (vertical-mode
// evaluation throws otherwise).
DispersionMatrix assemble(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                          const DualVector& k);

// Scaled flow-dependence matrix R(k, theta) with
//   A = Sigma^{1/2} (I + r^2 R) Sigma^{1/2},
// i.e. R = Sigma^{-1/2} (C B C + C D S) Sigma^{-1/2}.  Symmetric and
// pi-periodic in theta.
Eigen::MatrixXd assemble_R(const FluidStack& fs, const Lattice& lat, double theta,
                           const DualVector& k);

// Determinant by the tridiagonal three-term recurrence.
double det_A(const DispersionMatrix& A);

// Numerical kernel of A via SVD.  Vectors are unit length with their first
// nonzero component positive.  tol < 0 selects the default
// 1e-8 * max(||A||_inf, ||Sigma||_inf, r^2 ||diag B||_inf): the tolerance is
// anchored to the coefficient magnitudes because at a bifurcation point the
// assembled matrix itself may cancel to zero (always so for n = 1).
struct KernelResult {
    int dim = 0;
    Eigen::MatrixXd basis;      // n x dim
    Eigen::VectorXd residuals;  // ||A v|| per kernel vector
};
KernelResult kernel(const DispersionMatrix& A, double tol = -1.0);

// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix;
// each eigenvector's largest-magnitude component is made positive.
struct EigenPairs {
    Eigen::VectorXd mu;
    Eigen::MatrixXd xi;  // columns
};
EigenPairs eigen_sym(const Eigen::MatrixXd& M);

// Analytic derivatives of A with respect to the flow parameters.
Eigen::MatrixXd dA_dr(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                      const DualVector& k);
Eigen::MatrixXd dA_dtheta(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                          const DualVector& k);

// adj(M) with adj(M) M = det(M) I, by cofactors (small matrices only).
Eigen::MatrixXd adjugate(const Eigen::MatrixXd& M);

} // namespace stratiwave
