#pragma once

#include <functional>

#include <Eigen/Dense>

#include "stratiwave/errors.hpp"

namespace stratiwave {

// Finite-dimensional multiparameter bifurcation problem F(x, c) = 0,
// F : R^N x R^p -> R^N, with a trivial branch F(0, c) = 0 and, at the
// critical parameter c_star, a p-dimensional kernel of D_x F[0, c_star]
// spanned by the columns of `kernel` and a p-dimensional cokernel spanned by
// the columns of `cokernel`.
struct BifurcationProblem {
    using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
    Map F;
    Eigen::VectorXd c_star;
    Eigen::MatrixXd kernel;    // N x p
    Eigen::MatrixXd cokernel;  // N x p
};

// Diagnostic check of the structural assumptions: the trivial branch
// vanishes near c_star, the kernel columns are annihilated by D_x F, and the
// cokernel columns annihilate its range.
struct ProblemCheck {
    double trivial_residual = 0.0;
    double kernel_residual = 0.0;
    double cokernel_residual = 0.0;
    bool ok = false;
};

ProblemCheck validate_problem(const BifurcationProblem& pb);

// Complement component: with x = K s + x_tilde, x_tilde in the orthogonal
// complement of the kernel span, solve the projected equations
// Z_y^T F(K s + x_tilde, c) = 0 (Z_y an orthonormal basis of the cokernel
// complement) by Newton iteration.  Returns x_tilde.
Eigen::VectorXd reduce(const BifurcationProblem& pb, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& c);

// Reduced map H : R^p x R^p -> R^p,
//   H_i(s, c) = y_i^T F(K s + x_tilde(s, c), c) / s_i,
// where the quotient at s_i = 0 is replaced by its forward limit (evaluated
// at a small positive s_i).  Branches of F near the trivial one correspond to
// zeros of H with s != 0, and by construction H also captures the limiting
// bifurcation directions at s = 0.
Eigen::VectorXd reduced_map(const BifurcationProblem& pb, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& c);

// Parameter derivative nu = d H / d c at (s = 0, c_star).  The bifurcation
// machinery requires this p x p matrix to be invertible.
Eigen::MatrixXd nu_matrix(const BifurcationProblem& pb);

// A point on a nontrivial branch: for a given kernel amplitude s, the
// parameters c(s) solving H(s, c) = 0 together with the full state
// x = K s + x_tilde and the residual of the original map there.
struct BranchPoint {
    Eigen::VectorXd s, c, x;
    double residual = 0.0;
    int iterations = 0;
    double nu_condition = 0.0;
};

BranchPoint solve_branch(const BifurcationProblem& pb, const Eigen::VectorXd& s);

} // namespace stratiwave
