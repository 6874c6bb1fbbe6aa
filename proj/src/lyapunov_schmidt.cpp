#include "stratiwave/lyapunov_schmidt.hpp"

#include <cmath>
#include <limits>

namespace stratiwave {

namespace {

void check_shapes(const BifurcationProblem& pb) {
    const Eigen::Index N = pb.kernel.rows();
    const Eigen::Index p = pb.kernel.cols();
    if (!pb.F) throw ConfigError("bifurcation problem has no map");
    if (p < 1 || N < p) throw ConfigError("kernel must have between 1 and N columns");
    if (pb.cokernel.rows() != N || pb.cokernel.cols() != p)
        throw ConfigError("cokernel shape must match the kernel");
    if (pb.c_star.size() != p)
        throw ConfigError("parameter count must equal the kernel dimension");
}

// Orthonormal basis of the complement of the column span (N x (N - p)).
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& cols) {
    const Eigen::Index N = cols.rows(), p = cols.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
    return Q.rightCols(N - p);
}

// Newton solve of Z_y^T F(K s + Z_x w, c) = 0 for w.
Eigen::VectorXd solve_complement(const BifurcationProblem& pb, const Eigen::MatrixXd& Zx,
                                 const Eigen::MatrixXd& Zy, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& c) {
    const Eigen::Index q = Zx.cols();
    const Eigen::VectorXd base = pb.kernel * s;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(q);
    const auto rho = [&](const Eigen::VectorXd& wv) -> Eigen::VectorXd {
        return Zy.transpose() * pb.F(base + Zx * wv, c);
    };
    Eigen::VectorXd r = rho(w);
    const double tol = 1e-12 * (1.0 + r.norm());
    for (int it = 0; it < 50; ++it) {
        if (r.norm() <= tol) return w;
        Eigen::MatrixXd J(q, q);
        for (Eigen::Index jj = 0; jj < q; ++jj) {
            const double dj = 1e-7 * (1.0 + std::abs(w[jj]));
            Eigen::VectorXd wp = w;
            wp[jj] += dj;
            J.col(jj) = (rho(wp) - r) / dj;
        }
        if (it == 0) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
            const double smin = svd.singularValues().minCoeff();
            const double smax = svd.singularValues().maxCoeff();
            if (!(smin > 0.0) || smax / smin > 1e12)
                throw NumericsError(
                    "complement linearization is numerically singular: the kernel basis "
                    "does not capture all null directions");
        }
        w -= J.colPivHouseholderQr().solve(r);
        r = rho(w);
    }
    if (r.norm() <= 1e-9 * (1.0 + r.norm())) return w;
    throw NumericsError("complement reduction did not converge");
}

} // namespace

ProblemCheck validate_problem(const BifurcationProblem& pb) {
    check_shapes(pb);
    const Eigen::Index N = pb.kernel.rows(), p = pb.kernel.cols();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(N);

    ProblemCheck chk;
    for (int sample = 0; sample < 5; ++sample) {
        Eigen::VectorXd c = pb.c_star;
        for (Eigen::Index i = 0; i < p; ++i)
            c[i] += 0.1 * (1.0 + std::abs(pb.c_star[i])) *
                    std::sin(1.0 + static_cast<double>(sample) + 2.0 * static_cast<double>(i));
        chk.trivial_residual = std::max(chk.trivial_residual, pb.F(zero, c).norm());
    }

    // FD Jacobian of x -> F(x, c_star) at the origin.
    const Eigen::VectorXd f0 = pb.F(zero, pb.c_star);
    Eigen::MatrixXd J(N, N);
    for (Eigen::Index jj = 0; jj < N; ++jj) {
        const double dj = 1e-6;
        Eigen::VectorXd xp = zero;
        xp[jj] += dj;
        J.col(jj) = (pb.F(xp, pb.c_star) - f0) / dj;
    }
    chk.kernel_residual = (J * pb.kernel).norm();
    chk.cokernel_residual = (pb.cokernel.transpose() * J).norm();
    const double scale = 1.0 + J.norm();
    chk.ok = chk.trivial_residual <= 1e-10 * scale && chk.kernel_residual <= 1e-4 * scale &&
             chk.cokernel_residual <= 1e-4 * scale;
    return chk;
}

Eigen::VectorXd reduce(const BifurcationProblem& pb, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& c) {
    check_shapes(pb);
    const Eigen::Index N = pb.kernel.rows(), p = pb.kernel.cols();
    if (s.size() != p) throw ConfigError("amplitude vector has wrong dimension");
    if (c.size() != p) throw ConfigError("parameter vector has wrong dimension");
    if (N == p) return Eigen::VectorXd::Zero(N);
    const Eigen::MatrixXd Zx = complement_basis(pb.kernel);
    const Eigen::MatrixXd Zy = complement_basis(pb.cokernel);
    return Zx * solve_complement(pb, Zx, Zy, s, c);
}

Eigen::VectorXd reduced_map(const BifurcationProblem& pb, const Eigen::VectorXd& s,
                            const Eigen::VectorXd& c) {
    check_shapes(pb);
    const Eigen::Index p = pb.kernel.cols();
    if (s.size() != p) throw ConfigError("amplitude vector has wrong dimension");
    if (c.size() != p) throw ConfigError("parameter vector has wrong dimension");

    Eigen::VectorXd H(p);
    Eigen::VectorXd x_tilde;
    bool have_base = false;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double eps = 1e-6 * std::max(1.0, pb.kernel.col(i).norm());
        if (std::abs(s[i]) >= eps) {
            if (!have_base) {
                x_tilde = reduce(pb, s, c);
                have_base = true;
            }
            H[i] = pb.cokernel.col(i).dot(pb.F(pb.kernel * s + x_tilde, c)) / s[i];
        } else {
            // Forward limit of the quotient along s_i -> 0+.
            Eigen::VectorXd se = s;
            se[i] = eps;
            const Eigen::VectorXd xt = reduce(pb, se, c);
            H[i] = pb.cokernel.col(i).dot(pb.F(pb.kernel * se + xt, c)) / eps;
        }
    }
    return H;
}

Eigen::MatrixXd nu_matrix(const BifurcationProblem& pb) {
    check_shapes(pb);
    const Eigen::Index p = pb.kernel.cols();
    const Eigen::VectorXd s0 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd nu(p, p);
    for (Eigen::Index jj = 0; jj < p; ++jj) {
        const double dj = 1e-6 * (1.0 + std::abs(pb.c_star[jj]));
        Eigen::VectorXd cp = pb.c_star, cm = pb.c_star;
        cp[jj] += dj;
        cm[jj] -= dj;
        nu.col(jj) = (reduced_map(pb, s0, cp) - reduced_map(pb, s0, cm)) / (2.0 * dj);
    }
    return nu;
}

BranchPoint solve_branch(const BifurcationProblem& pb, const Eigen::VectorXd& s) {
    check_shapes(pb);
    const Eigen::Index p = pb.kernel.cols();
    if (s.size() != p) throw ConfigError("amplitude vector has wrong dimension");

    BranchPoint bp;
    bp.s = s;
    bp.c = pb.c_star;
    Eigen::VectorXd H = reduced_map(pb, s, bp.c);
    const double tol = 1e-12 * (1.0 + H.norm());
    int it = 0;
    for (; it < 50 && H.norm() > tol; ++it) {
        Eigen::MatrixXd J(p, p);
        for (Eigen::Index jj = 0; jj < p; ++jj) {
            const double dj = 1e-7 * (1.0 + std::abs(bp.c[jj]));
            Eigen::VectorXd cp = bp.c;
            cp[jj] += dj;
            J.col(jj) = (reduced_map(pb, s, cp) - H) / dj;
        }
        bp.c -= J.colPivHouseholderQr().solve(H);
        H = reduced_map(pb, s, bp.c);
    }
    if (H.norm() > std::max(tol, 1e-9 * (1.0 + H.norm())))
        throw NumericsError("branch solve did not converge");
    bp.iterations = it;
    bp.x = pb.kernel * s + reduce(pb, s, bp.c);
    bp.residual = pb.F(bp.x, bp.c).norm();

    const Eigen::MatrixXd nu = nu_matrix(pb);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(nu);
    const double smin = svd.singularValues().minCoeff();
    bp.nu_condition = smin > 0.0 ? svd.singularValues().maxCoeff() / smin
                                 : std::numeric_limits<double>::infinity();
    return bp;
}

} // namespace stratiwave
