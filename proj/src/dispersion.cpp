#include "stratiwave/dispersion.hpp"

#include <cmath>

#include "stratiwave/vertical_modes.hpp"

namespace stratiwave {

Eigen::MatrixXd DispersionMatrix::dense() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = diag(i);
    for (int i = 0; i + 1 < n; ++i) M(i, i + 1) = M(i + 1, i) = offdiag(i);
    return M;
}

Eigen::MatrixXd DispersionMatrix::b_dense() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = b_diag(i);
    for (int i = 0; i + 1 < n; ++i) M(i, i + 1) = M(i + 1, i) = b_off(i);
    return M;
}

namespace {

// psi_j'(z, |k|) weighted by rho_j; vacuum layers contribute nothing and the
// profile is never evaluated there.
double rho_psi_prime(const FluidStack& fs, int j, double kmag, double z) {
    const double rho = fs.rho(j);
    if (rho == 0.0) return 0.0;
    return rho * psi_prime(fs, j, kmag, z);
}

} // namespace

DispersionMatrix assemble(const FluidStack& fs, const Lattice& /*lat*/, const Tau& tau,
                          const DualVector& k) {
    fs.validate();
    const int n = fs.n;
    DispersionMatrix A;
    A.n = n;
    A.tau = tau;
    A.kmag = k.mag;
    A.gamma = k.gamma;
    A.diag = Eigen::VectorXd::Zero(n);
    A.offdiag = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    A.row_super = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    A.row_sub = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    A.sigma_diag = Eigen::VectorXd::Zero(n);
    A.b_diag = Eigen::VectorXd::Zero(n);
    A.b_off = Eigen::VectorXd::Zero(std::max(n - 1, 0));
    A.c_diag = Eigen::VectorXd::Zero(n);
    A.s_diag = Eigen::VectorXd::Zero(n);
    A.d_diag = Eigen::VectorXd::Zero(n);

    for (int j = 1; j <= n; ++j)
        A.sigma_diag(j - 1) = fs.sigma(j) * k.mag * k.mag + (fs.rho(j) - fs.rho(j + 1)) * fs.g;

    if (k.mag == 0.0) {
        // no vertical structure at k = 0: A degenerates to the hydrostatic
        // diagonal and the flow-dependent pieces vanish
        A.diag = A.sigma_diag;
        return A;
    }

    const double r2 = tau.r * tau.r;
    for (int j = 1; j <= n; ++j) {
        const double bj = beta(fs, tau, j, k.gamma);
        const double bjp = beta_perp(fs, tau, j, k.gamma);
        const double flux = rho_psi_prime(fs, j + 1, k.mag, fs.d(j + 1)) +
                            rho_psi_prime(fs, j, k.mag, fs.d(j));
        const double dj = fs.rho(j) * fs.alpha(j) -
                          (fs.rho(j + 1) > 0.0 ? fs.rho(j + 1) * fs.alpha(j + 1) : 0.0);

        A.c_diag(j - 1) = bj;
        A.s_diag(j - 1) = bjp;
        A.d_diag(j - 1) = dj;
        A.b_diag(j - 1) = -flux;
        if (j < n) A.b_off(j - 1) = rho_psi_prime(fs, j + 1, k.mag, fs.d(j));

        A.diag(j - 1) = A.sigma_diag(j - 1) + r2 * bj * (-bj * flux + bjp * dj);

        // row j couples to interface j+1 through layer j+1's profile at d_j
        if (j < n)
            A.row_super(j - 1) = r2 * bj * beta(fs, tau, j + 1, k.gamma) *
                                 rho_psi_prime(fs, j + 1, k.mag, fs.d(j));
        // row j couples to interface j-1 through layer j's profile at d_{j-1}
        if (j > 1)
            A.row_sub(j - 2) = r2 * bj * beta(fs, tau, j - 1, k.gamma) *
                               rho_psi_prime(fs, j, k.mag, fs.d(j - 1));
    }
    // symmetric storage takes the row-j formula; the row-(j+1) variant is kept
    // in row_sub for consistency checks
    A.offdiag = A.row_super;
    return A;
}

Eigen::MatrixXd assemble_R(const FluidStack& fs, const Lattice& lat, double theta,
                           const DualVector& k) {
    DispersionMatrix A = assemble(fs, lat, Tau{1.0, theta}, k);
    const int n = A.n;
    Eigen::VectorXd is = A.sigma_diag.array().sqrt().inverse();
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const double cbc = A.c_diag(j) * A.b_diag(j) * A.c_diag(j);
        const double cds = A.c_diag(j) * A.d_diag(j) * A.s_diag(j);
        R(j, j) = (cbc + cds) * is(j) * is(j);
    }
    for (int j = 0; j + 1 < n; ++j) {
        const double cbc = A.c_diag(j) * A.b_off(j) * A.c_diag(j + 1);
        R(j, j + 1) = R(j + 1, j) = cbc * is(j) * is(j + 1);
    }
    return R;
}

double det_A(const DispersionMatrix& A) {
    double dm2 = 1.0, dm1 = A.diag(0);
    for (int j = 1; j < A.n; ++j) {
        const double d = A.diag(j) * dm1 - A.offdiag(j - 1) * A.offdiag(j - 1) * dm2;
        dm2 = dm1;
        dm1 = d;
    }
    return dm1;
}

KernelResult kernel(const DispersionMatrix& A, double tol) {
    const Eigen::MatrixXd M = A.dense();
    if (tol < 0.0) {
        // Scale reference: at a bifurcation point the assembled matrix itself
        // can be numerically zero (n = 1), so the tolerance is anchored to the
        // magnitudes of the ingredients, not only to the cancelled result.
        const double r2 = A.tau.r * A.tau.r;
        double scale = M.cwiseAbs().rowwise().sum().maxCoeff();
        if (A.sigma_diag.size() > 0)
            scale = std::max(scale, A.sigma_diag.cwiseAbs().maxCoeff());
        if (A.b_diag.size() > 0)
            scale = std::max(scale, r2 * A.b_diag.cwiseAbs().maxCoeff());
        tol = std::max(1e-8 * scale, 1e-300);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    KernelResult out;
    std::vector<int> cols;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) < tol) cols.push_back(i);
    out.dim = int(cols.size());
    out.basis.resize(A.n, out.dim);
    out.residuals.resize(out.dim);
    for (int c = 0; c < out.dim; ++c) {
        Eigen::VectorXd v = svd.matrixV().col(cols[size_t(c)]);
        for (int i = 0; i < v.size(); ++i) {
            if (v(i) != 0.0) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
        out.basis.col(c) = v;
        out.residuals(c) = (M * v).norm();
    }
    return out;
}

EigenPairs eigen_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericsError("symmetric eigensolver failed");
    EigenPairs out;
    out.mu = es.eigenvalues();
    out.xi = es.eigenvectors();
    for (int c = 0; c < out.xi.cols(); ++c) {
        int imax = 0;
        out.xi.col(c).cwiseAbs().maxCoeff(&imax);
        if (out.xi(imax, c) < 0.0) out.xi.col(c) = -out.xi.col(c);
    }
    return out;
}

Eigen::MatrixXd dA_dr(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                      const DualVector& k) {
    DispersionMatrix A = assemble(fs, lat, tau, k);
    const int n = A.n;
    Eigen::MatrixXd dM = Eigen::MatrixXd::Zero(n, n);
    if (k.mag == 0.0) return dM;
    // A - Sigma is quadratic in r
    for (int j = 0; j < n; ++j)
        dM(j, j) = 2.0 * tau.r *
                   (A.c_diag(j) * A.b_diag(j) * A.c_diag(j) +
                    A.c_diag(j) * A.d_diag(j) * A.s_diag(j));
    for (int j = 0; j + 1 < n; ++j)
        dM(j, j + 1) = dM(j + 1, j) =
            2.0 * tau.r * A.c_diag(j) * A.b_off(j) * A.c_diag(j + 1);
    return dM;
}

Eigen::MatrixXd dA_dtheta(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                          const DualVector& k) {
    DispersionMatrix A = assemble(fs, lat, tau, k);
    const int n = A.n;
    Eigen::MatrixXd dM = Eigen::MatrixXd::Zero(n, n);
    if (k.mag == 0.0) return dM;
    const double r2 = tau.r * tau.r;
    // d(beta_j)/dtheta = -beta_j_perp and d(beta_j_perp)/dtheta = beta_j, so
    // d/dtheta (C B C + C D S) = -(S B C + C B S) + (C D C - S D S)
    for (int j = 0; j < n; ++j) {
        const double c = A.c_diag(j), s = A.s_diag(j);
        dM(j, j) = r2 * (-2.0 * s * c * A.b_diag(j) + (c * c - s * s) * A.d_diag(j));
    }
    for (int j = 0; j + 1 < n; ++j) {
        const double c0 = A.c_diag(j), s0 = A.s_diag(j);
        const double c1 = A.c_diag(j + 1), s1 = A.s_diag(j + 1);
        dM(j, j + 1) = dM(j + 1, j) = r2 * A.b_off(j) * (-s0 * c1 - c0 * s1);
    }
    return dM;
}

Eigen::MatrixXd adjugate(const Eigen::MatrixXd& M) {
    const int n = int(M.rows());
    Eigen::MatrixXd adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc++) = M(r, c);
                }
                ++rr;
            }
            const double cof = ((i + j) % 2 ? -1.0 : 1.0) * minor.determinant();
            adj(j, i) = cof;  // transpose of the cofactor matrix
        }
    return adj;
}

} // namespace stratiwave
