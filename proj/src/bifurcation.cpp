#include "stratiwave/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stratiwave/vertical_modes.hpp"

namespace stratiwave {

namespace {

// permutation matching candidate eigenvector columns to reference columns by
// greatest |overlap|; perm[label] = candidate column
std::vector<int> greedy_match(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& cand) {
    const int n = int(ref.cols());
    Eigen::MatrixXd O = (ref.transpose() * cand).cwiseAbs();
    std::vector<int> perm(size_t(n), -1);
    std::vector<bool> row_used(size_t(n), false), col_used(size_t(n), false);
    for (int pick = 0; pick < n; ++pick) {
        int br = -1, bc = -1;
        double best = -1.0;
        for (int r = 0; r < n; ++r) {
            if (row_used[size_t(r)]) continue;
            for (int c = 0; c < n; ++c) {
                if (col_used[size_t(c)]) continue;
                if (O(r, c) > best) {
                    best = O(r, c);
                    br = r;
                    bc = c;
                }
            }
        }
        perm[size_t(br)] = bc;
        row_used[size_t(br)] = true;
        col_used[size_t(bc)] = true;
    }
    return perm;
}

struct TrackedCurves {
    Eigen::MatrixXd mu;               // grid x n
    std::vector<Eigen::MatrixXd> xi;  // per angle
};

TrackedCurves track_curves(const FluidStack& fs, const Lattice& lat, const DualVector& k,
                           const std::vector<double>& theta) {
    const int N = int(theta.size()), n = fs.n;
    TrackedCurves tc;
    tc.mu.resize(N, n);
    tc.xi.resize(size_t(N));
    Eigen::MatrixXd ref;
    for (int l = 0; l < N; ++l) {
        EigenPairs ep = eigen_sym(assemble_R(fs, lat, theta[size_t(l)], k));
        Eigen::MatrixXd xi_l(n, n);
        Eigen::VectorXd mu_l(n);
        if (l == 0) {
            xi_l = ep.xi;
            mu_l = ep.mu;
        } else {
            const auto perm = greedy_match(ref, ep.xi);
            for (int lab = 0; lab < n; ++lab) {
                xi_l.col(lab) = ep.xi.col(perm[size_t(lab)]);
                mu_l(lab) = ep.mu(perm[size_t(lab)]);
            }
        }
        tc.mu.row(l) = mu_l.transpose();
        tc.xi[size_t(l)] = xi_l;
        // only adopt a new reference when the spectrum is well separated;
        // through (near-)degeneracies the old directions keep labels stable
        double gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < n; ++i) gap = std::min(gap, ep.mu(i + 1) - ep.mu(i));
        const double scale = 1.0 + ep.mu.cwiseAbs().maxCoeff();
        if (l == 0 || n == 1 || gap > 1e-7 * scale) ref = xi_l;
    }
    return tc;
}

struct ModeSel {
    double mu = 0.0;
    Eigen::VectorXd xi;
    double overlap = 1.0;
};

ModeSel select_mode(const EigenPairs& ep, const Eigen::VectorXd& ref) {
    int best = 0;
    double bestov = -1.0;
    for (int c = 0; c < ep.xi.cols(); ++c) {
        const double ov = std::abs(ref.dot(ep.xi.col(c)));
        if (ov > bestov) {
            bestov = ov;
            best = c;
        }
    }
    return {ep.mu(best), ep.xi.col(best), bestov};
}

Eigen::VectorXd normalize_leading(Eigen::VectorXd v) {
    const double norm = v.norm();
    if (norm == 0.0) return v;
    v /= norm;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0.0) v = -v;
            break;
        }
    }
    return v;
}

} // namespace

EigencurveScan scan_eigencurves(const FluidStack& fs, const Lattice& lat, int grid) {
    if (grid < 8) throw ConfigError("scan grid must be >= 8");
    fs.validate();
    EigencurveScan sc;
    sc.n = fs.n;
    sc.theta.resize(size_t(grid));
    // offset grid: irrotational curves degenerate to the zero matrix at
    // gamma_i + pi/2 and gamma_1 = 0 would put that exactly on a plain grid
    for (int l = 0; l < grid; ++l) sc.theta[size_t(l)] = (l + 0.5) * M_PI / grid;

    TrackedCurves c1 = track_curves(fs, lat, lat.k1(), sc.theta);
    TrackedCurves c2 = track_curves(fs, lat, lat.k2(), sc.theta);
    sc.mu1 = std::move(c1.mu);
    sc.mu2 = std::move(c2.mu);
    sc.xi1 = std::move(c1.xi);
    sc.xi2 = std::move(c2.xi);

    for (int l = 0; l < grid; ++l) {
        const int l2 = (l + 1) % grid;
        const double th_lo = sc.theta[size_t(l)];
        const double th_hi = sc.theta[size_t(l2)] + (l2 == 0 ? M_PI : 0.0);
        for (int i = 0; i < sc.n; ++i)
            for (int k = 0; k < sc.n; ++k) {
                const double dlo = sc.mu1(l, i) - sc.mu2(l, k);
                const double dhi = sc.mu1(l2, i) - sc.mu2(l2, k);
                if (dlo * dhi < 0.0 || (dlo == 0.0 && dhi != 0.0))
                    sc.crossings.push_back({i, k, l, th_lo, th_hi});
            }
    }
    return sc;
}

RefinedCrossing refine_crossing(const FluidStack& fs, const Lattice& lat,
                                const EigencurveScan& scan,
                                const EigencurveScan::Bracket& br) {
    RefinedCrossing out;
    out.iota = br.iota;
    out.kappa = br.kappa;

    Eigen::VectorXd ref1 = scan.xi1[size_t(br.seg)].col(br.iota);
    Eigen::VectorXd ref2 = scan.xi2[size_t(br.seg)].col(br.kappa);

    struct Eval {
        double g = 0.0, mu1 = 0.0, mu_scale = 1.0;
        ModeSel s1, s2;
    };
    auto evaluate = [&](double th, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) {
        EigenPairs e1 = eigen_sym(assemble_R(fs, lat, th, lat.k1()));
        EigenPairs e2 = eigen_sym(assemble_R(fs, lat, th, lat.k2()));
        Eval ev;
        ev.s1 = select_mode(e1, r1);
        ev.s2 = select_mode(e2, r2);
        ev.g = ev.s1.mu - ev.s2.mu;
        ev.mu1 = ev.s1.mu;
        ev.mu_scale = std::max(1.0, e1.mu.cwiseAbs().maxCoeff());
        return ev;
    };

    double lo = br.theta_lo, hi = br.theta_hi;
    Eval elo = evaluate(lo, ref1, ref2), ehi = evaluate(hi, ref1, ref2);

    // the bracket came from tracked grid data; if the locally re-selected
    // curves do not change sign, re-scan the segment at 8x resolution
    if (elo.g * ehi.g > 0.0) {
        bool found = false;
        const int sub = 8;
        Eigen::VectorXd r1 = ref1, r2 = ref2;
        double a = lo;
        Eval ea = evaluate(a, r1, r2);
        for (int i = 1; i <= sub; ++i) {
            const double b = lo + (hi - lo) * double(i) / sub;
            Eval eb = evaluate(b, r1, r2);
            if (ea.g * eb.g <= 0.0) {
                lo = a;
                hi = b;
                elo = ea;
                ehi = eb;
                ref1 = r1;
                ref2 = r2;
                found = true;
                break;
            }
            if (eb.s1.overlap > 0.8) r1 = eb.s1.xi;
            if (eb.s2.overlap > 0.8) r2 = eb.s2.xi;
            a = b;
            ea = eb;
        }
        if (!found) {
            out.reason = "tangency: curves meet without a sign change at 8x resolution";
            return out;
        }
    }

    // bisection; references follow the midpoints while overlaps stay strong
    Eval em = elo;
    double mid = lo;
    bool converged = std::abs(elo.g) < 1e-12 * (1.0 + std::abs(elo.mu1));
    if (converged) mid = lo;
    for (int it = 0; it < 200 && !converged; ++it) {
        mid = 0.5 * (lo + hi);
        em = evaluate(mid, ref1, ref2);
        if (std::min(em.s1.overlap, em.s2.overlap) < 0.5) {
            out.reason = "eigenvector tracking lost during refinement";
            return out;
        }
        if (std::abs(em.g) < 1e-12 * (1.0 + std::abs(em.mu1))) {
            converged = true;
            break;
        }
        if (em.s1.overlap > 0.8) ref1 = em.s1.xi;
        if (em.s2.overlap > 0.8) ref2 = em.s2.xi;
        if (elo.g * em.g <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            elo = em;
        }
        if (hi - lo < 8e-16 * std::max(1.0, hi)) {
            mid = 0.5 * (lo + hi);
            em = evaluate(mid, ref1, ref2);
            converged = std::abs(em.g) < 1e-9 * (1.0 + std::abs(em.mu1));
            break;
        }
    }
    if (!converged) {
        out.reason = "crossing refinement did not converge";
        return out;
    }

    const double tol_mu = 1e-10 * em.mu_scale;
    if (em.mu1 >= -tol_mu) {
        out.reason = "crossing value is nonnegative: no real laminar amplitude solves it";
        return out;
    }
    out.accepted = true;
    out.theta_star = mid;
    out.mu_star = em.mu1;
    out.xi1 = em.s1.xi;
    out.xi2 = em.s2.xi;
    return out;
}

Eigen::Matrix2d compute_nu(const FluidStack& fs, const Lattice& lat, const Tau& tau,
                           const DualVector& k1, const DualVector& k2,
                           const Eigen::VectorXd& eta1, const Eigen::VectorXd& eta2) {
    Eigen::Matrix2d nu;
    nu(0, 0) = eta1.dot(dA_dr(fs, lat, tau, k1) * eta1);
    nu(0, 1) = eta1.dot(dA_dtheta(fs, lat, tau, k1) * eta1);
    nu(1, 0) = eta2.dot(dA_dr(fs, lat, tau, k2) * eta2);
    nu(1, 1) = eta2.dot(dA_dtheta(fs, lat, tau, k2) * eta2);
    return nu;
}

BifurcationPoint make_point(const FluidStack& fs, const Lattice& lat, double theta_star,
                            int iota, int kappa, const Eigen::VectorXd* ref1,
                            const Eigen::VectorXd* ref2) {
    if (iota < 0 || iota >= fs.n || kappa < 0 || kappa >= fs.n)
        throw ConfigError("eigencurve labels outside [0, n)");
    EigenPairs e1 = eigen_sym(assemble_R(fs, lat, theta_star, lat.k1()));
    EigenPairs e2 = eigen_sym(assemble_R(fs, lat, theta_star, lat.k2()));
    ModeSel s1 = ref1 ? select_mode(e1, *ref1) : ModeSel{e1.mu(iota), e1.xi.col(iota), 1.0};
    ModeSel s2 = ref2 ? select_mode(e2, *ref2) : ModeSel{e2.mu(kappa), e2.xi.col(kappa), 1.0};

    // Relative floor: a crossing value that is zero to rounding (e.g. the
    // cos^2 factor vanishing) would give an absurd laminar amplitude.
    const double mu_floor = 1e-12 * (1.0 + e1.mu.cwiseAbs().maxCoeff());
    if (s1.mu >= -mu_floor)
        throw NumericsError("crossing value is nonnegative: no real laminar amplitude");

    BifurcationPoint p;
    p.iota = iota;
    p.kappa = kappa;
    p.mu = s1.mu;
    p.tau_star = Tau{1.0 / std::sqrt(-s1.mu), theta_star};

    const Eigen::VectorXd sig1 =
        assemble(fs, lat, p.tau_star, lat.k1()).sigma_diag.array().sqrt().inverse();
    const Eigen::VectorXd sig2 =
        assemble(fs, lat, p.tau_star, lat.k2()).sigma_diag.array().sqrt().inverse();
    p.eta1 = normalize_leading(sig1.asDiagonal() * s1.xi);
    p.eta2 = normalize_leading(sig2.asDiagonal() * s2.xi);
    p.nu = compute_nu(fs, lat, p.tau_star, lat.k1(), lat.k2(), p.eta1, p.eta2);

    const auto kr1 = kernel(assemble(fs, lat, p.tau_star, lat.k1()));
    const auto kr2 = kernel(assemble(fs, lat, p.tau_star, lat.k2()));
    p.kernel_ok = kr1.dim == 1 && kr2.dim == 1;
    return p;
}

namespace {

double inf_norm(const Eigen::MatrixXd& M) {
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

// smallest wavenumber K beyond which every A(tau, k), |k| >= K, is strictly
// diagonally dominant with positive diagonal (hence nonsingular): row-wise
//   sigma_j k^2 + (rho_j - rho_{j+1}) g
//     > r^2 [ 2 (rho_j + rho_{j+1}) coth(q_min h_min) k + |D_j| ]
// using psi' <= k coth(q_min h_min) for all layers once k >= K > max|alpha|.
struct DominanceCutoff {
    double k_max = 0.0;
    bool certified = false;
};

DominanceCutoff dominance_cutoff(const FluidStack& fs, const Lattice& lat, const Tau& tau) {
    const int m = fs.m();
    double amax = 0.0, hmin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= m; ++j) {
        amax = std::max(amax, std::abs(fs.alpha(j)));
        hmin = std::min(hmin, fs.h(j));
    }
    const double r2 = tau.r * tau.r;
    double K = std::max(2.0 * std::max(lat.k1().mag, lat.k2().mag), 1.2 * amax + 1e-3);
    for (int iter = 0; iter < 200; ++iter) {
        const double qmin = std::sqrt(K * K - amax * amax);
        const double ch = 1.0 / std::tanh(qmin * hmin);
        bool ok = true;
        for (int j = 1; j <= fs.n && ok; ++j) {
            const double rsum = fs.rho(j) + fs.rho(j + 1);
            const double dj = std::abs(fs.rho(j) * fs.alpha(j) -
                                       fs.rho(j + 1) * fs.alpha(j + 1));
            const double S = fs.sigma(j) * K * K + (fs.rho(j) - fs.rho(j + 1)) * fs.g -
                             r2 * (2.0 * rsum * ch * K + dj);
            const double Sp = 2.0 * fs.sigma(j) * K - r2 * 2.0 * rsum * ch;
            if (!(S > 0.0) || !(Sp > 0.0)) ok = false;
        }
        if (ok) return {K, true};
        K *= 1.25;
    }
    return {K, false};
}

} // namespace

VerificationReport verify_point(const FluidStack& fs, const Lattice& lat,
                                const BifurcationPoint& p) {
    VerificationReport rep;
    const Tau tau = p.tau_star;
    const DispersionMatrix A1 = assemble(fs, lat, tau, lat.k1());
    const DispersionMatrix A2 = assemble(fs, lat, tau, lat.k2());
    // Coefficient scale, not just ||A||_inf: at the bifurcation point the
    // assembled matrix itself cancels (exactly so for n = 1), which would
    // make a purely relative residual meaningless.
    const double nrm1 =
        std::max({inf_norm(A1.dense()), A1.sigma_diag.maxCoeff(), 1e-300});
    const double nrm2 =
        std::max({inf_norm(A2.dense()), A2.sigma_diag.maxCoeff(), 1e-300});

    const KernelResult k1r = kernel(A1);
    const KernelResult k2r = kernel(A2);
    rep.kernel.dim1 = k1r.dim;
    rep.kernel.dim2 = k2r.dim;
    rep.kernel.res1 = (A1.dense() * p.eta1).norm() / nrm1;
    rep.kernel.res2 = (A2.dense() * p.eta2).norm() / nrm2;
    rep.kernel.ok = k1r.dim == 1 && k2r.dim == 1 && rep.kernel.res1 <= 1e-8 &&
                    rep.kernel.res2 <= 1e-8;

    rep.transversality.det_nu = p.nu.determinant();
    rep.transversality.tol = 1e-10 * nrm1 * nrm2;
    rep.transversality.ok = std::abs(rep.transversality.det_nu) > rep.transversality.tol;

    // lattice classification (dual shell geometry)
    const double km1 = lat.k1().mag, km2 = lat.k2().mag;
    const double kshell = std::max(km1, km2);
    rep.lattice.symmetric = std::abs(km1 - km2) <= 1e-12 * kshell;
    rep.lattice.nondegenerate = true;
    for (const auto& dv : dual_lattice_points(lat, kshell * (1.0 + 1e-9))) {
        const bool is_gen = (std::abs(dv.m1) == 1 && dv.m2 == 0) ||
                            (dv.m1 == 0 && std::abs(dv.m2) == 1);
        if (is_gen) continue;
        if (std::abs(dv.mag - km1) <= 1e-12 * kshell ||
            std::abs(dv.mag - km2) <= 1e-12 * kshell)
            rep.lattice.nondegenerate = false;
    }

    // isolation: direct determinant scan below the certified cutoff
    const DominanceCutoff cut = dominance_cutoff(fs, lat, tau);
    rep.isolation.k_max = cut.k_max;
    rep.isolation.certified = cut.certified;
    rep.isolation.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& dv : dual_lattice_points(lat, cut.k_max)) {
        const bool is_gen = (std::abs(dv.m1) == 1 && dv.m2 == 0) ||
                            (dv.m1 == 0 && std::abs(dv.m2) == 1);
        if (is_gen) continue;
        const DispersionMatrix A = assemble(fs, lat, tau, dv);
        double scale = 1.0;
        for (int j = 0; j < A.n; ++j) scale *= A.sigma_diag(j);
        const double det = det_A(A);
        const double margin = std::abs(det) / scale;
        ++rep.isolation.scanned;
        rep.isolation.min_margin = std::min(rep.isolation.min_margin, margin);
        if (margin <= tol_det_rel)
            rep.isolation.violations.push_back({dv.m1, dv.m2, dv.mag, det, scale});
    }
    rep.isolation.ok = cut.certified && rep.isolation.violations.empty();

    rep.ok = rep.kernel.ok && rep.transversality.ok && rep.isolation.ok;
    return rep;
}

SigmaRescueResult sigma_rescue(const FluidStack& fs, const Lattice& lat,
                               const BifurcationPoint& point, std::optional<double> q_opt) {
    const double k1sq = lat.k1().mag * lat.k1().mag;

    auto attempt = [&](double q) {
        SigmaRescueResult res;
        res.q = q;
        FluidStack fq = fs;
        for (int j = 1; j <= fs.n; ++j) {
            const double sq =
                (1.0 + q) * fs.sigma(j) + q * fs.g * (fs.rho(j) - fs.rho(j + 1)) / k1sq;
            if (!(sq > 0.0)) return res;  // invalid member of the family
            fq.sigma_[size_t(j) - 1] = sq;
        }
        BifurcationPoint pq = point;
        pq.tau_star = Tau{std::sqrt(1.0 + q) * point.tau_star.r, point.tau_star.theta};
        pq.mu = point.mu / (1.0 + q);
        // kernels scale with A (exactly at k1, and at k2 on symmetric duals):
        // refresh them from the rescaled matrices when still one-dimensional
        const auto kr1 = kernel(assemble(fq, lat, pq.tau_star, lat.k1()));
        const auto kr2 = kernel(assemble(fq, lat, pq.tau_star, lat.k2()));
        if (kr1.dim == 1) pq.eta1 = kr1.basis.col(0);
        if (kr2.dim == 1) pq.eta2 = kr2.basis.col(0);
        pq.kernel_ok = kr1.dim == 1 && kr2.dim == 1;
        pq.nu = compute_nu(fq, lat, pq.tau_star, lat.k1(), lat.k2(), pq.eta1, pq.eta2);
        res.fluid = fq;
        res.point = pq;
        res.report = verify_point(fq, lat, pq);
        res.found = res.report.ok;
        return res;
    };

    if (q_opt) return attempt(*q_opt);

    SigmaRescueResult last;
    for (int i = 0; i < 9; ++i) {
        const double mag = 1e-4 * std::pow(2.0, i);
        for (double sign : {+1.0, -1.0}) {
            last = attempt(sign * mag);
            if (last.found) return last;
        }
    }
    last.found = false;
    return last;
}

ContinuationResult continue_alpha(const FluidStack& fs0, const Lattice& lat,
                                  const BifurcationPoint& point,
                                  const std::vector<double>& alpha_target, int steps) {
    ContinuationResult res;
    if (alpha_target.size() != fs0.alpha_.size())
        throw ConfigError("alpha_target must have length n+1");
    if (steps < 1) throw ConfigError("steps must be >= 1");

    auto det_pair = [&](const FluidStack& f, const Tau& tau, double* scale1, double* scale2) {
        const DispersionMatrix A1 = assemble(f, lat, tau, lat.k1());
        const DispersionMatrix A2 = assemble(f, lat, tau, lat.k2());
        double s1 = 1.0, s2 = 1.0;
        for (int j = 0; j < A1.n; ++j) s1 *= A1.sigma_diag(j);
        for (int j = 0; j < A2.n; ++j) s2 *= A2.sigma_diag(j);
        if (scale1) *scale1 = s1;
        if (scale2) *scale2 = s2;
        return Eigen::Vector2d(det_A(A1), det_A(A2));
    };

    auto rebuild = [&](const FluidStack& f, const Tau& tau, BifurcationPoint& out) {
        const DispersionMatrix A1 = assemble(f, lat, tau, lat.k1());
        const DispersionMatrix A2 = assemble(f, lat, tau, lat.k2());
        const KernelResult kr1 = kernel(A1), kr2 = kernel(A2);
        if (kr1.dim < 1 || kr2.dim < 1) return false;
        out = point;
        out.tau_star = tau;
        out.mu = -1.0 / (tau.r * tau.r);
        out.eta1 = kr1.basis.col(0);
        out.eta2 = kr2.basis.col(0);
        out.kernel_ok = kr1.dim == 1 && kr2.dim == 1;
        out.nu = compute_nu(f, lat, tau, lat.k1(), lat.k2(), out.eta1, out.eta2);
        return true;
    };

    // the starting point must lie on both determinant zero sets
    {
        double s1, s2;
        const Eigen::Vector2d G0 = det_pair(fs0, point.tau_star, &s1, &s2);
        if (std::abs(G0(0)) > 1e-6 * s1 || std::abs(G0(1)) > 1e-6 * s2)
            throw ConfigError("continuation start is not a simultaneous kernel point");
    }

    Tau tau = point.tau_star;
    FluidStack good_fs = fs0;
    Tau good_tau = tau;
    int done = 0;

    for (int s = 1; s <= steps; ++s) {
        FluidStack f = fs0;
        const double t = double(s) / steps;
        for (size_t j = 0; j < f.alpha_.size(); ++j)
            f.alpha_[j] = fs0.alpha_[j] + t * (alpha_target[j] - fs0.alpha_[j]);
        if (!check_non_resonance(f, lat).ok) {
            res.message = "resonant Beltrami constants on the continuation path";
            break;
        }

        bool converged = false;
        Tau t_try = tau;
        for (int it = 0; it < 50; ++it) {
            double s1, s2;
            const Eigen::Vector2d G = det_pair(f, t_try, &s1, &s2);
            if (std::abs(G(0)) <= 1e-11 * s1 && std::abs(G(1)) <= 1e-11 * s2) {
                converged = true;
                break;
            }
            Eigen::Matrix2d J;
            {
                const DispersionMatrix A1 = assemble(f, lat, t_try, lat.k1());
                const DispersionMatrix A2 = assemble(f, lat, t_try, lat.k2());
                const Eigen::MatrixXd adj1 = adjugate(A1.dense());
                const Eigen::MatrixXd adj2 = adjugate(A2.dense());
                J(0, 0) = (adj1 * dA_dr(f, lat, t_try, lat.k1())).trace();
                J(0, 1) = (adj1 * dA_dtheta(f, lat, t_try, lat.k1())).trace();
                J(1, 0) = (adj2 * dA_dr(f, lat, t_try, lat.k2())).trace();
                J(1, 1) = (adj2 * dA_dtheta(f, lat, t_try, lat.k2())).trace();
            }
            const double detJ = J.determinant();
            if (std::abs(detJ) < 1e-300) break;
            Eigen::Vector2d step = J.partialPivLu().solve(G);
            double damp = 1.0;
            while (t_try.r - damp * step(0) <= 0.0 && damp > 1e-8) damp *= 0.5;
            t_try.r -= damp * step(0);
            t_try.theta -= damp * step(1);
        }
        if (!converged) {
            res.message = "Newton iteration for the kernel conditions diverged";
            break;
        }
        tau = t_try;
        good_fs = f;
        good_tau = tau;
        done = s;
    }

    res.achieved_fraction = double(done) / steps;
    res.fluid = good_fs;
    BifurcationPoint p;
    if (!rebuild(good_fs, good_tau, p)) {
        res.ok = false;
        if (res.message.empty()) res.message = "kernel lost while rebuilding the point";
        res.point = point;
        res.report = verify_point(good_fs, lat, res.point);
        return res;
    }
    res.point = p;
    res.report = verify_point(good_fs, lat, p);
    res.ok = (done == steps);
    if (res.ok) res.message = "ok";
    return res;
}

TwoLayerReport check_two_layer_conditions(const FluidStack& fs, const Lattice& lat) {
    TwoLayerReport rep;
    rep.applicable = fs.n == 1;
    if (!rep.applicable) return rep;
    rep.gamma2 = lat.gamma2();

    auto flux = [&](double kmag) {
        double p = fs.rho(1) * psi_prime(fs, 1, kmag, fs.d(1));
        if (fs.rho(2) > 0.0) p += fs.rho(2) * psi_prime(fs, 2, kmag, fs.d(2));
        return p;
    };
    rep.p1 = flux(lat.k1().mag);
    rep.p2 = flux(lat.k2().mag);
    const double m1 = fs.rho(1) * fs.alpha(1);
    const double m2 = fs.rho(2) > 0.0 ? fs.rho(2) * fs.alpha(2) : 0.0;
    rep.dvort = m1 - m2;
    rep.alternative = std::abs(rep.dvort) <= 1e-14 * std::max(1.0, std::abs(m1) + std::abs(m2));
    rep.cond_flux = rep.p1 >= rep.p2 && rep.p2 > 0.0 && rep.dvort > 0.0;
    if (rep.dvort > 0.0) {
        rep.angle_diff = std::atan(rep.p1 / rep.dvort) - std::atan(rep.p2 / rep.dvort);
        rep.cond_angle = rep.angle_diff < rep.gamma2;
    }
    rep.ok = rep.alternative || (rep.cond_flux && rep.cond_angle);
    return rep;
}

PipelineResult find_bifurcation_points(const FluidStack& fs, const Lattice& lat,
                                       const PipelineOptions& opts) {
    PipelineResult out;
    const EigencurveScan scan = scan_eigencurves(fs, lat, opts.grid);

    std::vector<RefinedCrossing> accepted;
    for (const auto& br : scan.crossings) {
        RefinedCrossing rc = refine_crossing(fs, lat, scan, br);
        if (!rc.accepted) {
            out.rejections.push_back({br.iota, br.kappa, br.theta_lo, br.theta_hi, rc.reason});
            continue;
        }
        bool dup = false;
        for (const auto& a : accepted)
            if (a.iota == rc.iota && a.kappa == rc.kappa &&
                std::abs(a.theta_star - rc.theta_star) < 1e-8)
                dup = true;
        if (!dup) accepted.push_back(std::move(rc));
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const RefinedCrossing& a, const RefinedCrossing& b) {
                  if (a.iota != b.iota) return a.iota < b.iota;
                  if (a.kappa != b.kappa) return a.kappa < b.kappa;
                  return a.theta_star < b.theta_star;
              });

    int last_i = -1, last_k = -1;
    for (const auto& rc : accepted) {
        PipelinePoint pp;
        try {
            pp.point = make_point(fs, lat, rc.theta_star, rc.iota, rc.kappa, &rc.xi1, &rc.xi2);
        } catch (const NumericsError& e) {
            out.rejections.push_back(
                {rc.iota, rc.kappa, rc.theta_star, rc.theta_star, e.what()});
            continue;
        }
        pp.point.canonical = !(rc.iota == last_i && rc.kappa == last_k);
        last_i = rc.iota;
        last_k = rc.kappa;
        pp.report = verify_point(fs, lat, pp.point);
        if (opts.rescue && !pp.report.isolation.ok && pp.report.kernel.ok &&
            pp.report.transversality.ok) {
            SigmaRescueResult rr = sigma_rescue(fs, lat, pp.point);
            if (rr.found) {
                pp.rescued = true;
                pp.rescue_q = rr.q;
                pp.rescued_fluid = rr.fluid;
                pp.rescued_point = rr.point;
                pp.rescued_report = rr.report;
            }
        }
        out.points.push_back(std::move(pp));
    }
    return out;
}

} // namespace stratiwave
