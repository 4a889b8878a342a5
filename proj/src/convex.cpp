#include "rwre/convex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwre {

LegendreResult legendre(const SmoothConvexFn& F, const Eigen::VectorXd& x,
                        const LegendreOptions& opts) {
    const int k = F.dim;
    if (x.size() != k) throw std::invalid_argument("legendre: point dimension mismatch");

    Eigen::VectorXd lam = opts.start.size() == k ? opts.start : Eigen::VectorXd::Zero(k);
    if (!F.in_domain(lam)) throw std::invalid_argument("legendre: start outside domain");

    LegendreResult res;
    res.argmax = lam;
    FnEval fe = F.eval(lam);
    double obj = lam.dot(x) - fe.value;
    bool wall_hit = false;

    for (int it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        Eigen::VectorXd grad = x - fe.grad;  // gradient of the concave objective
        double gnorm = grad.norm();
        if (gnorm <= opts.tol * (1.0 + x.norm())) {
            // a converged report certifies a unique interior maximizer, which
            // needs a nondegenerate Hessian at the stationary point
            Eigen::LDLT<Eigen::MatrixXd> chk(fe.hess);
            double scale = 1.0 + std::abs(fe.hess.trace());
            res.converged = chk.info() == Eigen::Success && chk.isPositive() &&
                            (chk.vectorD().array() > 1e-13 * scale).all();
            break;
        }

        // Newton direction on the concave objective: H = -D2F
        Eigen::LDLT<Eigen::MatrixXd> ldlt(fe.hess);
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            step = ldlt.solve(grad);
        } else {
            // PSD violation beyond roundoff would break the contract; treat a
            // numerically singular Hessian as a gradient step
            step = grad;
        }
        if (!step.allFinite()) step = grad;

        double alpha = 1.0;
        bool moved = false;
        wall_hit = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            Eigen::VectorXd cand = lam + alpha * step;
            if (!F.in_domain(cand)) {
                wall_hit = true;
                alpha *= 0.5;
                continue;
            }
            FnEval fc = F.eval(cand);
            double oc = cand.dot(x) - fc.value;
            if (oc > obj + 1e-18 || (oc >= obj && alpha < 1.0)) {
                lam = cand;
                fe = fc;
                obj = oc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) {
            // no admissible ascent step: either at the wall or numerically
            // stationary
            break;
        }
        if (obj > opts.divergence_value) {
            res.diverged = true;
            break;
        }
    }

    res.value = obj;
    res.argmax = lam;
    if (!res.converged) res.wall_limited = true;
    if (res.diverged) {
        res.converged = false;
        res.wall_limited = false;
    }
    return res;
}

RootResult solve_implicit_root(const std::function<double(double)>& g,
                               const std::function<double(double)>& gprime,
                               const std::function<bool(double)>& domain,
                               const RootOptions& opts) {
    RootResult res;
    const double upper_limit = opts.nonpositive_only ? 0.0 : std::numeric_limits<double>::infinity();

    double hi = opts.nonpositive_only ? 0.0 : 0.0;
    if (!domain(hi)) {
        res.message = "no trustworthy point at lambda = 0";
        return res;
    }
    double ghi = g(hi);

    if (opts.nonpositive_only) {
        if (ghi < -opts.tol) {
            res.message = "no root in closed domain (Lambda_X(eta) < 0)";
            return res;
        }
        if (ghi <= opts.tol) {
            res.lambda = 0.0;
            res.found = true;
            res.at_zero_boundary = true;
            return res;
        }
    } else if (ghi < 0.0) {
        // expand upward until the sign flips or the wall is hit
        double step = opts.bracket_step;
        double lo2 = hi;
        for (int i = 0; i < 200; ++i) {
            double cand = lo2 + step;
            if (!domain(cand)) {
                step *= 0.5;
                if (step < 1e-12) {
                    res.message = "domain wall reached before a sign change (root untrustworthy)";
                    return res;
                }
                continue;
            }
            double gc = g(cand);
            lo2 = cand;
            if (gc >= 0.0) {
                hi = cand;
                ghi = gc;
                break;
            }
            if (i == 199) {
                res.message = "no sign change found while expanding upward";
                return res;
            }
        }
        if (ghi < 0.0) {
            res.message = "no sign change found while expanding upward";
            return res;
        }
    }

    // find lo with g(lo) < 0 by stepping down
    double lo = std::min(hi, 0.0);
    double glo = (lo == hi) ? ghi : g(lo);
    double step = opts.bracket_step;
    while (glo > 0.0) {
        double cand = lo - step;
        if (!domain(cand)) {
            step *= 0.5;
            if (step < 1e-12) {
                res.message = "domain wall reached before a bracket (root untrustworthy)";
                return res;
            }
            continue;
        }
        glo = g(cand);
        lo = cand;
        step *= 2.0;
    }
    if (g(lo) > 0.0) {
        res.message = "failed to bracket";
        return res;
    }

    // bracketed Newton with bisection fallback
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iter; ++it) {
        double gv = g(lam);
        if (std::abs(gv) <= opts.tol) {
            res.lambda = std::min(lam, upper_limit);
            res.found = true;
            res.at_zero_boundary = opts.nonpositive_only && std::abs(lam) <= opts.tol;
            return res;
        }
        if (gv > 0.0)
            hi = lam;
        else
            lo = lam;
        double gp = gprime(lam);
        double next = (gp > 0.0) ? lam - gv / gp : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        lam = next;
        if (hi - lo < 1e-15 * (1.0 + std::abs(hi))) break;
    }
    double gv = g(lam);
    if (std::abs(gv) <= 1e3 * opts.tol) {
        res.lambda = std::min(lam, upper_limit);
        res.found = true;
        return res;
    }
    res.message = "root iteration did not converge";
    return res;
}

namespace {

Eigen::MatrixXd fd_hessian_of_conjugate(const SmoothConvexFn& F, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& warm_start) {
    const int k = F.dim;
    const double h = 1e-5 * (1.0 + x.norm());
    Eigen::MatrixXd H(k, k);
    LegendreOptions lo;
    lo.start = warm_start;
    // grad F*(x) = argmax; differentiate the argmax map by central differences
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        auto rp = legendre(F, xp, lo);
        auto rm = legendre(F, xm, lo);
        H.col(j) = (rp.argmax - rm.argmax) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

}  // namespace

DualityReport verify_duality(const SmoothConvexFn& F,
                             const std::vector<Eigen::VectorXd>& test_points,
                             double grad_tol, double hess_rel_tol, double biconj_tol) {
    DualityReport rep;
    for (const auto& lam : test_points) {
        DualityPointReport pr;
        pr.lambda = lam;
        FnEval fe = F.eval(lam);
        Eigen::VectorXd x = fe.grad;

        LegendreOptions lo;
        lo.start = lam;
        auto r = legendre(F, x, lo);
        // grad F*(x) = argmax lambda(x); must recover lam
        pr.grad_residual = (r.argmax - lam).norm();

        Eigen::MatrixXd Hstar = fd_hessian_of_conjugate(F, x, r.argmax);
        Eigen::MatrixXd Hinv = fe.hess.inverse();
        pr.hess_residual = (Hstar - Hinv).norm() / std::max(1e-300, Hinv.norm());

        // F**(lam) = sup_x lam.x - F*(x); evaluate via the dual function
        // G(x) = F*(x) computed by inner legendre solves
        SmoothConvexFn Fstar;
        Fstar.dim = F.dim;
        Fstar.in_domain = [&](const Eigen::VectorXd& xx) {
            LegendreOptions li;
            li.start = r.argmax;
            auto ri = legendre(F, xx, li);
            return !ri.diverged;
        };
        Fstar.eval = [&](const Eigen::VectorXd& xx) {
            LegendreOptions li;
            li.start = r.argmax;
            auto ri = legendre(F, xx, li);
            FnEval out;
            out.value = ri.value;
            out.grad = ri.argmax;  // grad F*(x) = maximizer
            // Hessian of F* from the inverse relation
            out.hess = F.eval(ri.argmax).hess.inverse();
            return out;
        };
        auto rr = legendre(Fstar, lam, LegendreOptions{Eigen::VectorXd(x), 1e-9, 120, 60, 1e8});
        pr.biconj_residual = std::abs(rr.value - fe.value);

        pr.ok = pr.grad_residual <= grad_tol && pr.hess_residual <= hess_rel_tol &&
                pr.biconj_residual <= biconj_tol;
        rep.all_ok = rep.all_ok && pr.ok;
        rep.points.push_back(std::move(pr));
    }
    return rep;
}

}  // namespace rwre
