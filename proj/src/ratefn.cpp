#include "rwre/ratefn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwre {

const char* to_string(Region r) {
    switch (r) {
        case Region::Aplus: return "A+";
        case Region::Azero: return "A0";
        case Region::Aminus: return "A-";
        case Region::Aprime: return "A'";
        case Region::Outside: return "outside";
        case Region::Wall: return "wall";
    }
    return "?";
}

const char* to_string(TiltLabel l) {
    switch (l) {
        case TiltLabel::Cplus: return "C+";
        case TiltLabel::Czero: return "C0";
        case TiltLabel::OutsideC: return "outside";
    }
    return "?";
}

namespace {

SmoothConvexFn joint_fn(const CgfSource& src, double s) {
    SmoothConvexFn F;
    F.dim = src.dim() + 1;
    F.in_domain = [&src](const Eigen::VectorXd& t) {
        return src.in_domain(t.head(t.size() - 1), t[t.size() - 1]);
    };
    F.eval = [&src, s](const Eigen::VectorXd& t) {
        CgfEstimate e = src.eval(t.head(t.size() - 1), t[t.size() - 1]);
        FnEval out;
        out.value = s * e.value;
        out.grad = s * e.grad;
        out.hess = s * e.hess;
        return out;
    };
    return F;
}

SmoothConvexFn marginal_fn(const CgfSource& src, double s) {
    SmoothConvexFn F;
    F.dim = src.dim();
    F.in_domain = [&src](const Eigen::VectorXd& eta) { return src.in_domain(eta, 0.0); };
    F.eval = [&src, s](const Eigen::VectorXd& eta) {
        CgfEstimate e = src.eval(eta, 0.0);
        FnEval out;
        const int d = static_cast<int>(eta.size());
        out.value = s * e.value;
        out.grad = s * e.grad.head(d);
        out.hess = s * e.hess.topLeftCorner(d, d);
        return out;
    };
    return F;
}

struct InnerSup {
    double f = 0.0;
    Eigen::VectorXd eta;
    double lambda = 0.0;
    bool wall = false;
    bool pinned = false;
    bool diverged = false;
    bool converged = false;
};

// sup over (eta, lambda) of (eta,lambda).(v,1) - s Lambda(eta,lambda).
// For nestling sources the lambda <= 0 constraint is handled in two phases:
// an unconstrained solve over eta at lambda = 0 first; the pin is kept when
// the lambda-gradient pushes into the forbidden half-line.
InnerSup inner_sup(const CgfSource& src, const Eigen::VectorXd& v, double s,
                   const Eigen::VectorXd& start_eta, double start_lambda,
                   const RateOptions& opts) {
    const int d = src.dim();
    Eigen::VectorXd point(d + 1);
    point.head(d) = v;
    point[d] = 1.0;

    InnerSup out;
    LegendreOptions lo;
    lo.tol = opts.legendre_tol;
    lo.divergence_value = opts.infinite_value;

    if (src.nestling()) {
        // phase A: lambda pinned at 0
        SmoothConvexFn Fm = marginal_fn(src, s);
        LegendreOptions lm = lo;
        lm.start = (start_eta.size() == d) ? start_eta : Eigen::VectorXd::Zero(d);
        if (!Fm.in_domain(lm.start)) lm.start = Eigen::VectorXd::Zero(d);
        auto ra = legendre(Fm, v, lm);
        if (ra.diverged) {
            out.diverged = true;
            out.f = ra.value;
            out.eta = ra.argmax;
            return out;
        }
        CgfEstimate ea = src.eval(ra.argmax, 0.0);
        double dlambda = 1.0 - s * ea.grad[d];  // objective lambda-gradient at the wall
        if (dlambda >= -opts.legendre_tol) {
            out.f = ra.argmax.dot(v) - s * ea.value;
            out.eta = ra.argmax;
            out.lambda = 0.0;
            out.pinned = true;
            out.wall = !ra.converged;
            out.converged = ra.converged;
            return out;
        }
        // interior optimum in lambda < 0
        lo.start = Eigen::VectorXd(d + 1);
        lo.start.head(d) = ra.argmax;
        lo.start[d] = -1e-6;
        if (!src.in_domain(ra.argmax, -1e-6)) lo.start[d] = 0.0;
        auto rb = legendre(joint_fn(src, s), point, lo);
        out.f = rb.value;
        out.eta = rb.argmax.head(d);
        out.lambda = rb.argmax[d];
        out.wall = rb.wall_limited;
        out.diverged = rb.diverged;
        out.converged = rb.converged;
        return out;
    }

    lo.start = Eigen::VectorXd(d + 1);
    if (start_eta.size() == d) {
        lo.start.head(d) = start_eta;
        lo.start[d] = start_lambda;
    } else {
        lo.start.setZero();
    }
    if (!src.in_domain(lo.start.head(d), lo.start[d])) lo.start.setZero();
    auto r = legendre(joint_fn(src, s), point, lo);
    out.f = r.value;
    out.eta = r.argmax.head(d);
    out.lambda = r.argmax[d];
    out.wall = r.wall_limited;
    out.diverged = r.diverged;
    out.converged = r.converged;
    return out;
}

}  // namespace

RateIResult rate_I(const CgfSource& src, const Eigen::VectorXd& x, double t,
                   const RateOptions& opts) {
    if (x.size() != src.dim()) throw std::invalid_argument("rate_I: dimension mismatch");
    const int d = src.dim();
    Eigen::VectorXd point(d + 1);
    point.head(d) = x;
    point[d] = t;

    // I(x,t) = sup (eta,lambda).(x,t) - Lambda; reuse the s=1 machinery with
    // the generalization that the time coordinate is t instead of 1
    LegendreOptions lo;
    lo.tol = opts.legendre_tol;
    lo.divergence_value = opts.infinite_value;

    RateIResult res;
    if (src.nestling()) {
        // same two-phase treatment as inner_sup, with weight t on lambda
        SmoothConvexFn Fm = marginal_fn(src, 1.0);
        LegendreOptions lm = lo;
        auto ra = legendre(Fm, x, lm);
        if (ra.diverged) {
            res.value = ra.value;
            res.infinite = true;
            res.eta = ra.argmax;
            return res;
        }
        CgfEstimate ea = src.eval(ra.argmax, 0.0);
        double dlambda = t - ea.grad[src.dim()];
        if (dlambda >= -opts.legendre_tol) {
            res.value = ra.argmax.dot(x) - ea.value;
            res.eta = ra.argmax;
            res.lambda = 0.0;
            res.wall_limited = !ra.converged;
            res.ess = ea.ess;
            return res;
        }
        lo.start = Eigen::VectorXd(d + 1);
        lo.start.head(d) = ra.argmax;
        lo.start[d] = src.in_domain(ra.argmax, -1e-6) ? -1e-6 : 0.0;
    }
    auto r = legendre(joint_fn(src, 1.0), point, lo);
    res.value = r.value;
    res.eta = r.argmax.head(d);
    res.lambda = r.argmax[d];
    res.wall_limited = r.wall_limited;
    res.infinite = r.diverged;
    res.ess = src.eval(res.eta, res.lambda).ess;
    return res;
}

double rate_f(const CgfSource& src, const Eigen::VectorXd& v, double s,
              const RateOptions& opts) {
    InnerSup is = inner_sup(src, v, s, Eigen::VectorXd(), 0.0, opts);
    return is.f;
}

RatePoint rate_J(const CgfSource& src, const Eigen::VectorXd& v, const RateOptions& opts) {
    const int d = src.dim();
    if (v.size() != d) throw std::invalid_argument("rate_J: dimension mismatch");
    if (src.ell_unit().dot(v) <= 0.0)
        throw std::invalid_argument("rate_J: velocity outside H_ell (v.ell <= 0)");

    RatePoint rp;
    rp.v = v;

    // coarse log grid over s in (s_min, 1], warm-started continuation from 1
    const int G = std::max(4, opts.s_grid);
    std::vector<double> sgrid(G);
    const double ls0 = std::log(opts.s_min), ls1 = 0.0;
    for (int j = 0; j < G; ++j)
        sgrid[j] = std::exp(ls1 + (ls0 - ls1) * static_cast<double>(j) / (G - 1));
    // sgrid descends from 1 toward s_min

    std::vector<double> fvals(G);
    std::vector<InnerSup> sols(G);
    Eigen::VectorXd warm_eta;
    double warm_lambda = 0.0;
    for (int j = 0; j < G; ++j) {
        sols[j] = inner_sup(src, v, sgrid[j], warm_eta, warm_lambda, opts);
        fvals[j] = sols[j].diverged ? std::numeric_limits<double>::infinity() : sols[j].f;
        if (!sols[j].diverged) {
            warm_eta = sols[j].eta;
            warm_lambda = sols[j].lambda;
        }
    }

    int best = 0;
    for (int j = 1; j < G; ++j)
        if (fvals[j] < fvals[best]) best = j;

    if (!std::isfinite(fvals[best])) {
        rp.infinite = true;
        rp.J = std::numeric_limits<double>::infinity();
        rp.region = Region::Outside;
        return rp;
    }

    // f is convex in s; refine on the bracket around the best grid point,
    // using fprime(s) = -Lambda(dual(s)) from the envelope
    double lo_s = (best + 1 < G) ? sgrid[best + 1] : sgrid[best];  // grid descends
    double hi_s = (best > 0) ? sgrid[best - 1] : sgrid[best];
    auto fprime = [&](double s, InnerSup& sol) {
        sol = inner_sup(src, v, s, warm_eta, warm_lambda, opts);
        if (sol.diverged) return std::numeric_limits<double>::infinity();
        warm_eta = sol.eta;
        warm_lambda = sol.lambda;
        CgfEstimate e = src.eval(sol.eta, sol.lambda);
        return -e.value;
    };

    InnerSup fsol = sols[best];
    double s_star = sgrid[best];
    bool boundary = false;
    InnerSup tmp;
    double fp_hi = fprime(hi_s, tmp);
    if (hi_s >= 1.0 - 1e-15 && fp_hi <= 0.0) {
        // minimizer at the admissible boundary s = 1
        s_star = 1.0;
        fsol = tmp;
        boundary = true;
    } else {
        double fp_lo = fprime(lo_s, tmp);
        if (fp_lo >= 0.0) {
            s_star = lo_s;
            fsol = tmp;
        } else {
            // bracketed root of the nondecreasing fprime
            double a = lo_s, b = hi_s;
            double fa = fp_lo, fb = fp_hi;
            InnerSup sol_mid;
            for (int it = 0; it < 200; ++it) {
                double m;
                if (std::isfinite(fa) && std::isfinite(fb) && fb > fa && fa < 0.0 && fb > 0.0) {
                    m = a - fa * (b - a) / (fb - fa);  // secant
                    if (!(m > a && m < b)) m = 0.5 * (a + b);
                } else {
                    m = 0.5 * (a + b);
                }
                double fm = fprime(m, sol_mid);
                if (std::abs(fm) <= opts.s_polish_tol || (b - a) < 1e-13 * (1.0 + b)) {
                    a = b = m;
                    break;
                }
                if (fm > 0.0) {
                    b = m;
                    fb = fm;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            s_star = 0.5 * (a + b);
            fsol = inner_sup(src, v, s_star, warm_eta, warm_lambda, opts);
        }
    }

    rp.s_star = s_star;
    rp.s_at_boundary = boundary;
    rp.J = fsol.f;
    if (rp.J < 0.0 && rp.J > -1e-9) rp.J = 0.0;  // solver roundoff at the zero set
    rp.eta_star = fsol.eta;
    rp.lambda_star = fsol.lambda;
    rp.grad_J = fsol.eta;
    rp.wall_limited = fsol.wall;
    rp.lambda_pinned = fsol.pinned;
    rp.infinite = fsol.diverged;

    CgfEstimate at_dual = src.eval(fsol.eta, fsol.lambda);
    rp.ess_at_dual = at_dual.ess;
    rp.se = s_star * at_dual.se;

    // region label
    if (rp.infinite) {
        rp.region = Region::Outside;
    } else if (rp.wall_limited) {
        rp.region = Region::Wall;
    } else if (!src.nestling()) {
        if (opts.c2_hat > 0.0)
            rp.region = (rp.eta_star.norm() < opts.c2_hat / 4.0) ? Region::Aprime : Region::Outside;
        else
            rp.region = Region::Aprime;
    } else if (!rp.lambda_pinned) {
        rp.region = Region::Aplus;
    } else if (rp.s_at_boundary) {
        rp.region = Region::Outside;
    } else {
        CgfEstimate at_wall = src.eval(fsol.eta, 0.0);
        double theta = s_star * at_wall.grad[d];
        rp.region = (theta >= 1.0 - opts.theta_tol) ? Region::Azero : Region::Aminus;
    }
    return rp;
}

RateJ1Result rate_J1(const CgfSource& src, const Eigen::VectorXd& v, const RateOptions& opts) {
    const int d = src.dim();
    if (v.size() != d) throw std::invalid_argument("rate_J1: dimension mismatch");
    if (src.ell_unit().dot(v) <= 0.0)
        throw std::invalid_argument("rate_J1: velocity outside H_ell (v.ell <= 0)");

    RateJ1Result out;
    LegendreOptions lo;
    lo.tol = opts.legendre_tol;
    lo.divergence_value = opts.infinite_value;

    Eigen::VectorXd warm = Eigen::VectorXd::Zero(d);
    auto solve_at = [&](double s, bool& diverged, Eigen::VectorXd& eta, bool& wall) {
        SmoothConvexFn F = marginal_fn(src, s);
        LegendreOptions li = lo;
        li.start = warm;
        if (!F.in_domain(li.start)) li.start = Eigen::VectorXd::Zero(d);
        auto r = legendre(F, v, li);
        diverged = r.diverged;
        wall = r.wall_limited;
        eta = r.argmax;
        if (!r.diverged) warm = r.argmax;
        return r.value;
    };
    auto fprime = [&](double s) {
        bool div, wall;
        Eigen::VectorXd eta;
        solve_at(s, div, eta, wall);
        if (div) return std::numeric_limits<double>::infinity();
        return -src.eval(eta, 0.0).value;
    };

    // bracket the root of fprime over a wide log range of s
    const double smin = 1e-4, smax = 1e4;
    const int G = 40;
    double prev_s = smax, prev_fp = fprime(smax);
    double a = 0.0, b = 0.0;
    bool bracketed = false;
    for (int j = 1; j < G; ++j) {
        double s = std::exp(std::log(smax) + (std::log(smin) - std::log(smax)) * j / (G - 1.0));
        double fp = fprime(s);
        if (std::isfinite(prev_fp) && std::isfinite(fp) && fp <= 0.0 && prev_fp >= 0.0) {
            a = s;
            b = prev_s;
            bracketed = true;
            break;
        }
        prev_s = s;
        prev_fp = fp;
    }
    double s_star;
    if (!bracketed) {
        // monotone fprime: the infimum sits at an end of the range; for the
        // degenerate-atom case every s with v/s = support point gives 0
        s_star = (prev_fp > 0.0) ? smin : smax;
    } else {
        double fa = fprime(a), fb = fprime(b);
        for (int it = 0; it < 200; ++it) {
            double m = (std::isfinite(fa) && std::isfinite(fb) && fb > fa)
                           ? a - fa * (b - a) / (fb - fa)
                           : 0.5 * (a + b);
            if (!(m > a && m < b)) m = 0.5 * (a + b);
            double fm = fprime(m);
            if (std::abs(fm) <= opts.s_polish_tol || (b - a) < 1e-13 * (1.0 + b)) {
                a = b = m;
                break;
            }
            if (fm > 0.0) {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
        }
        s_star = 0.5 * (a + b);
    }

    bool div, wall;
    Eigen::VectorXd eta;
    double f = solve_at(s_star, div, eta, wall);
    out.J1 = std::abs(f) < 1e-12 ? std::max(0.0, f) : f;
    out.s_star = s_star;
    out.eta = eta;
    out.wall_limited = wall;
    out.infinite = div;
    return out;
}

GammaPoint gamma_map(const CgfSource& src, const Eigen::VectorXd& eta, const RateOptions& opts) {
    const int d = src.dim();
    if (eta.size() != d) throw std::invalid_argument("gamma_map: dimension mismatch");
    if (!src.in_domain(eta, 0.0))
        throw TiltDomainError(src.eval(eta, 0.0).ess);

    GammaPoint gp;
    gp.eta = eta;

    CgfEstimate marg = src.eval(eta, 0.0);
    gp.h = marg.grad[d];
    gp.marginal_value = marg.value;
    gp.marginal_se = marg.se;

    if (std::abs(marg.value) <= opts.band_se_mult * marg.se)
        gp.label = TiltLabel::Czero;
    else if (marg.value > 0.0)
        gp.label = TiltLabel::Cplus;
    else
        gp.label = TiltLabel::OutsideC;

    if (src.nestling() && gp.label == TiltLabel::Czero && marg.value <= 0.0) {
        // inside the statistical C0 band: the root is pinned at the lambda
        // wall rather than chased into lambda > 0
        gp.lambda = 0.0;
    } else {
        RootOptions ro;
        ro.nonpositive_only = src.nestling();
        auto g = [&](double lam) { return src.eval(eta, lam).value; };
        auto gp_fn = [&](double lam) { return src.eval(eta, lam).grad[d]; };
        auto dom = [&](double lam) { return src.in_domain(eta, lam); };
        RootResult rr = solve_implicit_root(g, gp_fn, dom, ro);
        if (!rr.found) throw std::runtime_error("gamma_map: " + rr.message);
        gp.lambda = rr.lambda;
    }

    CgfEstimate tilted = src.eval(eta, gp.lambda);
    gp.gamma = tilted.grad.head(d) / tilted.grad[d];
    // s0 = 1 / mean(dtau e^{eta.dx + lambda dtau}) with the unnormalized mean
    gp.s0 = 1.0 / (tilted.grad[d] * std::exp(tilted.value));
    return gp;
}

Eigen::VectorXd grad_J(const CgfSource& src, const Eigen::VectorXd& v, const RateOptions& opts) {
    RatePoint rp = rate_J(src, v, opts);
    if (rp.wall_limited)
        throw std::runtime_error("grad_J: dual is wall-limited; gradient unreliable");
    return rp.grad_J;
}

Eigen::VectorXd grad_J_fd(const CgfSource& src, const Eigen::VectorXd& v, double step,
                          const RateOptions& opts) {
    const int d = src.dim();
    Eigen::VectorXd g(d);
    for (int a = 0; a < d; ++a) {
        Eigen::VectorXd vp = v, vm = v;
        vp[a] += step;
        vm[a] -= step;
        g[a] = (rate_J(src, vp, opts).J - rate_J(src, vm, opts).J) / (2.0 * step);
    }
    return g;
}

RegionMap region_scan(const CgfSource& src, const RegionScanOptions& opts) {
    const int d = src.dim();
    if (d != 2) throw std::invalid_argument("region_scan: implemented for d = 2");

    CgfEstimate origin = src.eval(Eigen::VectorXd::Zero(d), 0.0);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(origin.hess);
    double scale = 1.0 + std::abs(origin.hess.trace());
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12 * scale).all())
        throw std::runtime_error("region_scan: degenerate sample covariance (no region to scan)");

    RegionMap map;
    map.nestling = src.nestling();
    map.c1_hat = opts.rate.c1_hat;
    map.c2_hat = opts.rate.c2_hat;
    double ball = map.nestling ? opts.rate.c1_hat : opts.rate.c2_hat / 2.0;
    if (ball <= 0.0) throw std::invalid_argument("region_scan: tail constants not estimable");
    map.trust_radius = opts.safety * ball;

    for (int ia = 0; ia < opts.angles; ++ia) {
        double phi = 2.0 * M_PI * ia / opts.angles;
        Eigen::Vector2d u(std::cos(phi), std::sin(phi));
        for (int ir = 1; ir <= opts.radii; ++ir) {
            double r = map.trust_radius * ir / opts.radii;
            RegionMap::GridPoint g;
            g.eta = r * u;
            if (!src.in_domain(g.eta, 0.0)) {
                map.grid.push_back(std::move(g));
                continue;
            }
            try {
                GammaPoint gp = gamma_map(src, g.eta, opts.rate);
                g.label = gp.label;
                g.gamma = gp.gamma;
                g.lambda = gp.lambda;
                g.s0 = gp.s0;
                g.ok = true;
                map.usable_points += 1;
            } catch (const std::exception&) {
                g.label = TiltLabel::OutsideC;
            }
            map.grid.push_back(std::move(g));
        }
    }
    if (map.usable_points == 0)
        throw std::runtime_error("region_scan: degenerate grid (all tilts at walls)");

    // injectivity of gamma on the C+ grid
    std::vector<const RegionMap::GridPoint*> cp;
    for (const auto& g : map.grid)
        if (g.ok && g.label == TiltLabel::Cplus) cp.push_back(&g);
    for (size_t i = 0; i < cp.size() && map.gamma_injective; ++i)
        for (size_t j = i + 1; j < cp.size(); ++j) {
            double deta = (cp[i]->eta - cp[j]->eta).norm();
            double dg = (cp[i]->gamma - cp[j]->gamma).norm();
            if (deta > 1e-9 && dg < 1e-12) {
                map.gamma_injective = false;
                break;
            }
        }

    if (map.nestling) {
        // trace C0: along each ray the marginal dips negative iff u.mean < 0;
        // find the nonzero root of Lambda_X(t u) = 0 inside the ball
        Eigen::VectorXd m = src.eval(Eigen::VectorXd::Zero(d), 0.0).grad.head(d);
        for (int ia = 0; ia < 2 * opts.angles; ++ia) {
            double phi = 2.0 * M_PI * ia / (2 * opts.angles);
            Eigen::Vector2d u(std::cos(phi), std::sin(phi));
            if (u.dot(m) >= 0.0) continue;  // marginal grows immediately: only the trivial root
            auto val = [&](double t) { return src.eval(t * u, 0.0).value; };
            double t_hi = map.trust_radius;
            if (!src.in_domain(t_hi * u, 0.0)) {
                // shrink to the domain wall
                double lo = 0.0, hi = t_hi;
                for (int it = 0; it < 40; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (src.in_domain(mid * u, 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                t_hi = lo;
            }
            if (t_hi <= 0.0 || val(t_hi) <= 0.0) continue;  // no recovery inside the ball
            double lo = t_hi * 1e-3, hi = t_hi;
            if (val(lo) >= 0.0) {
                // positive immediately: numerical fuzz near zero, skip
                continue;
            }
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if (val(mid) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            double t_root = 0.5 * (lo + hi);
            try {
                GammaPoint gp = gamma_map(src, Eigen::VectorXd(t_root * u), opts.rate);
                map.czero_eta.push_back(t_root * u);
                map.azero_v.push_back(gp.gamma);
                for (double th : {opts.theta_lo, 0.5 * (opts.theta_lo + opts.theta_hi), opts.theta_hi})
                    map.aminus_v.push_back(th * gp.gamma);
            } catch (const std::exception&) {
                // wall-limited root: leave it out of the trace
            }
        }
        // the trivial C0 point eta = 0 maps to v_P; kept separate from the
        // traced polyline so neighbor-based tangents stay angular-ordered
        GammaPoint g0 = gamma_map(src, Eigen::VectorXd::Zero(d), opts.rate);
        map.vp_image = g0.gamma;

        // disjointness of A- and A0 via the outward-normal test n.v0 > 0
        for (size_t i = 0; i + 2 < map.azero_v.size(); ++i) {
            Eigen::Vector2d t2 = map.azero_v[i + 2] - map.azero_v[i];
            if (t2.norm() < 1e-12) continue;
            Eigen::Vector2d n(-t2[1], t2[0]);
            // orient toward A+ using the image of a C+ push of the middle tilt
            Eigen::Vector2d eta_mid = map.czero_eta[i + 1];
            Eigen::VectorXd gplus = src.eval(eta_mid, 0.0).grad.head(d);  // grad of marginal
            Eigen::Vector2d eta_push = eta_mid + 0.05 * map.trust_radius * Eigen::Vector2d(gplus).normalized();
            try {
                GammaPoint gp = gamma_map(src, Eigen::VectorXd(eta_push), opts.rate);
                Eigen::Vector2d vplus = gp.gamma;
                if (n.dot(vplus - Eigen::Vector2d(map.azero_v[i + 1])) < 0.0) n = -n;
                if (n.dot(Eigen::Vector2d(map.azero_v[i + 1])) <= 0.0) map.aminus_disjoint = false;
            } catch (const std::exception&) {
                continue;
            }
        }
    }
    return map;
}

}  // namespace rwre
