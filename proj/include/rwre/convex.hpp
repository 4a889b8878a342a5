#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace rwre {

struct FnEval {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

// Evaluator plus a trustworthy-domain predicate. The Hessian must be
// symmetric PSD wherever the predicate holds.
struct SmoothConvexFn {
    int dim = 0;
    std::function<bool(const Eigen::VectorXd&)> in_domain;
    std::function<FnEval(const Eigen::VectorXd&)> eval;
};

struct LegendreOptions {
    Eigen::VectorXd start;       // empty = origin
    double tol = 1e-8;           // on ||x - grad F|| relative to 1+||x||
    int max_iter = 120;
    int max_backtracks = 60;
    double divergence_value = 1e8;  // treat the sup as +infinity beyond this
};

struct LegendreResult {
    double value = 0.0;
    Eigen::VectorXd argmax;
    bool converged = false;      // gradient condition met at an interior point
    bool wall_limited = false;   // line search pinned at the domain wall
    bool diverged = false;       // value exceeded the divergence guard (F* = +inf)
    int iterations = 0;
};

// F*(x) = sup_lambda lambda.x - F(lambda) by damped Newton with domain-wall
// backtracking. A wall-limited value is a certified lower bound on F*(x).
LegendreResult legendre(const SmoothConvexFn& F, const Eigen::VectorXd& x,
                        const LegendreOptions& opts = {});

struct RootOptions {
    double tol = 1e-10;
    int max_iter = 200;
    bool nonpositive_only = false;  // nestling case: root sought in lambda <= 0
    double bracket_step = 0.25;
};

struct RootResult {
    double lambda = 0.0;
    bool found = false;
    bool at_zero_boundary = false;  // nonpositive case with g(0) == 0 within tol
    std::string message;
};

// Root of the scalar increasing function g(lambda) by bracketed Newton with
// bisection fallback; g/g' supplied by the caller. domain(lam) guards the
// trustworthy region.
RootResult solve_implicit_root(const std::function<double(double)>& g,
                               const std::function<double(double)>& gprime,
                               const std::function<bool(double)>& domain,
                               const RootOptions& opts = {});

struct DualityPointReport {
    Eigen::VectorXd lambda;
    double grad_residual = 0.0;    // ||grad F*(grad F(l)) - l||
    double hess_residual = 0.0;    // rel error of D2F*(gradF(l)) vs (D2F(l))^-1
    double biconj_residual = 0.0;  // |F**(l) - F(l)|
    bool ok = false;
};

struct DualityReport {
    std::vector<DualityPointReport> points;
    bool all_ok = true;
};

// Appendix-style identities: grad F* o grad F = id, Hessian inverse relation
// (finite-difference Hessian of F*), and F** = F.
DualityReport verify_duality(const SmoothConvexFn& F,
                             const std::vector<Eigen::VectorXd>& test_points,
                             double grad_tol = 1e-6, double hess_rel_tol = 1e-4,
                             double biconj_tol = 1e-6);

}  // namespace rwre
