#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "rwre/cgf.hpp"
#include "rwre/convex.hpp"

namespace rwre {

enum class Region { Aplus, Azero, Aminus, Aprime, Outside, Wall };
const char* to_string(Region r);

struct RateOptions {
    double s_min = 1e-3;
    int s_grid = 24;
    double s_polish_tol = 1e-12;   // on f'(s)
    double legendre_tol = 1e-9;
    double band_se_mult = 3.0;     // C0 band half-width in standard errors
    double theta_tol = 0.02;       // Azero vs Aminus split on theta = s* h(eta*)
    double c1_hat = 0.0;           // estimated tail constants (0 = unknown)
    double c2_hat = 0.0;
    double infinite_value = 1e8;
};

struct RatePoint {
    Eigen::VectorXd v;
    double J = 0.0;
    double s_star = 1.0;
    Eigen::VectorXd eta_star;
    double lambda_star = 0.0;
    Region region = Region::Outside;
    Eigen::VectorXd grad_J;      // = eta_star when duals are interior
    double ess_at_dual = 0.0;
    double se = 0.0;             // delta-method se of J
    bool wall_limited = false;   // ess wall reached (value is a lower bound)
    bool lambda_pinned = false;  // nestling lambda <= 0 constraint active
    bool s_at_boundary = false;  // minimizer attained at s = 1
    bool infinite = false;       // J = +infinity (outside reachable support)
};

struct RateIResult {
    double value = 0.0;
    Eigen::VectorXd eta;
    double lambda = 0.0;
    bool wall_limited = false;
    bool infinite = false;
    double ess = 0.0;
};

// Legendre transform of the joint CGF at (x, t); the lambda <= 0 wall is
// active for nestling sources.
RateIResult rate_I(const CgfSource& src, const Eigen::VectorXd& x, double t,
                   const RateOptions& opts = {});

// J(v) = inf_{0<s<=1} s I(v/s, 1/s), computed as inf_s sup_{eta,lambda}
// (eta,lambda).(v,1) - s Lambda(eta,lambda) with the duals reported.
RatePoint rate_J(const CgfSource& src, const Eigen::VectorXd& v, const RateOptions& opts = {});

// evaluate f(v,s) = s I(v/s, 1/s) at a fixed s (minimizer diagnostics)
double rate_f(const CgfSource& src, const Eigen::VectorXd& v, double s,
              const RateOptions& opts = {});

struct RateJ1Result {
    double J1 = 0.0;
    double s_star = 0.0;
    Eigen::VectorXd eta;
    bool wall_limited = false;
    bool infinite = false;
};

// J1(v) = inf_{s>0} s I1(v/s) with I1 the transform of the marginal CGF.
RateJ1Result rate_J1(const CgfSource& src, const Eigen::VectorXd& v,
                     const RateOptions& opts = {});

enum class TiltLabel { Cplus, Czero, OutsideC };
const char* to_string(TiltLabel l);

struct GammaPoint {
    Eigen::VectorXd eta;
    Eigen::VectorXd gamma;   // tilted mean velocity
    double h = 0.0;          // tilted mean of dtau at (eta, 0)
    double s0 = 0.0;         // 1 / (unnormalized tilted mean of dtau)
    double lambda = 0.0;     // root of Lambda(eta, .) = 0
    TiltLabel label = TiltLabel::Cplus;
    double marginal_value = 0.0;  // Lambda_X(eta)
    double marginal_se = 0.0;
};

// Solves lambda(eta) and maps the tilt to velocity space; throws when no
// root exists in the closed domain (eta outside C+ u C0 for nestling models).
GammaPoint gamma_map(const CgfSource& src, const Eigen::VectorXd& eta,
                     const RateOptions& opts = {});

Eigen::VectorXd grad_J(const CgfSource& src, const Eigen::VectorXd& v,
                       const RateOptions& opts = {});
// central finite differences of rate_J, for cross-checks
Eigen::VectorXd grad_J_fd(const CgfSource& src, const Eigen::VectorXd& v, double step,
                          const RateOptions& opts = {});

struct RegionMap {
    struct GridPoint {
        Eigen::VectorXd eta;
        TiltLabel label = TiltLabel::OutsideC;
        Eigen::VectorXd gamma;
        double lambda = 0.0;
        double s0 = 0.0;
        bool ok = false;  // gamma_map succeeded inside the trusted ball
    };
    std::vector<GridPoint> grid;
    // nestling boundary trace: eta on C0 and its image polyline (A0)
    std::vector<Eigen::VectorXd> czero_eta;
    std::vector<Eigen::VectorXd> azero_v;
    std::vector<Eigen::VectorXd> aminus_v;  // theta-scaled A0 samples
    Eigen::VectorXd vp_image;               // gamma(0) = v_P estimate (nestling)
    double c1_hat = 0.0, c2_hat = 0.0;
    double trust_radius = 0.0;
    bool nestling = false;
    bool gamma_injective = true;
    bool aminus_disjoint = true;  // outward-normal test n.v0 > 0 on A0 samples
    int usable_points = 0;
};

struct RegionScanOptions {
    int angles = 24;
    int radii = 8;
    double safety = 0.8;   // shrink factor on the tail-constant ball
    double theta_lo = 0.2; // A- sampling range
    double theta_hi = 0.9;
    RateOptions rate;
};

// d=2 scan of the trusted tilt ball; throws on degenerate inputs (all grid
// points at walls, or a singular CGF Hessian at the origin).
RegionMap region_scan(const CgfSource& src, const RegionScanOptions& opts = {});

}  // namespace rwre
