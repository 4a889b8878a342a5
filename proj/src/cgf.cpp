#include "rwre/cgf.hpp"

#include <cmath>
#include <limits>

namespace rwre {

EmpiricalCgf::EmpiricalCgf(const SampleSet& samples, CgfOptions opts)
    : samples_(samples), opts_(opts), d_(samples.dim()), K_(samples.size()) {
    if (K_ < 2) throw std::invalid_argument("cgf: need at least 2 records");
}

bool EmpiricalCgf::nestling() const {
    return opts_.nestling_guard && samples_.header().nestling;
}

CgfEstimate EmpiricalCgf::eval(const Eigen::VectorXd& eta, double lambda) const {
    if (eta.size() != d_) throw std::invalid_argument("cgf: tilt dimension mismatch");
    const int m = d_ + 1;
    CgfEstimate est;
    est.grad = Eigen::VectorXd::Zero(m);
    est.hess = Eigen::MatrixXd::Zero(m, m);

    if (nestling() && lambda > 0.0) {
        est.value = std::numeric_limits<double>::infinity();
        est.infinite = true;
        est.ess = 0.0;
        return est;
    }

    const auto& dx = samples_.dx();
    const auto& dt = samples_.dtau();

    // pass 1: max exponent for the log-sum-exp shift
    double amax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K_; ++i) {
        double a = lambda * static_cast<double>(dt[i]);
        for (int c = 0; c < d_; ++c) a += eta[c] * dx[i * d_ + c];
        amax = std::max(amax, a);
    }

    // pass 2: shifted weights and tilted moments in one sweep
    double S = 0.0, S2 = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd M2 = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd z(m);
    for (std::size_t i = 0; i < K_; ++i) {
        double a = lambda * static_cast<double>(dt[i]);
        for (int c = 0; c < d_; ++c) a += eta[c] * dx[i * d_ + c];
        double w = std::exp(a - amax);
        for (int c = 0; c < d_; ++c) z[c] = dx[i * d_ + c];
        z[d_] = static_cast<double>(dt[i]);
        S += w;
        S2 += w * w;
        g.noalias() += w * z;
        M2.noalias() += w * z * z.transpose();
    }

    est.value = amax + std::log(S / static_cast<double>(K_));
    est.grad = g / S;
    est.hess = M2 / S - est.grad * est.grad.transpose();
    est.ess = S * S / S2;
    // se of log of a sample mean: sqrt(1/ess - 1/K)
    est.se = std::sqrt(std::max(0.0, 1.0 / est.ess - 1.0 / static_cast<double>(K_)));
    return est;
}

double EmpiricalCgf::ess_at(const Eigen::VectorXd& eta, double lambda) const {
    const auto& dx = samples_.dx();
    const auto& dt = samples_.dtau();
    double amax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K_; ++i) {
        double a = lambda * static_cast<double>(dt[i]);
        for (int c = 0; c < d_; ++c) a += eta[c] * dx[i * d_ + c];
        amax = std::max(amax, a);
    }
    double S = 0.0, S2 = 0.0;
    for (std::size_t i = 0; i < K_; ++i) {
        double a = lambda * static_cast<double>(dt[i]);
        for (int c = 0; c < d_; ++c) a += eta[c] * dx[i * d_ + c];
        double w = std::exp(a - amax);
        S += w;
        S2 += w * w;
    }
    return S * S / S2;
}

bool EmpiricalCgf::in_domain(const Eigen::VectorXd& eta, double lambda) const {
    if (nestling() && lambda > 0.0) return false;
    return ess_at(eta, lambda) >= opts_.ess_floor;
}

Eigen::VectorXd EmpiricalCgf::mean_dx() const {
    // same accumulation order as the tilted sum at zero tilt, so the zero-tilt
    // gradient equals this mean bitwise
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d_);
    const auto& dx = samples_.dx();
    for (std::size_t i = 0; i < K_; ++i)
        for (int c = 0; c < d_; ++c) g[c] += 1.0 * dx[i * d_ + c];
    return g / static_cast<double>(K_);
}

double EmpiricalCgf::mean_dtau() const {
    double s = 0.0;
    for (std::size_t i = 0; i < K_; ++i) s += 1.0 * samples_.dtau()[i];
    return s / static_cast<double>(K_);
}

Eigen::VectorXd EmpiricalCgf::ell_unit() const {
    Eigen::VectorXd e = samples_.header().direction.cast<double>();
    return e / e.norm();
}

CgfEstimate cgf_eval(const SampleSet& s, const TiltPoint& t, const CgfOptions& opts) {
    if (s.size() < 1000) throw std::invalid_argument("cgf_eval: need at least 1e3 records");
    EmpiricalCgf cgf(s, opts);
    CgfEstimate est = cgf.eval(t.eta, t.lambda);
    if (est.infinite) return est;
    if (est.ess < opts.ess_floor) throw TiltDomainError(est.ess);
    return est;
}

MarginalEstimate cgf_marginal(const SampleSet& s, const Eigen::VectorXd& eta,
                              const CgfOptions& opts) {
    TiltPoint t{eta, 0.0};
    CgfEstimate joint = cgf_eval(s, t, opts);
    MarginalEstimate out;
    const int d = s.dim();
    out.h = joint.grad[d];
    out.cgf.value = joint.value;
    out.cgf.grad = joint.grad.head(d);
    out.cgf.hess = joint.hess.topLeftCorner(d, d);
    out.cgf.ess = joint.ess;
    out.cgf.se = joint.se;
    return out;
}

}  // namespace rwre
