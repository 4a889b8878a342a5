#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "rwre/dataset.hpp"

namespace rwre {

struct TiltPoint {
    Eigen::VectorXd eta;
    double lambda = 0.0;
};

struct CgfEstimate {
    double value = 0.0;
    Eigen::VectorXd grad;   // (d+1): tilted mean of (dx, dtau)
    Eigen::MatrixXd hess;   // (d+1)x(d+1): tilted covariance
    double ess = 0.0;       // (sum w)^2 / sum w^2
    double se = 0.0;        // standard error of value
    bool infinite = false;  // nestling guard tripped (lambda > 0)
};

struct TiltDomainError : std::runtime_error {
    double ess;
    explicit TiltDomainError(double e)
        : std::runtime_error("tilt out of trustworthy domain (ess=" + std::to_string(e) + ")"),
          ess(e) {}
};

// Common interface over the joint CGF of the regeneration increment: the
// empirical one below, and the exact d=1 ladder-law one in verify. All
// downstream solvers treat in_domain() exits as hard walls.
class CgfSource {
  public:
    virtual ~CgfSource() = default;
    virtual int dim() const = 0;
    virtual bool nestling() const = 0;  // lambda > 0 is a wall (empirical CGFs stay finite there)
    virtual double count() const = 0;
    virtual bool in_domain(const Eigen::VectorXd& eta, double lambda) const = 0;
    virtual CgfEstimate eval(const Eigen::VectorXd& eta, double lambda) const = 0;
    virtual Eigen::VectorXd mean_dx() const = 0;
    virtual double mean_dtau() const = 0;
    virtual Eigen::VectorXd ell_unit() const = 0;  // the regeneration direction
};

struct CgfOptions {
    bool nestling_guard = false;
    double ess_floor = 200.0;
};

class EmpiricalCgf : public CgfSource {
  public:
    EmpiricalCgf(const SampleSet& samples, CgfOptions opts = {});

    int dim() const override { return d_; }
    bool nestling() const override;
    double count() const override { return static_cast<double>(K_); }
    bool in_domain(const Eigen::VectorXd& eta, double lambda) const override;
    CgfEstimate eval(const Eigen::VectorXd& eta, double lambda) const override;
    Eigen::VectorXd mean_dx() const override;
    double mean_dtau() const override;
    Eigen::VectorXd ell_unit() const override;

    const CgfOptions& options() const { return opts_; }
    double ess_at(const Eigen::VectorXd& eta, double lambda) const;

  private:
    const SampleSet& samples_;
    CgfOptions opts_;
    int d_;
    std::size_t K_;
};

// Spec-facing operations. cgf_eval throws TiltDomainError below the ess
// floor; with the nestling guard on and lambda > 0 it returns the
// distinguished infinite estimate instead of a finite empirical number.
CgfEstimate cgf_eval(const SampleSet& s, const TiltPoint& t, const CgfOptions& opts = {});

struct MarginalEstimate {
    CgfEstimate cgf;  // of Lambda_X(eta) = Lambda(eta, 0), grad/hess over eta only
    double h = 0.0;   // tilted mean of dtau at (eta, 0)
};

MarginalEstimate cgf_marginal(const SampleSet& s, const Eigen::VectorXd& eta,
                              const CgfOptions& opts = {});

}  // namespace rwre
