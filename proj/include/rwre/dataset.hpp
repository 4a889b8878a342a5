#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Persisted collection of regeneration increments: the empirical stand-in
// for the conditioned annealed law. Records are stored structure-of-arrays
// for fast tilted sums.
class SampleSet {
  public:
    struct Header {
        std::string model_hash;
        std::string model_json;
        Eigen::VectorXi direction;
        std::uint64_t seed = 0;
        int lookahead = 0;
        std::uint64_t count = 0;
        bool nestling = false;
        bool assumption_warning = false;
        std::string creation_params;  // free-form JSON
    };

    SampleSet() = default;
    SampleSet(Header h, const std::vector<RegenSample>& records);

    static SampleSet from_harvest(const EnvironmentModel& model, const Direction& ell,
                                  const HarvestResult& harvest, std::uint64_t seed,
                                  int lookahead);

    const Header& header() const { return header_; }
    int dim() const { return static_cast<int>(header_.direction.size()); }
    std::size_t size() const { return dtau_.size(); }

    // record accessors; dx components of record i at dx()[i*dim + a]
    const std::vector<std::int32_t>& dx() const { return dx_; }
    const std::vector<std::int64_t>& dtau() const { return dtau_; }
    const std::vector<std::int64_t>& sup_disp() const { return sup_disp_; }
    RegenSample record(std::size_t i) const;

    // exceedance counts of dtau and sup_disp at thresholds 1,2,4,8,...
    struct TailStats {
        std::vector<std::int64_t> thresholds;
        std::vector<std::uint64_t> dtau_exceed;
        std::vector<std::uint64_t> sup_exceed;
    };
    TailStats tail_stats() const;

    void save(const std::string& path) const;
    static SampleSet load(const std::string& path);
    void export_csv(const std::string& path) const;

    SampleSet permuted(std::uint64_t seed) const;  // test helper
    SampleSet resampled(std::uint64_t seed) const;  // bootstrap resample

  private:
    Header header_;
    std::vector<std::int32_t> dx_;
    std::vector<std::int64_t> dtau_;
    std::vector<std::int64_t> sup_disp_;
};

struct VelocityEstimate {
    Eigen::VectorXd v;          // mean(dx) / mean(dtau)
    Eigen::MatrixXd boot_cov;   // bootstrap covariance of v
    Eigen::VectorXd ci_radius;  // per-component 2.5%..97.5% half-width
    int bootstrap_rounds = 0;
};

VelocityEstimate velocity(const SampleSet& s, int bootstrap_rounds = 200,
                          std::uint64_t seed = 1);

enum class TailField { Dtau, SupDisp };

struct TailExponent {
    double c_hat = 0.0;   // decay rate of log P(field > t) ~ a - c t
    double se = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    bool subexponential_suspected = false;
    double curvature_z = 0.0;  // z-score of the quadratic term
    std::vector<double> thresholds;
    std::vector<double> log_survival;
};

// Least-squares fit over upper-decile thresholds with at least 30
// exceedances each; throws if the tail has too little data.
TailExponent tail_exponent(const SampleSet& s, TailField field);

}  // namespace rwre
