#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/rng.hpp"

namespace rwre {

struct Trajectory {
    int dim = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    // positions[(n)*dim + a], n = 0..N; X_0 = 0
    std::vector<std::int32_t> positions;

    int steps() const { return static_cast<int>(positions.size()) / dim - 1; }
    Eigen::VectorXi at(int n) const {
        Eigen::VectorXi x(dim);
        for (int a = 0; a < dim; ++a) x[a] = positions[static_cast<size_t>(n) * dim + a];
        return x;
    }
};

struct SimLimits {
    std::size_t max_cached_sites = 1u << 25;
};

// One lazily generated environment per trajectory realizes the annealed law:
// site vectors are drawn at first visit and cached for the trajectory's
// lifetime, never shared across trajectories.
Trajectory simulate_annealed(const EnvironmentModel& model, int horizon,
                             std::uint64_t seed, std::uint64_t stream = 0,
                             const SimLimits& limits = {});

struct RegenRecord {
    std::vector<int> times;             // confirmed regeneration times
    int confirmed_upto = 0;             // == times.size()
    std::vector<int> unconfirmed;       // candidates in the final lookahead window
    std::vector<std::int64_t> sup_excursions;  // L1 sup over each confirmed gap
};

// Candidates are fresh strict maxima of X.ell never undercut within the
// observed horizon; a candidate n is confirmed iff n + L <= N.
RegenRecord detect_regenerations(const Trajectory& traj, const Direction& ell, int lookahead);

struct RegenSample {
    Eigen::VectorXi dx;
    std::int64_t dtau = 0;
    std::int64_t sup_disp = 0;  // sup of the L1 displacement within the gap
};

struct HarvestDiagnostics {
    std::uint64_t trajectories = 0;
    std::uint64_t total_steps = 0;
    std::uint64_t confirmed_regens = 0;
    bool assumption_warning = false;  // model outside the Assumption 1.3 regimes
    std::string warning;
};

struct HarvestOptions {
    int lookahead = 200;
    int segment_steps = 0;          // 0 = auto (max(64*L, 1<<16))
    std::uint64_t max_total_steps = 2'000'000'000ULL;
    int workers = 1;
    SimLimits limits;
};

struct HarvestResult {
    std::vector<RegenSample> samples;
    HarvestDiagnostics diag;
};

// Emits exactly `target` increments between consecutive confirmed
// regenerations with index i >= 1 (the pre-tau_1 piece has a different law
// and is discarded). Deterministic for fixed (model, ell, seed) and
// independent of the worker count.
HarvestResult harvest_increments(const EnvironmentModel& model, const Direction& ell,
                                 std::size_t target, std::uint64_t seed,
                                 const HarvestOptions& opts = {});

void check_sample_invariants(const RegenSample& s, const Direction& ell);

// Fraction of lookahead-confirmed regenerations in the first half of a run
// that are violated when the horizon is doubled.
double measure_lookahead_violation(const EnvironmentModel& model, const Direction& ell,
                                   int lookahead, int horizon, int trajectories,
                                   std::uint64_t seed);

}  // namespace rwre
