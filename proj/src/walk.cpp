#include "rwre/walk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

namespace rwre {

namespace {

// pack a lattice site into a hashable key; coordinates at desk scale stay
// far below the 21-bit-per-axis packing range for d<=3
std::uint64_t site_key(const std::int32_t* x, int dim) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (int a = 0; a < dim; ++a) {
        std::uint64_t v = static_cast<std::uint32_t>(x[a]);
        h ^= v;
        h *= 0x100000001B3ULL;
    }
    return h;
}

struct CumProbs {
    std::vector<double> cum;  // cumulative over the 2d steps
    void from(const Eigen::VectorXd& p) {
        cum.resize(p.size());
        double acc = 0.0;
        for (int i = 0; i < p.size(); ++i) {
            acc += p[i];
            cum[i] = acc;
        }
        cum.back() = 1.0;
    }
    int draw(double u) const {
        return static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    }
};

class EnvSampler {
  public:
    EnvSampler(const EnvironmentModel& model, CounterRng& rng, const SimLimits& limits)
        : model_(model), rng_(rng), limits_(limits) {
        if (model.kind == ModelKind::Deterministic) {
            det_.from(model.probs[0]);
        } else if (model.kind == ModelKind::FiniteMixture) {
            comp_cum_.resize(model.weights.size());
            double acc = 0.0;
            for (size_t i = 0; i < model.weights.size(); ++i) {
                acc += model.weights[i];
                comp_cum_[i] = acc;
            }
            comp_cum_.back() = 1.0;
            mix_.resize(model.probs.size());
            for (size_t i = 0; i < model.probs.size(); ++i) mix_[i].from(model.probs[i]);
        }
    }

    int step(const std::int32_t* x, int dim) {
        switch (model_.kind) {
            case ModelKind::Deterministic:
                return det_.draw(rng_.next_double());
            case ModelKind::FiniteMixture: {
                std::uint64_t key = site_key(x, dim);
                auto it = comp_at_.find(key);
                if (it == comp_at_.end()) {
                    guard(comp_at_.size());
                    double u = rng_.next_double();
                    int c = static_cast<int>(
                        std::lower_bound(comp_cum_.begin(), comp_cum_.end(), u) - comp_cum_.begin());
                    it = comp_at_.emplace(key, c).first;
                }
                return mix_[it->second].draw(rng_.next_double());
            }
            case ModelKind::Dirichlet: {
                std::uint64_t key = site_key(x, dim);
                auto it = dir_at_.find(key);
                if (it == dir_at_.end()) {
                    guard(dir_at_.size());
                    const int s = num_steps(model_.dimension);
                    Eigen::VectorXd g(s);
                    for (int e = 0; e < s; ++e) g[e] = rng_.next_gamma(model_.alpha[e]);
                    g /= g.sum();
                    CumProbs cp;
                    cp.from(g);
                    it = dir_at_.emplace(key, std::move(cp)).first;
                }
                return it->second.draw(rng_.next_double());
            }
        }
        throw std::logic_error("unreachable");
    }

  private:
    void guard(std::size_t n) const {
        if (n >= limits_.max_cached_sites)
            throw std::runtime_error("simulate_annealed: visited-site cache budget exceeded");
    }

    const EnvironmentModel& model_;
    CounterRng& rng_;
    SimLimits limits_;
    CumProbs det_;
    std::vector<double> comp_cum_;
    std::vector<CumProbs> mix_;
    std::unordered_map<std::uint64_t, int> comp_at_;
    std::unordered_map<std::uint64_t, CumProbs> dir_at_;
};

}  // namespace

Trajectory simulate_annealed(const EnvironmentModel& model, int horizon,
                             std::uint64_t seed, std::uint64_t stream,
                             const SimLimits& limits) {
    model.validate();
    if (horizon < 0) throw std::invalid_argument("simulate_annealed: negative horizon");
    const int d = model.dimension;
    Trajectory traj;
    traj.dim = d;
    traj.seed = seed;
    traj.stream = stream;
    traj.positions.assign(static_cast<size_t>(horizon + 1) * d, 0);

    CounterRng rng(seed, stream);
    EnvSampler env(model, rng, limits);

    std::vector<std::int32_t> x(d, 0);
    for (int n = 0; n < horizon; ++n) {
        int k = env.step(x.data(), d);
        x[step_axis(k)] += step_sign(k);
        std::copy(x.begin(), x.end(), traj.positions.begin() + static_cast<size_t>(n + 1) * d);
    }
    return traj;
}

RegenRecord detect_regenerations(const Trajectory& traj, const Direction& ell, int lookahead) {
    if (lookahead < 1) throw std::invalid_argument("detect_regenerations: lookahead must be >= 1");
    if (ell.dim() != traj.dim) throw std::invalid_argument("detect_regenerations: dimension mismatch");
    const int N = traj.steps();
    const int d = traj.dim;

    std::vector<std::int64_t> level(N + 1);
    for (int n = 0; n <= N; ++n) {
        std::int64_t s = 0;
        for (int a = 0; a < d; ++a)
            s += static_cast<std::int64_t>(traj.positions[static_cast<size_t>(n) * d + a]) * ell.lattice[a];
        level[n] = s;
    }

    std::vector<std::int64_t> suffix_min(N + 2);
    suffix_min[N + 1] = std::numeric_limits<std::int64_t>::max();
    for (int n = N; n >= 0; --n) suffix_min[n] = std::min(level[n], suffix_min[n + 1]);

    RegenRecord rec;
    std::int64_t running_max = level[0];
    std::vector<int> confirmed;
    for (int n = 1; n <= N; ++n) {
        if (level[n] > running_max && suffix_min[n] >= level[n]) {
            if (n + lookahead <= N)
                confirmed.push_back(n);
            else
                rec.unconfirmed.push_back(n);
        }
        running_max = std::max(running_max, level[n]);
    }
    rec.times = std::move(confirmed);
    rec.confirmed_upto = static_cast<int>(rec.times.size());

    // sup L1 displacement over each confirmed-to-confirmed gap
    rec.sup_excursions.reserve(rec.times.size() > 0 ? rec.times.size() - 1 : 0);
    for (size_t i = 0; i + 1 < rec.times.size(); ++i) {
        int a = rec.times[i], b = rec.times[i + 1];
        std::int64_t sup = 0;
        for (int n = a + 1; n <= b; ++n) {
            std::int64_t l1 = 0;
            for (int ax = 0; ax < d; ++ax)
                l1 += std::abs(static_cast<std::int64_t>(traj.positions[static_cast<size_t>(n) * d + ax]) -
                               traj.positions[static_cast<size_t>(a) * d + ax]);
            sup = std::max(sup, l1);
        }
        rec.sup_excursions.push_back(sup);
    }
    return rec;
}

void check_sample_invariants(const RegenSample& s, const Direction& ell) {
    std::int64_t l1 = 0;
    for (int a = 0; a < s.dx.size(); ++a) l1 += std::abs(static_cast<std::int64_t>(s.dx[a]));
    if (s.dtau < 1) throw std::logic_error("regen sample: dtau < 1");
    if (l1 > s.dtau) throw std::logic_error("regen sample: |dx|_1 > dtau");
    if (((l1 ^ s.dtau) & 1) != 0) throw std::logic_error("regen sample: parity violation");
    if (ell.level(s.dx) <= 0) throw std::logic_error("regen sample: dx.ell <= 0");
    if (s.sup_disp > s.dtau) throw std::logic_error("regen sample: sup_disp > dtau");
}

namespace {

std::vector<RegenSample> samples_from_trajectory(const Trajectory& traj, const Direction& ell,
                                                 int lookahead) {
    RegenRecord rec = detect_regenerations(traj, ell, lookahead);
    std::vector<RegenSample> out;
    const int d = traj.dim;
    for (size_t i = 0; i + 1 < rec.times.size(); ++i) {
        RegenSample s;
        s.dx = traj.at(rec.times[i + 1]) - traj.at(rec.times[i]);
        s.dtau = rec.times[i + 1] - rec.times[i];
        s.sup_disp = rec.sup_excursions[i];
        (void)d;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

HarvestResult harvest_increments(const EnvironmentModel& model, const Direction& ell,
                                 std::size_t target, std::uint64_t seed,
                                 const HarvestOptions& opts) {
    model.validate();
    HarvestResult result;

    NestlingClass cls = classify_environment(model, ell);
    bool regime_ok = cls.non_nestling_in_direction ||
                     (cls.label == NestlingLabel::Nestling && model.dimension >= 2);
    if (!regime_ok) {
        result.diag.assumption_warning = true;
        result.diag.warning =
            "model is outside the ballisticity regimes (non-nestling in direction, or nestling with d>=2)";
    }
    if (model.assumption_violating()) {
        result.diag.assumption_warning = true;
        result.diag.warning += (result.diag.warning.empty() ? "" : "; ");
        result.diag.warning += "uniform ellipticity assumption violated (Dirichlet test model)";
    }

    const int L = opts.lookahead;
    const int seg = opts.segment_steps > 0 ? opts.segment_steps
                                           : std::max(64 * L, 1 << 16);
    const int workers = std::max(1, opts.workers);

    std::mutex mu;
    std::vector<std::optional<std::vector<RegenSample>>> per_traj;
    std::atomic<std::uint64_t> next_traj{0};
    std::atomic<std::uint64_t> collected{0};
    std::atomic<std::uint64_t> steps_used{0};
    std::atomic<bool> abort_flag{false};
    std::string abort_msg;

    auto run_one = [&](std::uint64_t idx) {
        Trajectory traj = simulate_annealed(model, seg, seed, idx, opts.limits);
        return samples_from_trajectory(traj, ell, L);
    };

    auto work = [&]() {
        for (;;) {
            if (abort_flag.load()) return;
            if (collected.load() >= target) return;
            std::uint64_t idx = next_traj.fetch_add(1);
            std::uint64_t used = steps_used.fetch_add(seg) + seg;
            if (used > opts.max_total_steps) {
                std::lock_guard<std::mutex> lk(mu);
                abort_msg =
                    "harvest: step budget exhausted before reaching the requested sample count "
                    "(non-ballistic model or mis-specified direction?)";
                abort_flag.store(true);
                return;
            }
            std::vector<RegenSample> samples;
            try {
                samples = run_one(idx);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(mu);
                abort_msg = e.what();
                abort_flag.store(true);
                return;
            }
            std::lock_guard<std::mutex> lk(mu);
            if (per_traj.size() <= idx) per_traj.resize(idx + 1);
            collected.fetch_add(samples.size());
            per_traj[idx] = std::move(samples);
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (abort_flag.load()) throw std::runtime_error(abort_msg);

    // Deterministic merge in trajectory order, truncated to the target.
    // Workers stop on a racy sample-count check, so low indices may be
    // missing; fill them synchronously to keep the result equal to the
    // sequential one.
    result.samples.reserve(target);
    for (std::uint64_t idx = 0; result.samples.size() < target; ++idx) {
        if (idx >= per_traj.size()) per_traj.resize(idx + 1);
        if (!per_traj[idx].has_value()) {
            std::uint64_t used = steps_used.fetch_add(seg) + seg;
            if (used > opts.max_total_steps)
                throw std::runtime_error(
                    "harvest: step budget exhausted before reaching the requested sample count "
                    "(non-ballistic model or mis-specified direction?)");
            per_traj[idx] = run_one(idx);
        }
        for (auto& s : *per_traj[idx]) {
            if (result.samples.size() == target) break;
            check_sample_invariants(s, ell);
            result.samples.push_back(std::move(s));
        }
        result.diag.trajectories += 1;
    }
    result.diag.total_steps = steps_used.load();
    result.diag.confirmed_regens = collected.load();
    return result;
}

double measure_lookahead_violation(const EnvironmentModel& model, const Direction& ell,
                                   int lookahead, int horizon, int trajectories,
                                   std::uint64_t seed) {
    std::uint64_t confirmed = 0, violated = 0;
    for (int t = 0; t < trajectories; ++t) {
        Trajectory full = simulate_annealed(model, 2 * horizon, seed, 0x10000000ULL + t);
        // view of the first half
        Trajectory half;
        half.dim = full.dim;
        half.positions.assign(full.positions.begin(),
                              full.positions.begin() + static_cast<size_t>(horizon + 1) * full.dim);
        RegenRecord short_rec = detect_regenerations(half, ell, lookahead);
        RegenRecord long_rec = detect_regenerations(full, ell, lookahead);
        std::size_t j = 0;
        for (int n : short_rec.times) {
            ++confirmed;
            while (j < long_rec.times.size() && long_rec.times[j] < n) ++j;
            if (j == long_rec.times.size() || long_rec.times[j] != n) ++violated;
        }
    }
    if (confirmed == 0) return 0.0;
    return static_cast<double>(violated) / static_cast<double>(confirmed);
}

}  // namespace rwre
