#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwre {

// Unit steps of Z^d are indexed +e1, -e1, +e2, -e2, ... (axis-major, positive
// first). All transition vectors and exit counts follow this order.
inline int num_steps(int dim) { return 2 * dim; }
inline int step_axis(int k) { return k / 2; }
inline int step_sign(int k) { return (k % 2 == 0) ? +1 : -1; }

// A direction ell with c*ell in Z^d. Level arithmetic is done against the
// integer lattice vector so regeneration comparisons are exact.
struct Direction {
    Eigen::VectorXi lattice;

    explicit Direction(Eigen::VectorXi v) : lattice(std::move(v)) {
        if (lattice.size() == 0 || lattice.isZero())
            throw std::invalid_argument("direction: lattice vector must be nonzero");
    }
    static Direction axis(int dim, int a = 0) {
        Eigen::VectorXi v = Eigen::VectorXi::Zero(dim);
        v[a] = 1;
        return Direction(v);
    }

    int dim() const { return static_cast<int>(lattice.size()); }
    double scale() const { return lattice.cast<double>().norm(); }
    Eigen::VectorXd unit() const { return lattice.cast<double>() / scale(); }

    // level of a lattice point in integer units (x . lattice)
    std::int64_t level(const Eigen::VectorXi& x) const {
        std::int64_t s = 0;
        for (int i = 0; i < dim(); ++i)
            s += static_cast<std::int64_t>(x[i]) * lattice[i];
        return s;
    }
    // signed level change of unit step k
    std::int64_t step_level(int k) const {
        return static_cast<std::int64_t>(step_sign(k)) * lattice[step_axis(k)];
    }
};

enum class ModelKind { Deterministic, FiniteMixture, Dirichlet };

struct EnvironmentModel {
    int dimension = 0;
    ModelKind kind = ModelKind::Deterministic;
    // Deterministic: weights empty, probs has one row.
    // FiniteMixture: weights[i] matched with probs[i].
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> probs;
    // Dirichlet: concentration over the 2d unit steps.
    Eigen::VectorXd alpha;
    double epsilon = 0.0;

    static EnvironmentModel deterministic(const Eigen::VectorXd& p);
    static EnvironmentModel finite_mixture(const std::vector<double>& w,
                                           const std::vector<Eigen::VectorXd>& p);
    static EnvironmentModel dirichlet(const Eigen::VectorXd& a);
    // p = (0.25 + dx/2, 0.25 - dx/2, ...) per axis; convenient for building
    // mixtures from target drifts (d=2)
    static Eigen::VectorXd probs_from_drift(const Eigen::VectorXd& drift);

    void validate() const;
    // Dirichlet models have no uniform ellipticity bound; they are admitted
    // for oracle testing only and flagged everywhere downstream.
    bool assumption_violating() const { return kind == ModelKind::Dirichlet; }

    Eigen::VectorXd mean_drift() const;

    std::string to_json() const;
    static EnvironmentModel from_json(const std::string& text);
    static EnvironmentModel load(const std::string& path);
    // stable FNV-1a hash of the canonical JSON document
    std::string content_hash() const;
};

enum class NestlingLabel { NonNestling, MarginallyNestling, Nestling };

struct NestlingClass {
    NestlingLabel label = NestlingLabel::NonNestling;
    bool non_nestling_in_direction = false;  // inf_{x in K} x.ell > 0
    std::vector<Eigen::VectorXd> hull_vertices;
};

const char* to_string(NestlingLabel label);

// Hull membership of the origin is decided in exact rational arithmetic for
// Deterministic/FiniteMixture supports; the marginally-nestling boundary case
// is float-fragile otherwise.
NestlingClass classify_environment(const EnvironmentModel& model, const Direction& ell);

// E over P of prod_e omega(0,e)^{k_e}; exact_counts has 2d entries.
double site_exit_moment(const EnvironmentModel& model, const std::vector<int>& exit_counts);
double log_site_exit_moment(const EnvironmentModel& model, const std::vector<int>& exit_counts);

// Annealed probability of a nearest-neighbor path from the origin, grouping
// steps by departure site (exact under i.i.d. sites). Path given as unit-step
// indices.
double annealed_path_prob(const EnvironmentModel& model, const std::vector<int>& step_seq);
double log_annealed_path_prob(const EnvironmentModel& model, const std::vector<int>& step_seq);

}  // namespace rwre
