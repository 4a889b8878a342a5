#include "rwre/environment.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace rwre {

using Rational = boost::multiprecision::cpp_rational;
using RationalVec = std::vector<Rational>;

namespace {

Rational to_rational(double x) {
    // doubles are dyadic rationals; this conversion is exact
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
    std::int64_t mi = static_cast<std::int64_t>(std::ldexp(m, 53));
    exp -= 53;
    Rational r(mi);
    if (exp > 0)
        r *= Rational(boost::multiprecision::cpp_int(1) << exp);
    else if (exp < 0)
        r /= Rational(boost::multiprecision::cpp_int(1) << (-exp));
    return r;
}

RationalVec drift_of(const Eigen::VectorXd& p, int dim) {
    RationalVec d(dim, Rational(0));
    for (int k = 0; k < 2 * dim; ++k)
        d[step_axis(k)] += Rational(step_sign(k)) * to_rational(p[k]);
    return d;
}

// Solve sum_i lambda_i p_i = 0, sum lambda_i = 1 over a subset of points in
// exact arithmetic; returns true if a solution with all lambda_i >= 0 exists.
bool subset_contains_origin(const std::vector<const RationalVec*>& pts, int dim) {
    const int m = static_cast<int>(pts.size());
    // Gaussian elimination on the (dim+1) x m system [P; 1] lambda = [0; 1]
    int rows = dim + 1;
    std::vector<RationalVec> A(rows, RationalVec(m + 1, Rational(0)));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < m; ++j) A[i][j] = (*pts[j])[i];
    for (int j = 0; j < m; ++j) A[dim][j] = 1;
    A[dim][m] = 1;

    std::vector<int> pivot_col(rows, -1);
    int r = 0;
    for (int c = 0; c < m && r < rows; ++c) {
        int pr = -1;
        for (int i = r; i < rows; ++i)
            if (A[i][c] != 0) { pr = i; break; }
        if (pr < 0) continue;
        std::swap(A[r], A[pr]);
        Rational inv = A[r][c];
        for (int j = 0; j <= m; ++j) A[r][j] /= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rational f = A[i][c];
            for (int j = 0; j <= m; ++j) A[i][j] -= f * A[r][j];
        }
        pivot_col[r] = c;
        ++r;
    }
    for (int i = r; i < rows; ++i)
        if (A[i][m] != 0) return false;  // inconsistent
    // Underdetermined subsets are skipped by the caller enumerating all
    // subsets up to size dim+1 (Caratheodory): free columns get lambda = 0.
    RationalVec lambda(m, Rational(0));
    for (int i = 0; i < r; ++i) lambda[pivot_col[i]] = A[i][m];
    // check the free columns do not appear with nonzero pivots elsewhere
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < m; ++j) {
            if (j == pivot_col[i]) continue;
            if (A[i][j] != 0 && lambda[j] == 0) {
                // a genuinely free variable: setting it to zero is valid,
                // nothing to do
            }
        }
    }
    for (const auto& l : lambda)
        if (l < 0) return false;
    return true;
}

bool hull_contains_origin(const std::vector<RationalVec>& pts, int dim) {
    const int n = static_cast<int>(pts.size());
    const int k = std::min(n, dim + 1);
    // enumerate subsets of size <= dim+1 (Caratheodory)
    std::vector<int> idx;
    std::function<bool(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) {
            std::vector<const RationalVec*> sub;
            for (int i : idx) sub.push_back(&pts[i]);
            return subset_contains_origin(sub, dim);
        }
        for (int i = start; i <= n - remaining; ++i) {
            idx.push_back(i);
            if (rec(i + 1, remaining - 1)) { idx.pop_back(); return true; }
            idx.pop_back();
        }
        return false;
    };
    for (int size = 1; size <= k; ++size)
        if (rec(0, size)) return true;
    return false;
}

// 0 is interior iff no direction u has all points on the closed half-space
// {x.u >= 0} boundary-supporting 0, i.e. for every u != 0, min_i p_i.u < 0
// and max_i p_i.u > 0 is not the right test; the correct one: 0 interior iff
// for all u != 0 max_i p_i.u > 0. Candidate u are outer normals of subsets
// spanning a hyperplane through the origin test set; for d<=2 the normals of
// single points suffice together with the point normals.
bool origin_on_boundary(const std::vector<RationalVec>& pts, int dim) {
    // 0 on boundary iff exists u != 0 with p_i.u >= 0 for all i (supporting
    // hyperplane through 0). Candidate normals: for d=1 the two signs; for
    // d=2 perpendiculars of each point and of each difference p_i - p_j.
    auto supported = [&](const RationalVec& u) {
        bool nonzero = false;
        for (const auto& c : u)
            if (c != 0) { nonzero = true; break; }
        if (!nonzero) return false;
        for (const auto& p : pts) {
            Rational dot = 0;
            for (int i = 0; i < dim; ++i) dot += p[i] * u[i];
            if (dot < 0) return false;
        }
        return true;
    };
    if (dim == 1) {
        return supported({Rational(1)}) || supported({Rational(-1)});
    }
    if (dim == 2) {
        std::vector<RationalVec> cands;
        auto add_perp = [&](const Rational& x, const Rational& y) {
            cands.push_back({-y, x});
            cands.push_back({y, -x});
        };
        for (const auto& p : pts) add_perp(p[0], p[1]);
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = i + 1; j < pts.size(); ++j)
                add_perp(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
        for (const auto& u : cands)
            if (supported(u)) return true;
        return false;
    }
    // d >= 3: normals of (d-1)-subsets through the origin via exact cross
    // products generalized by cofactor expansion
    std::vector<int> idx;
    const int n = static_cast<int>(pts.size());
    std::function<bool(int, int)> rec = [&](int start, int remaining) -> bool {
        if (remaining == 0) {
            // normal to span{pts[idx...]}: cofactors of the matrix with rows
            // pts[idx] and a symbolic last row
            std::vector<RationalVec> rows;
            for (int i : idx) rows.push_back(pts[i]);
            RationalVec u(dim, Rational(0));
            // compute generalized cross product (only valid when idx has
            // dim-1 entries)
            std::vector<int> cols(dim);
            for (int c = 0; c < dim; ++c) {
                // minor determinant removing column c
                std::vector<RationalVec> M(dim - 1, RationalVec(dim - 1));
                for (int i = 0; i < dim - 1; ++i) {
                    int jj = 0;
                    for (int j = 0; j < dim; ++j) {
                        if (j == c) continue;
                        M[i][jj++] = rows[i][j];
                    }
                }
                // determinant by elimination
                Rational det = 1;
                bool singular = false;
                for (int col = 0; col < dim - 1 && !singular; ++col) {
                    int pr = -1;
                    for (int i = col; i < dim - 1; ++i)
                        if (M[i][col] != 0) { pr = i; break; }
                    if (pr < 0) { singular = true; det = 0; break; }
                    if (pr != col) { std::swap(M[pr], M[col]); det = -det; }
                    det *= M[col][col];
                    for (int i = col + 1; i < dim - 1; ++i) {
                        Rational f = M[i][col] / M[col][col];
                        for (int j = col; j < dim - 1; ++j) M[i][j] -= f * M[col][j];
                    }
                }
                u[c] = ((c % 2) == 0 ? det : -det);
            }
            auto test = [&](const RationalVec& w) {
                bool nz = false;
                for (const auto& c : w)
                    if (c != 0) nz = true;
                if (!nz) return false;
                for (const auto& p : pts) {
                    Rational dot = 0;
                    for (int i = 0; i < dim; ++i) dot += p[i] * w[i];
                    if (dot < 0) return false;
                }
                return true;
            };
            RationalVec nu(dim);
            for (int i = 0; i < dim; ++i) nu[i] = -u[i];
            return test(u) || test(nu);
        }
        for (int i = start; i <= n - remaining; ++i) {
            idx.push_back(i);
            if (rec(i + 1, remaining - 1)) { idx.pop_back(); return true; }
            idx.pop_back();
        }
        return false;
    };
    return rec(0, dim - 1);
}

double log_dirichlet_moment(const Eigen::VectorXd& alpha, const std::vector<int>& counts) {
    double a0 = alpha.sum();
    int k = 0;
    double lw = 0.0;
    for (int e = 0; e < alpha.size(); ++e) {
        lw += std::lgamma(alpha[e] + counts[e]) - std::lgamma(alpha[e]);
        k += counts[e];
    }
    lw += std::lgamma(a0) - std::lgamma(a0 + k);
    return lw;
}

}  // namespace

EnvironmentModel EnvironmentModel::deterministic(const Eigen::VectorXd& p) {
    EnvironmentModel m;
    m.dimension = static_cast<int>(p.size()) / 2;
    m.kind = ModelKind::Deterministic;
    m.probs = {p};
    m.epsilon = p.minCoeff();
    m.validate();
    return m;
}

EnvironmentModel EnvironmentModel::finite_mixture(const std::vector<double>& w,
                                                  const std::vector<Eigen::VectorXd>& p) {
    EnvironmentModel m;
    if (p.empty()) throw std::invalid_argument("environment: empty mixture support");
    m.dimension = static_cast<int>(p[0].size()) / 2;
    m.kind = ModelKind::FiniteMixture;
    m.weights = w;
    m.probs = p;
    m.epsilon = 1.0;
    for (const auto& pi : p) m.epsilon = std::min(m.epsilon, pi.minCoeff());
    m.validate();
    return m;
}

EnvironmentModel EnvironmentModel::dirichlet(const Eigen::VectorXd& a) {
    EnvironmentModel m;
    m.dimension = static_cast<int>(a.size()) / 2;
    m.kind = ModelKind::Dirichlet;
    m.alpha = a;
    m.epsilon = 0.0;  // no uniform ellipticity bound exists
    m.validate();
    return m;
}

Eigen::VectorXd EnvironmentModel::probs_from_drift(const Eigen::VectorXd& drift) {
    const int d = static_cast<int>(drift.size());
    Eigen::VectorXd p(2 * d);
    for (int a = 0; a < d; ++a) {
        p[2 * a] = 0.25 + drift[a] / 2.0;
        p[2 * a + 1] = 0.25 - drift[a] / 2.0;
    }
    if (d != 2) {
        // renormalize axis mass for d != 2
        double base = 1.0 / (2.0 * d);
        for (int a = 0; a < d; ++a) {
            p[2 * a] = base + drift[a] / 2.0;
            p[2 * a + 1] = base - drift[a] / 2.0;
        }
    }
    return p;
}

void EnvironmentModel::validate() const {
    if (dimension < 1) throw std::invalid_argument("environment: dimension must be >= 1");
    const int s = num_steps(dimension);
    auto check_prob = [&](const Eigen::VectorXd& p) {
        if (p.size() != s) throw std::invalid_argument("environment: transition vector size != 2d");
        if (std::abs(p.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("environment: transition vector must sum to 1");
        if (p.minCoeff() <= 0.0)
            throw std::invalid_argument("environment: transition entries must be positive");
    };
    switch (kind) {
        case ModelKind::Deterministic:
            if (probs.size() != 1) throw std::invalid_argument("environment: invalid support");
            check_prob(probs[0]);
            break;
        case ModelKind::FiniteMixture: {
            if (probs.empty() || probs.size() != weights.size())
                throw std::invalid_argument("environment: invalid mixture support");
            double wsum = 0.0;
            for (double w : weights) {
                if (w < 0.0) throw std::invalid_argument("environment: negative mixture weight");
                wsum += w;
            }
            if (std::abs(wsum - 1.0) > 1e-12)
                throw std::invalid_argument("environment: mixture weights must sum to 1");
            for (const auto& p : probs) check_prob(p);
            break;
        }
        case ModelKind::Dirichlet:
            if (alpha.size() != s) throw std::invalid_argument("environment: alpha size != 2d");
            if (alpha.minCoeff() <= 0.0)
                throw std::invalid_argument("environment: alpha entries must be positive");
            break;
    }
    if (!assumption_violating() && epsilon <= 0.0)
        throw std::invalid_argument("environment: ellipticity bound must be positive");
}

Eigen::VectorXd EnvironmentModel::mean_drift() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dimension);
    auto add = [&](const Eigen::VectorXd& p, double w) {
        for (int k = 0; k < num_steps(dimension); ++k)
            d[step_axis(k)] += w * step_sign(k) * p[k];
    };
    switch (kind) {
        case ModelKind::Deterministic: add(probs[0], 1.0); break;
        case ModelKind::FiniteMixture:
            for (size_t i = 0; i < probs.size(); ++i) add(probs[i], weights[i]);
            break;
        case ModelKind::Dirichlet: {
            Eigen::VectorXd mean = alpha / alpha.sum();
            add(mean, 1.0);
            break;
        }
    }
    return d;
}

const char* to_string(NestlingLabel label) {
    switch (label) {
        case NestlingLabel::NonNestling: return "non-nestling";
        case NestlingLabel::MarginallyNestling: return "marginally-nestling";
        case NestlingLabel::Nestling: return "nestling";
    }
    return "?";
}

NestlingClass classify_environment(const EnvironmentModel& model, const Direction& ell) {
    model.validate();
    if (ell.dim() != model.dimension)
        throw std::invalid_argument("classify: direction dimension mismatch");
    NestlingClass out;

    if (model.kind == ModelKind::Dirichlet) {
        // support is the whole simplex; the drift hull is the convex hull of
        // the 2d unit steps, which has 0 strictly inside
        out.label = NestlingLabel::Nestling;
        out.non_nestling_in_direction = false;
        for (int k = 0; k < num_steps(model.dimension); ++k) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(model.dimension);
            v[step_axis(k)] = step_sign(k);
            out.hull_vertices.push_back(v);
        }
        return out;
    }

    std::vector<RationalVec> drifts;
    for (const auto& p : model.probs) drifts.push_back(drift_of(p, model.dimension));

    bool contains = hull_contains_origin(drifts, model.dimension);
    if (!contains) {
        out.label = NestlingLabel::NonNestling;
    } else if (origin_on_boundary(drifts, model.dimension)) {
        out.label = NestlingLabel::MarginallyNestling;
    } else {
        out.label = NestlingLabel::Nestling;
    }

    // inf over the hull of x.ell is attained at a vertex
    bool all_positive = true;
    for (const auto& dr : drifts) {
        Rational dot = 0;
        for (int i = 0; i < model.dimension; ++i)
            dot += dr[i] * Rational(ell.lattice[i]);
        if (dot <= 0) { all_positive = false; break; }
    }
    out.non_nestling_in_direction = all_positive;

    for (const auto& dr : drifts) {
        Eigen::VectorXd v(model.dimension);
        for (int i = 0; i < model.dimension; ++i)
            v[i] = static_cast<double>(dr[i].convert_to<double>());
        out.hull_vertices.push_back(v);
    }
    return out;
}

double log_site_exit_moment(const EnvironmentModel& model, const std::vector<int>& exit_counts) {
    const int s = num_steps(model.dimension);
    if (static_cast<int>(exit_counts.size()) != s)
        throw std::invalid_argument("site_exit_moment: counts size != 2d");
    for (int c : exit_counts)
        if (c < 0) throw std::invalid_argument("site_exit_moment: negative count");

    switch (model.kind) {
        case ModelKind::Deterministic: {
            double lw = 0.0;
            for (int e = 0; e < s; ++e)
                if (exit_counts[e] > 0) lw += exit_counts[e] * std::log(model.probs[0][e]);
            return lw;
        }
        case ModelKind::FiniteMixture: {
            double m = -std::numeric_limits<double>::infinity();
            std::vector<double> terms(model.probs.size());
            for (size_t i = 0; i < model.probs.size(); ++i) {
                double lw = std::log(model.weights[i] > 0 ? model.weights[i] : 1e-300);
                if (model.weights[i] == 0.0) lw = -std::numeric_limits<double>::infinity();
                for (int e = 0; e < s; ++e)
                    if (exit_counts[e] > 0) lw += exit_counts[e] * std::log(model.probs[i][e]);
                terms[i] = lw;
                m = std::max(m, lw);
            }
            if (!std::isfinite(m)) return -std::numeric_limits<double>::infinity();
            double acc = 0.0;
            for (double t : terms) acc += std::exp(t - m);
            return m + std::log(acc);
        }
        case ModelKind::Dirichlet:
            return log_dirichlet_moment(model.alpha, exit_counts);
    }
    throw std::logic_error("unreachable");
}

double site_exit_moment(const EnvironmentModel& model, const std::vector<int>& exit_counts) {
    return std::exp(log_site_exit_moment(model, exit_counts));
}

double log_annealed_path_prob(const EnvironmentModel& model, const std::vector<int>& step_seq) {
    const int d = model.dimension;
    const int s = num_steps(d);
    std::map<std::vector<int>, std::vector<int>> counts;  // site -> exit counts
    std::vector<int> pos(d, 0);
    for (int k : step_seq) {
        if (k < 0 || k >= s)
            throw std::invalid_argument("annealed_path_prob: step is not nearest-neighbor");
        auto& c = counts[pos];
        if (c.empty()) c.assign(s, 0);
        c[k] += 1;
        pos[step_axis(k)] += step_sign(k);
    }
    double lp = 0.0;
    for (const auto& [site, c] : counts) lp += log_site_exit_moment(model, c);
    return lp;
}

double annealed_path_prob(const EnvironmentModel& model, const std::vector<int>& step_seq) {
    return std::exp(log_annealed_path_prob(model, step_seq));
}

std::string EnvironmentModel::to_json() const {
    nlohmann::json j;
    j["dimension"] = dimension;
    j["epsilon"] = epsilon;
    switch (kind) {
        case ModelKind::Deterministic: {
            j["kind"] = "deterministic";
            j["parameters"]["p"] = std::vector<double>(probs[0].data(), probs[0].data() + probs[0].size());
            break;
        }
        case ModelKind::FiniteMixture: {
            j["kind"] = "finite_mixture";
            nlohmann::json comps = nlohmann::json::array();
            for (size_t i = 0; i < probs.size(); ++i) {
                nlohmann::json c;
                c["weight"] = weights[i];
                c["p"] = std::vector<double>(probs[i].data(), probs[i].data() + probs[i].size());
                comps.push_back(c);
            }
            j["parameters"]["components"] = comps;
            break;
        }
        case ModelKind::Dirichlet: {
            j["kind"] = "dirichlet";
            j["parameters"]["alpha"] = std::vector<double>(alpha.data(), alpha.data() + alpha.size());
            break;
        }
    }
    return j.dump(2);
}

EnvironmentModel EnvironmentModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::string kind = j.at("kind").get<std::string>();
    EnvironmentModel m;
    if (kind == "deterministic") {
        auto p = j.at("parameters").at("p").get<std::vector<double>>();
        m = deterministic(Eigen::Map<Eigen::VectorXd>(p.data(), p.size()));
    } else if (kind == "finite_mixture") {
        std::vector<double> w;
        std::vector<Eigen::VectorXd> ps;
        for (const auto& c : j.at("parameters").at("components")) {
            w.push_back(c.at("weight").get<double>());
            auto p = c.at("p").get<std::vector<double>>();
            ps.push_back(Eigen::Map<Eigen::VectorXd>(p.data(), p.size()));
        }
        m = finite_mixture(w, ps);
    } else if (kind == "dirichlet") {
        auto a = j.at("parameters").at("alpha").get<std::vector<double>>();
        m = dirichlet(Eigen::Map<Eigen::VectorXd>(a.data(), a.size()));
    } else {
        throw std::invalid_argument("environment: unknown kind '" + kind + "'");
    }
    if (j.contains("dimension") && j["dimension"].get<int>() != m.dimension)
        throw std::invalid_argument("environment: dimension inconsistent with parameters");
    return m;
}

EnvironmentModel EnvironmentModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("environment: cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string EnvironmentModel::content_hash() const {
    // canonical dump: nlohmann objects are key-sorted
    std::string doc = nlohmann::json::parse(to_json()).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : doc) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace rwre
