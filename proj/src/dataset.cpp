#include "rwre/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "rwre/rng.hpp"

namespace rwre {

namespace {

constexpr char kMagic[6] = {'R', 'W', 'R', 'E', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("dataset: truncated file");
    return v;
}

}  // namespace

SampleSet::SampleSet(Header h, const std::vector<RegenSample>& records) : header_(std::move(h)) {
    const int d = dim();
    dx_.reserve(records.size() * d);
    dtau_.reserve(records.size());
    sup_disp_.reserve(records.size());
    for (const auto& r : records) {
        for (int a = 0; a < d; ++a) dx_.push_back(r.dx[a]);
        dtau_.push_back(r.dtau);
        sup_disp_.push_back(r.sup_disp);
    }
    header_.count = records.size();
}

SampleSet SampleSet::from_harvest(const EnvironmentModel& model, const Direction& ell,
                                  const HarvestResult& harvest, std::uint64_t seed,
                                  int lookahead) {
    Header h;
    h.model_hash = model.content_hash();
    h.model_json = model.to_json();
    h.direction = ell.lattice;
    h.seed = seed;
    h.lookahead = lookahead;
    h.nestling = classify_environment(model, ell).label == NestlingLabel::Nestling;
    h.assumption_warning = harvest.diag.assumption_warning;
    nlohmann::json cp;
    cp["trajectories"] = harvest.diag.trajectories;
    cp["total_steps"] = harvest.diag.total_steps;
    cp["warning"] = harvest.diag.warning;
    h.creation_params = cp.dump();
    return SampleSet(std::move(h), harvest.samples);
}

RegenSample SampleSet::record(std::size_t i) const {
    const int d = dim();
    RegenSample r;
    r.dx.resize(d);
    for (int a = 0; a < d; ++a) r.dx[a] = dx_[i * d + a];
    r.dtau = dtau_[i];
    r.sup_disp = sup_disp_[i];
    return r;
}

SampleSet::TailStats SampleSet::tail_stats() const {
    TailStats ts;
    std::int64_t max_val = 1;
    for (auto t : dtau_) max_val = std::max(max_val, t);
    for (std::int64_t thr = 1; thr <= max_val; thr *= 2) ts.thresholds.push_back(thr);
    ts.dtau_exceed.assign(ts.thresholds.size(), 0);
    ts.sup_exceed.assign(ts.thresholds.size(), 0);
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t j = 0; j < ts.thresholds.size(); ++j) {
            if (dtau_[i] > ts.thresholds[j]) ts.dtau_exceed[j] += 1;
            if (sup_disp_[i] > ts.thresholds[j]) ts.sup_exceed[j] += 1;
        }
    }
    return ts;
}

void SampleSet::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot open for writing: " + path);
    out.write(kMagic, sizeof(kMagic));

    nlohmann::json j;
    j["model_hash"] = header_.model_hash;
    j["model"] = nlohmann::json::parse(header_.model_json.empty() ? "null" : header_.model_json);
    j["direction"] = std::vector<int>(header_.direction.data(),
                                      header_.direction.data() + header_.direction.size());
    j["seed"] = header_.seed;
    j["lookahead"] = header_.lookahead;
    j["count"] = size();
    j["nestling"] = header_.nestling;
    j["assumption_warning"] = header_.assumption_warning;
    j["creation_params"] =
        header_.creation_params.empty() ? nlohmann::json() : nlohmann::json::parse(header_.creation_params);
    auto ts = tail_stats();
    j["tail_stats"]["thresholds"] = ts.thresholds;
    j["tail_stats"]["dtau_exceed"] = ts.dtau_exceed;
    j["tail_stats"]["sup_exceed"] = ts.sup_exceed;
    std::string hdr = j.dump();
    write_pod<std::uint64_t>(out, hdr.size());
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));

    const int d = dim();
    for (std::size_t i = 0; i < size(); ++i) {
        for (int a = 0; a < d; ++a) write_pod<std::int32_t>(out, dx_[i * d + a]);
        write_pod<std::int64_t>(out, dtau_[i]);
        write_pod<std::int64_t>(out, sup_disp_[i]);
    }
    if (!out) throw std::runtime_error("dataset: write failed: " + path);
}

SampleSet SampleSet::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open: " + path);
    char magic[6];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("dataset: bad magic (not a RWRE01 file)");

    auto hdr_len = read_pod<std::uint64_t>(in);
    std::string hdr(hdr_len, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
    if (!in) throw std::runtime_error("dataset: truncated header");
    nlohmann::json j = nlohmann::json::parse(hdr);

    SampleSet s;
    s.header_.model_hash = j.at("model_hash").get<std::string>();
    s.header_.model_json = j.at("model").is_null() ? "" : j.at("model").dump();
    auto dir = j.at("direction").get<std::vector<int>>();
    s.header_.direction = Eigen::Map<Eigen::VectorXi>(dir.data(), dir.size());
    s.header_.seed = j.at("seed").get<std::uint64_t>();
    s.header_.lookahead = j.at("lookahead").get<int>();
    s.header_.count = j.at("count").get<std::uint64_t>();
    s.header_.nestling = j.at("nestling").get<bool>();
    s.header_.assumption_warning = j.at("assumption_warning").get<bool>();
    s.header_.creation_params = j.at("creation_params").is_null() ? "" : j.at("creation_params").dump();

    const int d = s.dim();
    s.dx_.resize(s.header_.count * d);
    s.dtau_.resize(s.header_.count);
    s.sup_disp_.resize(s.header_.count);
    for (std::size_t i = 0; i < s.header_.count; ++i) {
        for (int a = 0; a < d; ++a) s.dx_[i * d + a] = read_pod<std::int32_t>(in);
        s.dtau_[i] = read_pod<std::int64_t>(in);
        s.sup_disp_[i] = read_pod<std::int64_t>(in);
    }
    return s;
}

void SampleSet::export_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dataset: cannot open for writing: " + path);
    const int d = dim();
    for (int a = 0; a < d; ++a) out << "dx" << (a + 1) << ",";
    out << "dtau,sup_disp\n";
    for (std::size_t i = 0; i < size(); ++i) {
        for (int a = 0; a < d; ++a) out << dx_[i * d + a] << ",";
        out << dtau_[i] << "," << sup_disp_[i] << "\n";
    }
}

SampleSet SampleSet::permuted(std::uint64_t seed) const {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(seed, 0xFEED);
    for (std::size_t i = size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    SampleSet out;
    out.header_ = header_;
    const int d = dim();
    out.dx_.resize(dx_.size());
    out.dtau_.resize(dtau_.size());
    out.sup_disp_.resize(sup_disp_.size());
    for (std::size_t i = 0; i < size(); ++i) {
        std::size_t k = order[i];
        for (int a = 0; a < d; ++a) out.dx_[i * d + a] = dx_[k * d + a];
        out.dtau_[i] = dtau_[k];
        out.sup_disp_[i] = sup_disp_[k];
    }
    return out;
}

SampleSet SampleSet::resampled(std::uint64_t seed) const {
    CounterRng rng(seed, 0xB007);
    SampleSet out;
    out.header_ = header_;
    const int d = dim();
    out.dx_.resize(dx_.size());
    out.dtau_.resize(dtau_.size());
    out.sup_disp_.resize(sup_disp_.size());
    for (std::size_t i = 0; i < size(); ++i) {
        std::size_t k = rng.next_below(size());
        for (int a = 0; a < d; ++a) out.dx_[i * d + a] = dx_[k * d + a];
        out.dtau_[i] = dtau_[k];
        out.sup_disp_[i] = sup_disp_[k];
    }
    return out;
}

VelocityEstimate velocity(const SampleSet& s, int bootstrap_rounds, std::uint64_t seed) {
    if (s.size() == 0) throw std::invalid_argument("velocity: empty sample set");
    const int d = s.dim();
    const std::size_t K = s.size();

    auto mean_ratio = [&](const std::vector<std::size_t>* idx) {
        Eigen::VectorXd sum_dx = Eigen::VectorXd::Zero(d);
        double sum_dt = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            std::size_t k = idx ? (*idx)[i] : i;
            for (int a = 0; a < d; ++a) sum_dx[a] += s.dx()[k * d + a];
            sum_dt += static_cast<double>(s.dtau()[k]);
        }
        return Eigen::VectorXd(sum_dx / sum_dt);
    };

    VelocityEstimate est;
    est.v = mean_ratio(nullptr);
    est.bootstrap_rounds = bootstrap_rounds;
    est.boot_cov = Eigen::MatrixXd::Zero(d, d);
    est.ci_radius = Eigen::VectorXd::Zero(d);
    if (bootstrap_rounds > 1) {
        std::vector<Eigen::VectorXd> boots;
        std::vector<std::size_t> idx(K);
        for (int b = 0; b < bootstrap_rounds; ++b) {
            CounterRng rng(seed, 0xB000 + b);
            for (std::size_t i = 0; i < K; ++i) idx[i] = rng.next_below(K);
            boots.push_back(mean_ratio(&idx));
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (const auto& b : boots) mean += b;
        mean /= boots.size();
        for (const auto& b : boots)
            est.boot_cov += (b - mean) * (b - mean).transpose();
        est.boot_cov /= std::max<std::size_t>(1, boots.size() - 1);
        for (int a = 0; a < d; ++a) {
            std::vector<double> comp;
            for (const auto& b : boots) comp.push_back(b[a]);
            std::sort(comp.begin(), comp.end());
            auto q = [&](double p) {
                double pos = p * (comp.size() - 1);
                std::size_t lo = static_cast<std::size_t>(pos);
                double frac = pos - lo;
                return comp[lo] * (1 - frac) + comp[std::min(lo + 1, comp.size() - 1)] * frac;
            };
            est.ci_radius[a] = (q(0.975) - q(0.025)) / 2.0;
        }
    }
    return est;
}

TailExponent tail_exponent(const SampleSet& s, TailField field) {
    if (s.size() < 1000)
        throw std::invalid_argument("tail_exponent: need at least 1e3 records");
    const auto& vals = (field == TailField::Dtau) ? s.dtau() : s.sup_disp();
    std::vector<std::int64_t> sorted(vals.begin(), vals.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t K = sorted.size();

    // upper-decile thresholds, each with >= 30 exceedances
    std::int64_t q90 = sorted[static_cast<std::size_t>(0.9 * K)];
    std::int64_t max_v = sorted.back();
    if (max_v <= q90 || max_v < 2)
        throw std::invalid_argument("tail_exponent: insufficient tail data");

    TailExponent out;
    const int want = 12;
    for (int j = 0; j < want; ++j) {
        double t = q90 + (max_v - q90) * static_cast<double>(j) / want;
        auto it = std::upper_bound(sorted.begin(), sorted.end(), static_cast<std::int64_t>(t));
        std::size_t exceed = static_cast<std::size_t>(sorted.end() - it);
        if (exceed < 30) break;
        if (!out.thresholds.empty() && t <= out.thresholds.back()) continue;
        out.thresholds.push_back(t);
        out.log_survival.push_back(std::log(static_cast<double>(exceed) / K));
    }
    if (out.thresholds.size() < 3)
        throw std::invalid_argument("tail_exponent: insufficient tail data");

    const int m = static_cast<int>(out.thresholds.size());
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = out.thresholds[i];
        y[i] = out.log_survival[i];
    }
    Eigen::Vector2d beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
    out.c_hat = -beta[1];
    Eigen::VectorXd resid = y - A * beta;
    double sigma2 = resid.squaredNorm() / std::max(1, m - 2);
    Eigen::Matrix2d cov = sigma2 * (A.transpose() * A).inverse();
    out.se = std::sqrt(cov(1, 1));
    out.ci_lo = out.c_hat - 1.96 * out.se;
    out.ci_hi = out.c_hat + 1.96 * out.se;

    // curvature probe: positive quadratic coefficient means the survival
    // decays slower than exponential over the fitted range
    if (m >= 4) {
        Eigen::MatrixXd A2(m, 3);
        for (int i = 0; i < m; ++i) {
            A2(i, 0) = 1.0;
            A2(i, 1) = out.thresholds[i];
            A2(i, 2) = out.thresholds[i] * out.thresholds[i];
        }
        Eigen::Vector3d b2 = (A2.transpose() * A2).ldlt().solve(A2.transpose() * y);
        Eigen::VectorXd r2 = y - A2 * b2;
        double s2 = r2.squaredNorm() / std::max(1, m - 3);
        Eigen::Matrix3d cov2 = s2 * (A2.transpose() * A2).inverse();
        double se2 = std::sqrt(std::max(cov2(2, 2), 1e-300));
        out.curvature_z = b2[2] / se2;
        out.subexponential_suspected = out.curvature_z > 2.0;
    }
    return out;
}

}  // namespace rwre
