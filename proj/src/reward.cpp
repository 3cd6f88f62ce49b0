#include "phidbn/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace phidbn {

RewardSamples pair_rewards(std::span<const FeatureVector> trajectory, std::span<const double> rewards) {
    RewardSamples s;
    const std::size_t n = trajectory.empty() ? 0 : std::min(rewards.size(), trajectory.size() - 1);
    s.xs.assign(trajectory.begin() + 1, trajectory.begin() + 1 + static_cast<std::ptrdiff_t>(n));
    s.rs.assign(rewards.begin(), rewards.begin() + static_cast<std::ptrdiff_t>(n));
    return s;
}

namespace {

struct DesignAccumulator {
    std::size_t dim = 0;
    std::vector<std::uint64_t> counts;  // upper triangle of A, row-major over dim x dim
    std::vector<long double> b;
    long double c = 0.0L;
    std::size_t n = 0;

    explicit DesignAccumulator(std::size_t m) : dim(m + 1), counts(dim * dim, 0), b(dim, 0.0L) {}

    void add(const FeatureVector& x, double r) {
        std::vector<std::size_t> on;
        on.reserve(dim);
        on.push_back(0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i]) on.push_back(i + 1);
        }
        for (std::size_t p = 0; p < on.size(); ++p) {
            for (std::size_t q = p; q < on.size(); ++q) ++counts[on[p] * dim + on[q]];
            b[on[p]] += r;
        }
        c += static_cast<long double>(r) * r;
        ++n;
    }

    void merge(const DesignAccumulator& o) {
        for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
        for (std::size_t k = 0; k < dim; ++k) b[k] += o.b[k];
        c += o.c;
        n += o.n;
    }

    RewardDesign finish() const {
        RewardDesign d;
        d.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        d.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t p = 0; p < dim; ++p) {
            for (std::size_t q = p; q < dim; ++q) {
                const auto v = static_cast<double>(counts[p * dim + q]);
                d.A(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
                d.A(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = v;
            }
            d.b(static_cast<Eigen::Index>(p)) = static_cast<double>(b[p]);
        }
        d.c = static_cast<double>(c);
        d.n = n;
        return d;
    }
};

std::size_t design_width(std::span<const FeatureVector> xs, std::span<const double> rs, std::size_t m) {
    if (xs.size() != rs.size()) {
        throw Error("build_design: " + std::to_string(xs.size()) + " feature vectors but " +
                    std::to_string(rs.size()) + " rewards");
    }
    if (xs.empty()) return m;
    const std::size_t width = xs.front().size();
    for (const auto& x : xs) {
        if (x.size() != width) throw Error("build_design: ragged feature vectors");
    }
    return width;
}

// Fixed chunking keeps the reduction order independent of the thread count.
constexpr std::size_t kDesignChunks = 64;

}  // namespace

RewardDesign build_design_serial(std::span<const FeatureVector> xs, std::span<const double> rs, std::size_t m) {
    DesignAccumulator acc(design_width(xs, rs, m));
    for (std::size_t t = 0; t < xs.size(); ++t) acc.add(xs[t], rs[t]);
    return acc.finish();
}

RewardDesign build_design(std::span<const FeatureVector> xs, std::span<const double> rs, std::size_t m) {
    const std::size_t width = design_width(xs, rs, m);
    std::vector<DesignAccumulator> parts(kDesignChunks, DesignAccumulator(width));
    const std::size_t n = xs.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(kDesignChunks); ++k) {
        const auto chunk = static_cast<std::size_t>(k);
        const std::size_t lo = n * chunk / kDesignChunks;
        const std::size_t hi = n * (chunk + 1) / kDesignChunks;
        for (std::size_t t = lo; t < hi; ++t) parts[chunk].add(xs[t], rs[t]);
    }
    DesignAccumulator total(width);
    for (const auto& p : parts) total.merge(p);
    return total.finish();
}

// ---------------------------------------------------------------- fitting

double RewardModel::predict(const FeatureVector& x) const {
    if (static_cast<std::size_t>(w.size()) != x.size() + 1) {
        throw Error("RewardModel::predict: model has " + std::to_string(num_features()) +
                    " features, vector has " + std::to_string(x.size()));
    }
    double r = w(0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i]) r += w(static_cast<Eigen::Index>(i + 1));
    }
    return r;
}

nlohmann::json RewardModel::to_json() const {
    std::vector<double> ws(w.data(), w.data() + w.size());
    nlohmann::ordered_json j;
    j["w"] = ws;
    j["loss"] = loss;
    j["sigma2"] = sigma2;
    return j;
}

RewardModel RewardModel::from_json(const nlohmann::json& j) {
    RewardModel m;
    const auto ws = j.at("w").get<std::vector<double>>();
    m.w = Eigen::Map<const Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size()));
    m.loss = j.at("loss").get<double>();
    m.sigma2 = j.at("sigma2").get<double>();
    return m;
}

double quadratic_loss(const RewardDesign& d, const Eigen::VectorXd& w) {
    const Eigen::Index k = d.b.size();
    if (w.size() != k) throw Error("quadratic_loss: weight/design dimension mismatch");
    long double quad = 0.0L;
    long double lin = 0.0L;
    for (Eigen::Index p = 0; p < k; ++p) {
        long double row = 0.0L;
        for (Eigen::Index q = 0; q < k; ++q) row += static_cast<long double>(d.A(p, q)) * w(q);
        quad += row * w(p);
        lin += static_cast<long double>(d.b(p)) * w(p);
    }
    return static_cast<double>(quad - 2.0L * lin + static_cast<long double>(d.c));
}

double residual_loss(std::span<const FeatureVector> xs, std::span<const double> rs, const Eigen::VectorXd& w) {
    if (xs.size() != rs.size()) throw Error("residual_loss: length mismatch");
    RewardModel m;
    m.w = w;
    long double loss = 0.0L;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const long double e = static_cast<long double>(m.predict(xs[t])) - rs[t];
        loss += e * e;
    }
    return static_cast<double>(loss);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& symmetric, double rel_tol) {
    const Eigen::Index k = symmetric.rows();
    if (k == 0) return Eigen::MatrixXd(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
    if (eig.info() != Eigen::Success) throw Error("pseudo_inverse: eigen decomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double cutoff = rel_tol * std::max(lambda.cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
    for (Eigen::Index p = 0; p < k; ++p) {
        if (lambda(p) > cutoff && lambda(p) > 0.0) inv(p) = 1.0 / lambda(p);
    }
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return v * inv.asDiagonal() * v.transpose();
}

RewardModel fit_weights(const RewardDesign& d) {
    RewardModel model;
    model.n = d.n;
    if (d.b.size() == 0) return model;
    model.w = pseudo_inverse(d.A) * d.b;
    model.loss = std::max(quadratic_loss(d, model.w), 0.0);
    model.sigma2 = d.n == 0 ? 0.0 : model.loss / static_cast<double>(d.n);
    return model;
}

CodeLength cl_rewards(const RewardModel& model, std::size_t m, std::size_t n) {
    if (n == 0) return 0.0;
    const double dn = static_cast<double>(n);
    const double loss = std::max(model.loss, 1.0 / dn);
    return 0.5 * dn * std::log2(loss) + 0.5 * static_cast<double>(m + 2) * std::log2(dn) -
           0.5 * dn * std::log2(dn * std::numbers::e / (2.0 * std::numbers::pi));
}

// ------------------------------------------------------- naive averages

double LocalRewardAverages::summed_prediction(const FeatureVector& x) const {
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r += x[i] ? when_on.at(i) : when_off.at(i);
    return r;
}

LocalRewardAverages naive_local_reward_average(std::span<const FeatureVector> xs, std::span<const double> rs) {
    const std::size_t m = design_width(xs, rs, 0);
    LocalRewardAverages out;
    out.when_off.assign(m, 0.0);
    out.when_on.assign(m, 0.0);
    std::vector<std::size_t> n_off(m, 0), n_on(m, 0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            if (xs[t][i]) {
                out.when_on[i] += rs[t];
                ++n_on[i];
            } else {
                out.when_off[i] += rs[t];
                ++n_off[i];
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (n_on[i]) out.when_on[i] /= static_cast<double>(n_on[i]);
        if (n_off[i]) out.when_off[i] /= static_cast<double>(n_off[i]);
    }
    return out;
}

}  // namespace phidbn
