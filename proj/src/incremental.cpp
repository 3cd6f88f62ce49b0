#include "phidbn/incremental.hpp"

#include <algorithm>
#include <cmath>

#include "phidbn/structure.hpp"

namespace phidbn {

IncrementalStats& IncrementalStats::operator+=(const IncrementalStats& o) {
    features_added += o.features_added;
    features_removed += o.features_removed;
    contributions_recomputed += o.contributions_recomputed;
    gradient_steps += o.gradient_steps;
    loss_evaluations += o.loss_evaluations;
    multiply_adds += o.multiply_adds;
    return *this;
}

IncrementalStats IncrementalStats::since(const IncrementalStats& earlier) const {
    return {features_added - earlier.features_added,
            features_removed - earlier.features_removed,
            contributions_recomputed - earlier.contributions_recomputed,
            gradient_steps - earlier.gradient_steps,
            loss_evaluations - earlier.loss_evaluations,
            multiply_adds - earlier.multiply_adds};
}

IncrementalCostCache::IncrementalCostCache(std::vector<ActionId> actions, std::size_t num_actions,
                                           std::size_t max_parents)
    : actions_(std::move(actions)),
      num_actions_(num_actions),
      max_parents_(max_parents),
      length_(actions_.size() + 1) {
    for (ActionId a : actions_) {
        if (a >= num_actions_) throw Error("IncrementalCostCache: action out of range");
    }
}

IncrementalCostCache IncrementalCostCache::with_structure(std::vector<Column> columns, std::vector<ActionId> actions,
                                                          std::size_t num_actions, const DbnStructure& g,
                                                          std::size_t max_parents) {
    IncrementalCostCache cache(std::move(actions), num_actions, max_parents);
    if (g.num_features() != columns.size()) throw Error("IncrementalCostCache: structure/column count mismatch");
    if (columns.size() > 64) throw Error("IncrementalCostCache: at most 64 features");
    g.validate(columns.size());
    for (const auto& c : columns) cache.check_column(c);
    cache.columns_ = std::move(columns);
    cache.structure_ = g;
    cache.rows_.resize(cache.columns_.size());
    cache.contributions_.resize(cache.columns_.size());
    for (std::size_t i = 0; i < cache.columns_.size(); ++i) cache.recount(i);
    return cache;
}

void IncrementalCostCache::check_column(const Column& c) const {
    if (c.size() != length_) {
        throw Error("IncrementalCostCache: column has length " + std::to_string(c.size()) + ", expected " +
                    std::to_string(length_));
    }
}

CodeLength IncrementalCostCache::total() const {
    CodeLength sum = 0.0;
    for (CodeLength c : contributions_) sum += c;
    return sum;
}

PackedTrajectory IncrementalCostCache::trajectory() const {
    PackedTrajectory data;
    data.num_features = columns_.size();
    data.num_actions = num_actions_;
    data.states.assign(length_, 0);
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        for (std::size_t t = 0; t < length_; ++t) {
            if (columns_[i][t]) data.states[t] |= std::uint64_t{1} << i;
        }
    }
    data.actions = actions_;
    return data;
}

void IncrementalCostCache::recount(std::size_t i) {
    rows_[i] = accumulate_feature_rows(trajectory(), i, structure_.parents(i));
    contributions_[i] = cl_rows(rows_[i]);
    ++stats_.contributions_recomputed;
}

void IncrementalCostCache::add_feature(Column column) {
    check_column(column);
    if (columns_.size() >= 64) throw Error("IncrementalCostCache: at most 64 features");
    columns_.push_back(std::move(column));
    const std::size_t i = columns_.size() - 1;

    std::vector<std::vector<std::size_t>> parents;
    for (std::size_t j = 0; j < i; ++j) parents.push_back(structure_.parents(j));
    const auto data = trajectory();
    auto best = search_parents_exhaustive(data, i, max_parents_);
    parents.push_back(best.parents);
    structure_ = DbnStructure(std::move(parents));

    rows_.push_back(accumulate_feature_rows(data, i, structure_.parents(i)));
    contributions_.push_back(cl_rows(rows_.back()));
    ++stats_.contributions_recomputed;
    ++stats_.features_added;
}

void IncrementalCostCache::remove_feature(std::size_t i) {
    if (i >= columns_.size()) throw Error("IncrementalCostCache: feature index out of range");
    columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(i));
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
    contributions_.erase(contributions_.begin() + static_cast<std::ptrdiff_t>(i));

    std::vector<std::vector<std::size_t>> parents;
    std::vector<std::size_t> dirty;
    for (std::size_t j = 0; j < structure_.num_features(); ++j) {
        if (j == i) continue;
        std::vector<std::size_t> pa;
        bool lost = false;
        for (std::size_t k : structure_.parents(j)) {
            if (k == i) {
                lost = true;
            } else {
                pa.push_back(k > i ? k - 1 : k);
            }
        }
        if (lost) dirty.push_back(parents.size());
        parents.push_back(std::move(pa));
    }
    structure_ = DbnStructure(std::move(parents));
    for (std::size_t j : dirty) recount(j);
    ++stats_.features_removed;
}

namespace {

// One pass over the samples: residual loss at w, m+2 multiply-adds per sample.
double sample_loss(std::span<const FeatureVector> xs, std::span<const double> rs, const Eigen::VectorXd& w,
                   IncrementalStats& stats) {
    const std::size_t m = static_cast<std::size_t>(w.size()) - 1;
    long double loss = 0.0L;
    for (std::size_t t = 0; t < rs.size(); ++t) {
        double pred = w(0);
        for (std::size_t i = 0; i < m; ++i) {
            if (xs[t][i]) pred += w(static_cast<Eigen::Index>(i + 1));
        }
        const long double e = static_cast<long double>(pred) - rs[t];
        loss += e * e;
    }
    ++stats.loss_evaluations;
    stats.multiply_adds += static_cast<std::uint64_t>(rs.size()) * (m + 2);
    return static_cast<double>(loss);
}

void check_samples(std::span<const FeatureVector> xs, std::span<const double> rs, std::size_t m) {
    if (xs.size() != rs.size()) throw Error("reward refit: feature and reward sample counts differ");
    for (const auto& x : xs) {
        if (x.size() != m) throw Error("reward refit: feature width mismatch");
    }
}

RewardModel finish(Eigen::VectorXd w, double loss, std::size_t n) {
    RewardModel model;
    model.w = std::move(w);
    model.loss = std::max(loss, 0.0);
    model.n = n;
    model.sigma2 = n == 0 ? 0.0 : model.loss / static_cast<double>(n);
    return model;
}

}  // namespace

std::uint64_t gradient_step_cost(std::size_t n, std::size_t m) {
    // prediction (m+1) plus gradient accumulation (m+1) per sample
    return static_cast<std::uint64_t>(n) * 2 * (m + 1);
}

std::uint64_t full_solve_cost(std::size_t n, std::size_t m) {
    const std::uint64_t d = m + 1;
    return static_cast<std::uint64_t>(n) * d * d + d * d * d;
}

RewardModel improve_weights(Eigen::VectorXd start, std::span<const FeatureVector> xs, std::span<const double> rs,
                            const GradientOptions& options, IncrementalStats* stats) {
    if (start.size() == 0) throw Error("improve_weights: empty weight vector");
    const std::size_t m = static_cast<std::size_t>(start.size()) - 1;
    check_samples(xs, rs, m);
    IncrementalStats local;
    IncrementalStats& st = stats ? *stats : local;
    const std::size_t n = rs.size();

    Eigen::VectorXd w = std::move(start);
    double loss = sample_loss(xs, rs, w, st);
    if (n == 0) return finish(w, loss, n);

    // trace(A) = sum_t (1 + |x_t|)
    double trace = 0.0;
    for (const auto& x : xs) {
        trace += 1.0;
        for (std::size_t i = 0; i < m; ++i) trace += x[i] ? 1.0 : 0.0;
    }
    st.multiply_adds += static_cast<std::uint64_t>(n) * m;
    const double eta = 1.0 / trace;

    Eigen::VectorXd g(w.size());
    for (std::size_t step = 0; step < options.steps; ++step) {
        g.setZero();
        for (std::size_t t = 0; t < n; ++t) {
            double pred = w(0);
            for (std::size_t i = 0; i < m; ++i) {
                if (xs[t][i]) pred += w(static_cast<Eigen::Index>(i + 1));
            }
            const double e = 2.0 * (pred - rs[t]);
            g(0) += e;
            for (std::size_t i = 0; i < m; ++i) {
                if (xs[t][i]) g(static_cast<Eigen::Index>(i + 1)) += e;
            }
        }
        ++st.gradient_steps;
        st.multiply_adds += gradient_step_cost(n, m);
        if (g.squaredNorm() == 0.0) break;

        double scale = eta;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            Eigen::VectorXd trial = w - scale * g;
            const double trial_loss = sample_loss(xs, rs, trial, st);
            if (trial_loss <= loss) {
                w = std::move(trial);
                loss = trial_loss;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    return finish(w, loss, n);
}

RefitResult reward_refit_ansatz(const RewardModel& old, std::span<const FeatureVector> xs,
                                std::span<const double> rs, std::span<const std::uint8_t> new_column,
                                const GradientOptions& options) {
    const std::size_t m = old.num_features() + 1;
    if (old.w.size() == 0) throw Error("reward_refit_ansatz: empty model");
    check_samples(xs, rs, m);
    if (new_column.size() != rs.size()) throw Error("reward_refit_ansatz: new column length mismatch");
    const std::size_t n = rs.size();

    RefitResult out;
    // psi_t = (R_old(x_t without the new bit), x^{m}_t); fit r ~ v0 psi0 + v1 psi1.
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    std::vector<double> old_pred(n);
    for (std::size_t t = 0; t < n; ++t) {
        double pred = old.w(0);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if (xs[t][i]) pred += old.w(static_cast<Eigen::Index>(i + 1));
        }
        old_pred[t] = pred;
        const double z = new_column[t] ? 1.0 : 0.0;
        M(0, 0) += pred * pred;
        M(0, 1) += pred * z;
        M(1, 1) += z * z;
        v(0) += pred * rs[t];
        v(1) += z * rs[t];
    }
    M(1, 0) = M(0, 1);
    out.stats.multiply_adds += static_cast<std::uint64_t>(n) * (m + 5);
    const Eigen::Vector2d sol = pseudo_inverse(M) * v;
    out.alpha = 1.0 - sol(0);
    out.new_weight = sol(1);

    long double ansatz = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
        const long double e = sol(0) * old_pred[t] + (new_column[t] ? sol(1) : 0.0) - rs[t];
        ansatz += e * e;
    }
    out.ansatz_loss = static_cast<double>(ansatz);

    Eigen::VectorXd start(static_cast<Eigen::Index>(m + 1));
    start.head(old.w.size()) = sol(0) * old.w;
    start(static_cast<Eigen::Index>(m)) = sol(1);
    out.model = improve_weights(std::move(start), xs, rs, options, &out.stats);
    return out;
}

RefitResult reward_remove_feature(const RewardModel& old, std::size_t i, std::span<const FeatureVector> xs,
                                  std::span<const double> rs, const GradientOptions& options) {
    const std::size_t m_old = old.num_features();
    if (i >= m_old) throw Error("reward_remove_feature: feature index out of range");
    check_samples(xs, rs, m_old - 1);

    const double removed = old.w(static_cast<Eigen::Index>(i + 1));
    Eigen::VectorXd start(static_cast<Eigen::Index>(m_old));
    for (Eigen::Index k = 0, j = 0; k < old.w.size(); ++k) {
        if (k == static_cast<Eigen::Index>(i + 1)) continue;
        start(j++) = old.w(k);
    }
    start.array() += removed / static_cast<double>(m_old);

    RefitResult out;
    out.alpha = 0.0;
    out.new_weight = 0.0;
    IncrementalStats scratch;
    out.ansatz_loss = sample_loss(xs, rs, start, scratch);
    out.model = improve_weights(std::move(start), xs, rs, options, &out.stats);
    return out;
}

LinearQ value_warm_start(const LinearQ& old, std::span<const std::optional<std::size_t>> mapping) {
    std::vector<bool> used(old.num_features(), false);
    for (const auto& k : mapping) {
        if (!k) continue;
        if (*k >= old.num_features()) throw Error("value_warm_start: mapping index out of range");
        if (used[*k]) throw Error("value_warm_start: old feature " + std::to_string(*k) + " mapped twice");
        used[*k] = true;
    }
    LinearQ q(old.num_actions(), mapping.size(), old.gamma(), old.schedule(), old.lambda());
    for (ActionId a = 0; a < old.num_actions(); ++a) {
        const auto& src = old.weights(a);
        auto& dst = q.weights(a);
        dst[0] = src[0];
        for (std::size_t k = 0; k < mapping.size(); ++k) {
            if (!mapping[k]) continue;
            dst[k + 1] = src[*mapping[k] + 1];
        }
    }
    return q;
}

}  // namespace phidbn
