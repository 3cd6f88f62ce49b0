#include "phidbn/planner.hpp"

#include <cmath>

namespace phidbn {

LinearQ::LinearQ(std::size_t num_actions, std::size_t num_features, double gamma, StepSchedule schedule, double lambda)
    : num_features_(num_features),
      gamma_(gamma),
      schedule_(schedule),
      lambda_(lambda),
      weights_(num_actions, std::vector<double>(num_features + 1, 0.0)) {
    if (num_actions == 0) throw Error("LinearQ: need at least one action");
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("LinearQ: gamma must lie in (0,1)");
    if (lambda < 0.0 || lambda > 1.0) throw Error("LinearQ: lambda must lie in [0,1]");
}

void LinearQ::set_bias(double value) {
    for (auto& w : weights_) w[0] = value;
}

double LinearQ::value(const FeatureVector& x, ActionId a) const {
    if (x.size() != num_features_) throw Error("LinearQ: feature width mismatch");
    const auto& w = weights_.at(a);
    double v = w[0];
    for (std::size_t i = 0; i < num_features_; ++i) {
        if (x[i]) v += w[i + 1];
    }
    return v;
}

double LinearQ::max_value(const FeatureVector& x) const {
    return value(x, greedy_action(*this, x));
}

nlohmann::json LinearQ::to_json() const {
    nlohmann::ordered_json j;
    for (std::size_t a = 0; a < weights_.size(); ++a) j[std::to_string(a)] = weights_[a];
    return j;
}

void optimistic_init(LinearQ& q, double r_max) {
    q.set_bias(r_max / (1.0 - q.gamma()));
}

ActionId greedy_action(const LinearQ& q, const FeatureVector& x) {
    ActionId best = 0;
    double best_value = q.value(x, 0);
    for (ActionId a = 1; a < q.num_actions(); ++a) {
        const double v = q.value(x, a);
        if (v > best_value) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

ActionId act(const Policy& p, const FeatureVector& x, Rng& rng) {
    if (p.q == nullptr) throw Error("act: policy without Q function");
    if (p.epsilon < 0.0 || p.epsilon > 1.0) throw Error("act: epsilon must lie in [0,1]");
    if (p.epsilon > 0.0 && bernoulli(rng, p.epsilon)) {
        return static_cast<ActionId>(uniform_index(rng, p.q->num_actions()));
    }
    return greedy_action(*p.q, x);
}

namespace {

FeatureVector random_features(std::size_t m, Rng& rng) {
    FeatureVector x(m);
    for (std::size_t i = 0; i < m; ++i) x.set(i, (rng() >> 63) != 0);
    return x;
}

void check_weights(const LinearQ& q, double limit) {
    for (ActionId a = 0; a < q.num_actions(); ++a) {
        for (double w : q.weights(a)) {
            if (!std::isfinite(w) || std::abs(w) > limit) {
                throw Error("td_train: weights diverged after " + std::to_string(q.updates()) +
                            " updates; reduce the step size");
            }
        }
    }
}

}  // namespace

LinearQ td_train(LinearQ q, const FactoredModel& model, const RewardModel& reward, const TdOptions& options,
                 Rng& rng) {
    const std::size_t m = q.num_features();
    if (model.num_features() != m || reward.num_features() != m) {
        throw Error("td_train: model, reward model and Q function disagree on the number of features");
    }
    if (model.num_actions() > q.num_actions()) throw Error("td_train: model has more actions than Q");
    if (options.start && options.start->size() != m) throw Error("td_train: start state width mismatch");

    const std::size_t actions = q.num_actions();
    const bool traces = q.lambda() > 0.0;
    std::vector<std::vector<double>> trace(traces ? actions : 0, std::vector<double>(m + 1, 0.0));

    for (std::size_t episode = 0; episode < options.episodes; ++episode) {
        FeatureVector x = options.start ? *options.start : random_features(m, rng);
        for (auto& e : trace) std::fill(e.begin(), e.end(), 0.0);
        ActionId a = act(Policy{&q, options.epsilon}, x, rng);

        for (std::size_t step = 0; step < options.steps; ++step) {
            const FeatureVector next = sample_step(model, x, a, rng);
            const double r = reward.predict(next);
            const ActionId next_a = act(Policy{&q, options.epsilon}, next, rng);
            const ActionId greedy = greedy_action(q, next);
            const double delta = r + q.gamma() * q.value(next, greedy) - q.value(x, a);
            const double alpha = q.schedule().at(q.updates());

            if (!traces) {
                auto& w = q.weights(a);
                w[0] += alpha * delta;
                for (std::size_t i = 0; i < m; ++i) {
                    if (x[i]) w[i + 1] += alpha * delta;
                }
            } else {
                auto& e = trace[a];
                e[0] += 1.0;
                for (std::size_t i = 0; i < m; ++i) {
                    if (x[i]) e[i + 1] += 1.0;
                }
                const bool exploratory = q.value(next, next_a) < q.value(next, greedy);
                for (ActionId b = 0; b < actions; ++b) {
                    auto& w = q.weights(b);
                    auto& eb = trace[b];
                    for (std::size_t k = 0; k <= m; ++k) {
                        w[k] += alpha * delta * eb[k];
                        eb[k] = exploratory ? 0.0 : eb[k] * q.gamma() * q.lambda();
                    }
                }
            }
            q.set_updates(q.updates() + 1);
            check_weights(q, options.weight_limit);
            x = next;
            a = next_a;
        }
    }
    return q;
}

}  // namespace phidbn
