#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "phidbn/core.hpp"
#include "phidbn/model.hpp"
#include "phidbn/reward.hpp"
#include "phidbn/rng.hpp"

namespace phidbn {

/// alpha_k = alpha0 / (1 + k / decay_steps).
struct StepSchedule {
    double alpha0 = 0.1;
    double decay_steps = 1e4;

    double at(std::uint64_t k) const { return alpha0 / (1.0 + static_cast<double>(k) / decay_steps); }
};

/// Q(x, a) = q_a . (1, x), one weight vector per action.
class LinearQ {
public:
    LinearQ() = default;
    LinearQ(std::size_t num_actions, std::size_t num_features, double gamma = 0.99, StepSchedule schedule = {},
            double lambda = 0.0);

    std::size_t num_actions() const { return weights_.size(); }
    std::size_t num_features() const { return num_features_; }
    double gamma() const { return gamma_; }
    double lambda() const { return lambda_; }
    const StepSchedule& schedule() const { return schedule_; }

    /// Number of TD updates applied so far; drives the step-size schedule.
    std::uint64_t updates() const { return updates_; }
    void set_updates(std::uint64_t k) { updates_ = k; }

    const std::vector<double>& weights(ActionId a) const { return weights_.at(a); }
    std::vector<double>& weights(ActionId a) { return weights_.at(a); }
    void set_bias(double value);

    double value(const FeatureVector& x, ActionId a) const;
    double max_value(const FeatureVector& x) const;

    /// {"0":[w...],"1":[w...],...}
    nlohmann::json to_json() const;

private:
    std::size_t num_features_ = 0;
    double gamma_ = 0.99;
    StepSchedule schedule_;
    double lambda_ = 0.0;
    std::uint64_t updates_ = 0;
    std::vector<std::vector<double>> weights_;
};

/// Sets every bias to r_max / (1 - gamma).
void optimistic_init(LinearQ& q, double r_max);

/// Lowest-index argmax_a Q(x, a).
ActionId greedy_action(const LinearQ& q, const FeatureVector& x);

struct Policy {
    const LinearQ* q = nullptr;
    double epsilon = 0.0;
};

/// Epsilon-greedy: uniform with probability epsilon, greedy otherwise.
ActionId act(const Policy& p, const FeatureVector& x, Rng& rng);

struct TdOptions {
    std::size_t episodes = 20;
    std::size_t steps = 200;
    /// Exploration of the virtual behaviour policy.
    double epsilon = 0.1;
    /// Episode start; uniformly random feature vectors when absent.
    std::optional<FeatureVector> start;
    double weight_limit = 1e6;
};

/// Q-learning (Watkins Q(lambda) when lambda > 0) on transitions sampled
/// from `model`, with rewards reward.predict(x'). Throws if a weight
/// exceeds options.weight_limit in magnitude.
LinearQ td_train(LinearQ q, const FactoredModel& model, const RewardModel& reward, const TdOptions& options,
                 Rng& rng);

}  // namespace phidbn
