#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phidbn/coding.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/planner.hpp"
#include "phidbn/reward.hpp"

namespace phidbn {

/// Work counters for the incremental paths.
struct IncrementalStats {
    std::uint64_t features_added = 0;
    std::uint64_t features_removed = 0;
    std::uint64_t contributions_recomputed = 0;
    std::uint64_t gradient_steps = 0;
    std::uint64_t loss_evaluations = 0;
    std::uint64_t multiply_adds = 0;

    IncrementalStats& operator+=(const IncrementalStats& o);
    /// Work done since `earlier`, a snapshot of the same counters.
    IncrementalStats since(const IncrementalStats& earlier) const;
};

/// Per-feature state code lengths kept in sync with add/remove moves.
///
/// Feature data is stored column-wise (one 0/1 column of length n per
/// feature) together with the n-1 actions. total() is always the sum of the
/// per-feature contributions, which equals cl_state_sequence of a batch
/// recount under structure().
class IncrementalCostCache {
public:
    using Column = std::vector<std::uint8_t>;

    /// Features are added one at a time, each searching its own parents
    /// among the features present at that point (including itself).
    IncrementalCostCache(std::vector<ActionId> actions, std::size_t num_actions, std::size_t max_parents);

    /// Starts from a given structure over the given columns.
    static IncrementalCostCache with_structure(std::vector<Column> columns, std::vector<ActionId> actions,
                                               std::size_t num_actions, const DbnStructure& g,
                                               std::size_t max_parents);

    std::size_t num_features() const { return columns_.size(); }
    std::size_t length() const { return length_; }
    const DbnStructure& structure() const { return structure_; }
    const std::vector<Column>& columns() const { return columns_; }
    std::span<const ActionId> actions() const { return actions_; }
    std::size_t max_parents() const { return max_parents_; }

    CodeLength contribution(std::size_t i) const { return contributions_.at(i); }
    const FeatureRows& rows(std::size_t i) const { return rows_.at(i); }
    CodeLength total() const;

    /// Appends a feature as index num_features() and searches its parents
    /// among all features; existing parent sets are untouched.
    void add_feature(Column column);

    /// Drops feature i. Later indices shift down by one. Features that had
    /// i as a parent lose that parent and have their rows recounted.
    void remove_feature(std::size_t i);

    /// Current data packed for batch routines.
    PackedTrajectory trajectory() const;

    const IncrementalStats& stats() const { return stats_; }

private:
    void recount(std::size_t i);
    void check_column(const Column& c) const;

    std::vector<ActionId> actions_;
    std::size_t num_actions_ = 0;
    std::size_t max_parents_ = 0;
    std::size_t length_ = 0;
    std::vector<Column> columns_;
    DbnStructure structure_;
    std::vector<FeatureRows> rows_;
    std::vector<CodeLength> contributions_;
    IncrementalStats stats_;
};

/// Options for the first-order improvement steps after an ansatz.
struct GradientOptions {
    std::size_t steps = 20;
};

struct RefitResult {
    RewardModel model;
    /// Solution of the two-parameter fit r ~ (1 - alpha) R_old(x) + w_new x^{m+1}.
    double alpha = 0.0;
    double new_weight = 0.0;
    double ansatz_loss = 0.0;
    IncrementalStats stats;
};

/// Refits rewards after appending a feature column to xs: solves the 2x2
/// least-squares problem in (1 - alpha, w_new), expands it to all m+2
/// weights, then takes gradient steps on the full square loss with step
/// 1/trace(A), halved whenever the loss would increase.
RefitResult reward_refit_ansatz(const RewardModel& old, std::span<const FeatureVector> xs,
                                std::span<const double> rs, std::span<const std::uint8_t> new_column,
                                const GradientOptions& options = {});

/// Drops feature i (1-based weight index i+1), spreads its weight evenly over
/// the remaining weights including the intercept, then takes gradient steps.
/// xs are the vectors *without* feature i.
RefitResult reward_remove_feature(const RewardModel& old, std::size_t i, std::span<const FeatureVector> xs,
                                  std::span<const double> rs, const GradientOptions& options = {});

/// Gradient steps on the square loss from `start`; never increases the loss.
RewardModel improve_weights(Eigen::VectorXd start, std::span<const FeatureVector> xs, std::span<const double> rs,
                            const GradientOptions& options, IncrementalStats* stats = nullptr);

/// Scalar multiply-adds of one gradient step over n samples and m features.
std::uint64_t gradient_step_cost(std::size_t n, std::size_t m);
/// Scalar multiply-adds of building A and inverting it.
std::uint64_t full_solve_cost(std::size_t n, std::size_t m);

/// New Q function over a new feature set. mapping[k] is the old index of new
/// feature k, or nullopt for a fresh feature (weight 0). Biases are kept;
/// the update counter restarts so the step-size schedule starts over.
LinearQ value_warm_start(const LinearQ& old, std::span<const std::optional<std::size_t>> mapping);

}  // namespace phidbn
