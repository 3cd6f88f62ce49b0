#pragma once

// Brute-force references for tests. Nothing here is used by the main path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/model.hpp"
#include "phidbn/reward.hpp"
#include "phidbn/structure.hpp"

namespace phidbn::oracle {

inline constexpr std::size_t kMaxFlatStates = 4096;

/// Explicit MDP. P[(s*A + a)*S + s'] and R[s*A + a] (expected reward).
struct FlatMdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> P;
    std::vector<double> R;

    double p(std::size_t s, std::size_t a, std::size_t next) const {
        return P[(s * num_actions + a) * num_states + next];
    }
    double r(std::size_t s, std::size_t a) const { return R[s * num_actions + a]; }

    /// Throws unless every (s, a) row sums to 1 within tol.
    void check(double tol = 1e-9) const;
};

/// All 2^m feature vectors as states (state k = FeatureVector::unpack(k, m)).
/// R(s, a) = sum_s' P(s'|s,a) reward.predict(s').
FlatMdp flat_from_factored(const FactoredModel& model, const RewardModel& reward, std::size_t num_actions);

/// The 32-state vacuum world (state k = envs::vacuum_state_from_index(k)),
/// optionally with action failures.
FlatMdp flat_vacuum(double suck_failure = 0.0, double move_failure = 0.0);

struct ValueIterationResult {
    std::vector<double> V;
    std::vector<double> Q;  ///< Q[s*A + a]
    std::vector<std::size_t> policy;
    std::size_t sweeps = 0;
};

/// Iterates V <- max_a (R + gamma P V) until the sup-norm change is below tol.
/// Policy ties go to the lowest action index.
ValueIterationResult value_iteration(const FlatMdp& mdp, double gamma, double tol = 1e-12);

/// Cycle reached by following a deterministic policy on a deterministic MDP.
struct PolicyCycle {
    std::vector<std::size_t> states;
    std::vector<std::size_t> actions;
    double average_reward = 0.0;
};

PolicyCycle follow_cycle(const FlatMdp& mdp, std::span<const std::size_t> policy, std::size_t start);

/// Average reward of repeating a fixed action cycle from `start` once the
/// state sequence has become periodic.
double cycle_gain(const FlatMdp& mdp, std::span<const std::size_t> actions, std::size_t start);

/// n log2 n - sum n_j log2 n_j + (m'-1)/2 log2 n.
double multinomial_code(std::span<const std::uint64_t> counts);

/// Best parent set per feature over all 2^m subsets (m <= 4), scored by
/// tallying (action, parents) -> outcome counts one time step at a time.
/// Ties: smaller set, then lexicographically smaller.
DbnStructure exhaustive_structure(std::span<const FeatureVector> xs, std::span<const ActionId> actions);

/// Code of the state sequence under g, tallied per time step.
double direct_state_code(std::span<const FeatureVector> xs, std::span<const ActionId> actions, const DbnStructure& g);

/// Reward code with weights from a complete orthogonal decomposition of the
/// design matrix and the loss summed residual by residual.
double direct_reward_code(std::span<const FeatureVector> xs, std::span<const double> rewards);

/// Cost of (phi, g) on h by per-step enumeration.
CostReport direct_cost(const FeatureMap& phi, const DbnStructure& g, const History& h);

struct GridFit {
    double alpha = 0.0;
    double new_weight = 0.0;
    double loss = 0.0;
};

/// Scans v = (1 - alpha, w_new) over [lo, hi]^2 with spacing `step` for the
/// least square loss of r ~ v0 R_old(x) + v1 z.
GridFit grid_ansatz(const RewardModel& old, std::span<const FeatureVector> xs, std::span<const double> rs,
                    std::span<const std::uint8_t> new_column, double lo = -2.0, double hi = 2.0,
                    double step = 1e-3);

}  // namespace phidbn::oracle
