#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phidbn/coding.hpp"
#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/reward.hpp"

namespace phidbn {

enum class StructureStrategy { exhaustive, mutual_information, chow_liu };

StructureStrategy parse_structure_strategy(const std::string& s);
std::string to_string(StructureStrategy s);

struct StructureOptions {
    StructureStrategy strategy = StructureStrategy::exhaustive;
    std::size_t max_parents = 3;
    /// Chow-Liu edge threshold; defaults to the MDL threshold log2(n)/(2n).
    std::optional<double> chow_liu_threshold;
};

/// Total code length split into state and reward parts.
struct CostReport {
    CodeLength state_bits = 0.0;
    CodeLength reward_bits = 0.0;
    CodeLength total = 0.0;

    static CostReport make(CodeLength state, CodeLength reward) { return {state, reward, state + reward}; }
};

struct ParentSearchResult {
    std::vector<std::size_t> parents;
    CodeLength bits = 0.0;
};

/// Summed row code of feature i under `parents`. Bit-identical to
/// cl_rows(accumulate_feature_rows(data, i, parents)).
CodeLength feature_code_length(const PackedTrajectory& data, std::size_t i, std::span<const std::size_t> parents);

/// Best parent set of size <= max_parents for feature i. Ties go to the
/// smaller set, then to the lexicographically smallest one.
ParentSearchResult search_parents_exhaustive(const PackedTrajectory& data, std::size_t i, std::size_t max_parents);

/// Independent per-feature search, run in parallel over features.
DbnStructure search_structure(const PackedTrajectory& data, const StructureOptions& options);
DbnStructure search_structure_serial(const PackedTrajectory& data, const StructureOptions& options);

/// log2(n) / (2n) for n transitions (0 when n < 2).
double mdl_mi_threshold(std::size_t n);

/// mi[j][i] = plug-in mutual information (bits) between x^j_{t-1} and x^i_t,
/// pooled over actions.
std::vector<std::vector<double>> transition_mutual_information(const PackedTrajectory& data);

/// Edge j -> i iff mi[j][i] > mdl_mi_threshold(n).
DbnStructure mutual_information_edges(const PackedTrajectory& data);

/// Maximum-weight spanning forest on the bipartite previous/next-slice graph
/// with MI weights; edges at or below `threshold` are dropped.
DbnStructure chow_liu_forest(const PackedTrajectory& data, double threshold);

/// Cost of (phi, g) on h: state code under g plus reward code.
CostReport cost(const FeatureMap& phi, const DbnStructure& g, const History& h);

/// Same from an already evaluated trajectory.
CostReport cost_from_trajectory(std::span<const FeatureVector> xs, std::span<const ActionId> actions,
                                std::span<const double> rewards, const DbnStructure& g);

/// Reward code of a trajectory: fit on (x_{t+1}, r_t) samples.
CodeLength reward_code_length(std::span<const FeatureVector> xs, std::span<const double> rewards,
                              RewardModel* fitted = nullptr);

}  // namespace phidbn
