#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"

namespace phidbn {

/// Code lengths are in bits.
using CodeLength = double;

/// n * H(counts / n) in bits, with 0 log 0 = 0.
double entropy_bits(std::span<const std::uint64_t> counts);

/// Multinomial code length n H(n/n) + (m'-1)/2 log2 n, or 0 when n = 0.
/// m' is the number of non-empty categories.
CodeLength cl_multinomial(std::span<const std::uint64_t> counts);

/// Row of a conditional count table: the action and the packed parent
/// values u^i (bit k holds the k-th parent in increasing index order).
struct RowKey {
    ActionId action = 0;
    std::uint64_t parents = 0;

    auto operator<=>(const RowKey&) const = default;
};

struct OutcomeCounts {
    std::uint64_t zeros = 0;
    std::uint64_t ones = 0;

    std::uint64_t total() const { return zeros + ones; }
    void add(bool x) { x ? ++ones : ++zeros; }
    friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

/// Realized rows of one feature, ordered by (action, parent bits).
using FeatureRows = std::map<RowKey, OutcomeCounts>;

CodeLength cl_rows(const FeatureRows& rows);
double nll_rows(const FeatureRows& rows);

/// Sparse counts n^{ia}_{u x}, keyed by feature, then row.
class TransitionCounts {
public:
    TransitionCounts() = default;
    explicit TransitionCounts(DbnStructure structure);

    std::size_t num_features() const { return rows_.size(); }
    const DbnStructure& structure() const { return structure_; }
    const FeatureRows& rows(std::size_t i) const { return rows_.at(i); }
    FeatureRows& mutable_rows(std::size_t i) { return rows_.at(i); }

    void add(std::size_t i, RowKey key, bool outcome) { rows_.at(i)[key].add(outcome); }

    /// Total count for feature i, n^{i+}_{++}.
    std::uint64_t total(std::size_t i) const;
    std::size_t num_rows() const;

    /// CSV `i,a,u_bits,x,count`, one line per nonzero cell. u_bits lists the
    /// parent values in parent order; empty for parentless features.
    void write_csv(std::ostream& os) const;

    friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;

private:
    DbnStructure structure_;
    std::vector<FeatureRows> rows_;
};

/// A feature trajectory packed one word per time step plus the actions.
/// Transition k (0-based) is (states[k], actions[k]) -> states[k+1].
struct PackedTrajectory {
    std::size_t num_features = 0;
    std::size_t num_actions = 0;
    std::vector<std::uint64_t> states;
    std::vector<ActionId> actions;

    std::size_t length() const { return states.size(); }
    std::size_t transitions() const { return states.empty() ? 0 : states.size() - 1; }
    bool bit(std::size_t t, std::size_t i) const { return (states[t] >> i) & 1U; }
};

/// Packs xs (all of one width, at most 64) together with the actions; only
/// the first |xs|-1 actions are used. num_actions is 1 + the largest action
/// seen, or at least `min_actions`.
PackedTrajectory pack_trajectory(std::span<const FeatureVector> xs, std::span<const ActionId> as,
                                 std::size_t min_actions = 0);

std::uint64_t parent_assignment(std::uint64_t state, std::span<const std::size_t> parents);

/// Rows of feature i under `parents`, counted over all transitions.
FeatureRows accumulate_feature_rows(const PackedTrajectory& data, std::size_t i,
                                    std::span<const std::size_t> parents);

/// Counts over transitions t = 2..n. Features are processed in parallel.
TransitionCounts accumulate_counts(const PackedTrajectory& data, const DbnStructure& g);
TransitionCounts accumulate_counts(std::span<const FeatureVector> xs, std::span<const ActionId> as,
                                   const DbnStructure& g);
/// Single-threaded reference for accumulate_counts.
TransitionCounts accumulate_counts_serial(const PackedTrajectory& data, const DbnStructure& g);

/// Sum of cl_multinomial over every realized (i, a, u) row.
CodeLength cl_state_sequence(const TransitionCounts& counts);

/// -log2 of the frequency-estimated likelihood of the feature sequence.
double neg_log_likelihood(const TransitionCounts& counts);

}  // namespace phidbn
