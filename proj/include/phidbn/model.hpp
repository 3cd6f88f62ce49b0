#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <json.hpp>

#include "phidbn/coding.hpp"
#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/rng.hpp"

namespace phidbn {

/// Frequency-estimated factored transition model
///   T^a(x -> x') = prod_i P^a(x'^i | u^i(x)).
/// Rows never seen in the data fall back to P = 0.5.
class FactoredModel {
public:
    static constexpr double kUnseenProbability = 0.5;

    FactoredModel() = default;
    FactoredModel(DbnStructure structure, std::size_t num_actions, std::vector<std::map<RowKey, double>> tables);

    const DbnStructure& structure() const { return structure_; }
    std::size_t num_features() const { return structure_.num_features(); }
    std::size_t num_actions() const { return num_actions_; }

    /// P^a(x^i = 1 | u^i).
    double p1(std::size_t i, ActionId a, std::uint64_t parent_bits) const;
    bool seen(std::size_t i, ActionId a, std::uint64_t parent_bits) const;
    const std::map<RowKey, double>& table(std::size_t i) const { return tables_.at(i); }

    /// JSON rows {"i":..,"a":..,"u":"bits","p1":float}.
    nlohmann::json to_json() const;

private:
    DbnStructure structure_;
    std::size_t num_actions_ = 0;
    std::vector<std::map<RowKey, double>> tables_;
};

FactoredModel estimate_model(const TransitionCounts& counts, std::size_t num_actions);

double transition_probability(const FactoredModel& model, const FeatureVector& x, ActionId a,
                              const FeatureVector& next);

/// Draws each successor bit independently from its row.
FeatureVector sample_step(const FactoredModel& model, const FeatureVector& x, ActionId a, Rng& rng);

}  // namespace phidbn
