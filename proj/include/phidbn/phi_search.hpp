#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/incremental.hpp"
#include "phidbn/structure.hpp"

namespace phidbn {

/// Observation-window feature family Phi_m: for lag 0..window-1 the
/// obs_bits bits of o_{n-lag}, then (optionally) 1[a_{n-1} = a] per action.
struct WindowPhi {
    std::size_t window = 0;
    std::size_t obs_bits = 1;
    std::size_t action_indicators = 0;  ///< number of actions with an indicator, 0 for none

    std::size_t num_features() const { return window * obs_bits + action_indicators; }
    FeatureMap feature_map() const;

    friend bool operator==(const WindowPhi&, const WindowPhi&) = default;
};

/// {window + 1, window - 1}; the shrink move is absent at window 0.
std::vector<WindowPhi> neighbors(const WindowPhi& phi);

enum class SearchMode { off, hill, anneal };

SearchMode parse_search_mode(const std::string& s);
std::string to_string(SearchMode m);

struct PhiSearchOptions {
    SearchMode mode = SearchMode::anneal;
    std::size_t steps = 50;
    double tau0 = 10.0;
    double tau_decay = 0.95;
    std::size_t window_max = 8;
    StructureOptions structure;
    std::uint64_t seed = 0;
    /// Keep existing parent sets and only search parents of added features.
    bool incremental = false;
};

struct SearchState {
    WindowPhi phi;
    DbnStructure structure;
    CostReport cost;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};

struct SearchLogEntry {
    std::size_t iter = 0;
    std::size_t window = 0;
    double cost = 0.0;
    bool accepted = false;

    /// {"iter":..,"m":..,"cost":..,"accepted":bool}
    nlohmann::ordered_json to_json() const;
};

struct PhiSearchResult {
    SearchState best;
    SearchState current;
    std::vector<SearchLogEntry> log;
    /// Cost-cache work in incremental mode, rejected proposals included.
    IncrementalStats work;
};

/// Evaluates Phi on h: derives its structure and its Cost.
SearchState evaluate_phi(const History& h, const WindowPhi& phi, const StructureOptions& structure);

/// Stochastic local search over window lengths. A proposal is a uniformly
/// chosen neighbour; it is accepted when it does not increase Cost, and
/// otherwise with probability 2^(-dCost / tau). tau starts at tau0 and
/// decays geometrically; in hill mode tau is 0. Returns the best state seen.
PhiSearchResult stochastic_search(const History& h, const WindowPhi& init, const PhiSearchOptions& options);

/// Cost of Phi_m for m in [m_min, m_max], evaluated in parallel.
std::vector<std::pair<std::size_t, CostReport>> cost_table_over_m(const History& h, const WindowPhi& base,
                                                                  std::size_t m_min, std::size_t m_max,
                                                                  const StructureOptions& structure);

}  // namespace phidbn
