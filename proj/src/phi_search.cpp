#include "phidbn/phi_search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "phidbn/incremental.hpp"
#include "phidbn/rng.hpp"

namespace phidbn {

FeatureMap WindowPhi::feature_map() const {
    FeatureMap phi;
    for (std::size_t lag = 0; lag < window; ++lag) {
        for (std::size_t bit = 0; bit < obs_bits; ++bit) {
            phi.add(observation_bit(static_cast<int>(lag), static_cast<int>(bit)));
        }
    }
    for (std::size_t a = 0; a < action_indicators; ++a) phi.add(last_action_is(static_cast<ActionId>(a)));
    return phi;
}

std::vector<WindowPhi> neighbors(const WindowPhi& phi) {
    std::vector<WindowPhi> out;
    WindowPhi grow = phi;
    ++grow.window;
    out.push_back(grow);
    if (phi.window > 0) {
        WindowPhi shrink = phi;
        --shrink.window;
        out.push_back(shrink);
    }
    return out;
}

SearchMode parse_search_mode(const std::string& s) {
    if (s == "off") return SearchMode::off;
    if (s == "hill") return SearchMode::hill;
    if (s == "anneal") return SearchMode::anneal;
    throw Error("unknown phi search mode '" + s + "' (expected off, hill or anneal)");
}

std::string to_string(SearchMode m) {
    switch (m) {
        case SearchMode::off: return "off";
        case SearchMode::hill: return "hill";
        case SearchMode::anneal: return "anneal";
    }
    return "?";
}

nlohmann::ordered_json SearchLogEntry::to_json() const {
    nlohmann::ordered_json j;
    j["iter"] = iter;
    j["m"] = window;
    j["cost"] = cost;
    j["accepted"] = accepted;
    return j;
}

SearchState evaluate_phi(const History& h, const WindowPhi& phi, const StructureOptions& structure) {
    if (phi.num_features() > 64) throw Error("evaluate_phi: at most 64 features");
    const auto xs = feature_trajectory(phi.feature_map(), h);
    SearchState s;
    s.phi = phi;
    if (xs.size() <= 1) {
        s.structure = DbnStructure(phi.num_features());
        return s;
    }
    const auto data = pack_trajectory(xs, h.actions());
    s.structure = search_structure(data, structure);
    s.cost = cost_from_trajectory(xs, h.actions(), h.rewards(), s.structure);
    return s;
}

namespace {

// Incremental evaluation keeps a cost cache whose columns are ordered
// action indicators first, then window bits by recency, so that growing or
// shrinking the window only touches the tail.

IncrementalCostCache::Column feature_column(const Feature& f, const History& h) {
    IncrementalCostCache::Column c(h.length());
    for (std::size_t t = 1; t <= h.length(); ++t) c[t - 1] = f(h, t) ? 1 : 0;
    return c;
}

std::size_t count_actions(const History& h) {
    std::size_t k = 0;
    for (ActionId a : h.actions()) k = std::max<std::size_t>(k, a + 1);
    return k;
}

std::vector<ActionId> transition_actions(const History& h) {
    const std::size_t n = h.length();
    std::vector<ActionId> as;
    if (n > 1) as.assign(h.actions().begin(), h.actions().begin() + static_cast<std::ptrdiff_t>(n - 1));
    return as;
}

std::size_t to_phi_index(const WindowPhi& phi, std::size_t c) {
    return c < phi.action_indicators ? phi.window * phi.obs_bits + c : c - phi.action_indicators;
}

DbnStructure phi_structure(const WindowPhi& phi, const IncrementalCostCache& cache) {
    std::vector<std::vector<std::size_t>> parents(cache.num_features());
    for (std::size_t c = 0; c < cache.num_features(); ++c) {
        std::vector<std::size_t> pa;
        for (std::size_t p : cache.structure().parents(c)) pa.push_back(to_phi_index(phi, p));
        std::sort(pa.begin(), pa.end());
        parents[to_phi_index(phi, c)] = std::move(pa);
    }
    return DbnStructure(std::move(parents));
}

IncrementalCostCache initial_cache(const History& h, const WindowPhi& phi, std::size_t max_parents) {
    IncrementalCostCache cache(transition_actions(h), std::max(count_actions(h), phi.action_indicators), max_parents);
    if (h.length() == 0) return cache;
    for (std::size_t a = 0; a < phi.action_indicators; ++a) {
        cache.add_feature(feature_column(last_action_is(static_cast<ActionId>(a)), h));
    }
    for (std::size_t lag = 0; lag < phi.window; ++lag) {
        for (std::size_t bit = 0; bit < phi.obs_bits; ++bit) {
            cache.add_feature(feature_column(observation_bit(static_cast<int>(lag), static_cast<int>(bit)), h));
        }
    }
    return cache;
}

IncrementalCostCache move_cache(const History& h, IncrementalCostCache cache, const WindowPhi& from,
                                const WindowPhi& to) {
    if (h.length() == 0) return cache;
    if (to.window > from.window) {
        for (std::size_t bit = 0; bit < to.obs_bits; ++bit) {
            cache.add_feature(feature_column(observation_bit(static_cast<int>(from.window), static_cast<int>(bit)), h));
        }
    } else {
        for (std::size_t bit = 0; bit < from.obs_bits; ++bit) cache.remove_feature(cache.num_features() - 1);
    }
    return cache;
}

SearchState state_from_cache(const History& h, const WindowPhi& phi, const IncrementalCostCache& cache) {
    SearchState s;
    s.phi = phi;
    s.structure = h.length() == 0 ? DbnStructure(phi.num_features()) : phi_structure(phi, cache);
    if (h.length() <= 1) return s;
    const auto xs = feature_trajectory(phi.feature_map(), h);
    s.cost = CostReport::make(cache.total(), reward_code_length(xs, h.rewards()));
    return s;
}

}  // namespace

PhiSearchResult stochastic_search(const History& h, const WindowPhi& init, const PhiSearchOptions& options) {
    if (!(options.tau_decay > 0.0 && options.tau_decay <= 1.0)) throw Error("stochastic_search: tau decay must lie in (0,1]");
    if (options.tau0 < 0.0) throw Error("stochastic_search: negative temperature");
    const bool incremental = options.incremental && options.structure.strategy == StructureStrategy::exhaustive;

    std::map<std::size_t, SearchState> memo;
    auto evaluate = [&](const WindowPhi& phi) -> SearchState {
        auto it = memo.find(phi.window);
        if (it != memo.end()) return it->second;
        return memo.emplace(phi.window, evaluate_phi(h, phi, options.structure)).first->second;
    };

    std::optional<IncrementalCostCache> cache;
    PhiSearchResult result;
    if (incremental) {
        cache = initial_cache(h, init, options.structure.max_parents);
        result.work += cache->stats();
        result.current = state_from_cache(h, init, *cache);
    } else {
        result.current = evaluate(init);
    }
    result.current.seed = options.seed;
    result.best = result.current;
    if (options.mode == SearchMode::off) return result;

    Rng rng(options.seed);
    double tau = options.mode == SearchMode::anneal ? options.tau0 : 0.0;
    for (std::size_t iter = 1; iter <= options.steps; ++iter) {
        std::vector<WindowPhi> moves;
        for (const auto& n : neighbors(result.current.phi)) {
            if (n.window <= options.window_max) moves.push_back(n);
        }
        if (moves.empty()) break;

        if (!incremental) {
            // Prefetch every neighbour so the evaluations can run side by side.
            std::vector<std::size_t> missing;
            for (std::size_t k = 0; k < moves.size(); ++k) {
                if (!memo.contains(moves[k].window)) missing.push_back(k);
            }
            std::vector<SearchState> fresh(missing.size());
#pragma omp parallel for schedule(dynamic)
            for (std::int64_t k = 0; k < static_cast<std::int64_t>(missing.size()); ++k) {
                fresh[static_cast<std::size_t>(k)] =
                    evaluate_phi(h, moves[missing[static_cast<std::size_t>(k)]], options.structure);
            }
            for (std::size_t k = 0; k < missing.size(); ++k) memo.emplace(moves[missing[k]].window, fresh[k]);
        }

        const WindowPhi& proposal = moves[uniform_index(rng, moves.size())];
        SearchState candidate;
        std::optional<IncrementalCostCache> candidate_cache;
        if (incremental) {
            candidate_cache = move_cache(h, *cache, result.current.phi, proposal);
            result.work += candidate_cache->stats().since(cache->stats());
            candidate = state_from_cache(h, proposal, *candidate_cache);
        } else {
            candidate = evaluate(proposal);
        }

        const double delta = candidate.cost.total - result.current.cost.total;
        bool accept = delta <= 0.0;
        if (!accept && tau > 0.0) accept = uniform01(rng) < std::exp2(-delta / tau);

        result.log.push_back({iter, proposal.window, candidate.cost.total, accept});
        if (accept) {
            result.current = std::move(candidate);
            if (incremental) cache = std::move(candidate_cache);
        }
        result.current.iteration = iter;
        result.current.seed = options.seed;
        if (result.current.cost.total < result.best.cost.total) result.best = result.current;
        tau *= options.tau_decay;
    }
    return result;
}

std::vector<std::pair<std::size_t, CostReport>> cost_table_over_m(const History& h, const WindowPhi& base,
                                                                  std::size_t m_min, std::size_t m_max,
                                                                  const StructureOptions& structure) {
    if (m_max < m_min) return {};
    std::vector<std::pair<std::size_t, CostReport>> table(m_max - m_min + 1);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(table.size()); ++k) {
        WindowPhi phi = base;
        phi.window = m_min + static_cast<std::size_t>(k);
        table[static_cast<std::size_t>(k)] = {phi.window, evaluate_phi(h, phi, structure).cost};
    }
    return table;
}

}  // namespace phidbn
