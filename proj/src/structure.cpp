#include "phidbn/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace phidbn {

StructureStrategy parse_structure_strategy(const std::string& s) {
    if (s == "exhaustive") return StructureStrategy::exhaustive;
    if (s == "mi") return StructureStrategy::mutual_information;
    if (s == "chowliu") return StructureStrategy::chow_liu;
    throw Error("unknown structure strategy '" + s + "' (expected exhaustive|mi|chowliu)");
}

std::string to_string(StructureStrategy s) {
    switch (s) {
        case StructureStrategy::exhaustive: return "exhaustive";
        case StructureStrategy::mutual_information: return "mi";
        case StructureStrategy::chow_liu: return "chowliu";
    }
    return "?";
}

// ------------------------------------------------------- parent search

namespace {

// Dense tables are used while actions * 2^k stays below this many rows.
constexpr std::size_t kDenseRowLimit = std::size_t{1} << 22;

}  // namespace

CodeLength feature_code_length(const PackedTrajectory& data, std::size_t i, std::span<const std::size_t> parents) {
    const std::size_t k = parents.size();
    const std::size_t actions = std::max<std::size_t>(data.num_actions, 1);
    if (k >= 40 || (actions << k) > kDenseRowLimit) {
        return cl_rows(accumulate_feature_rows(data, i, parents));
    }
    const std::size_t rows = actions << k;
    std::vector<std::uint64_t> cells(2 * rows, 0);
    for (std::size_t t = 0; t < data.transitions(); ++t) {
        const std::size_t row = (static_cast<std::size_t>(data.actions[t]) << k) |
                                static_cast<std::size_t>(parent_assignment(data.states[t], parents));
        ++cells[2 * row + (data.bit(t + 1, i) ? 1 : 0)];
    }
    CodeLength bits = 0.0;
    for (std::size_t row = 0; row < rows; ++row) {
        if (cells[2 * row] + cells[2 * row + 1] == 0) continue;
        bits += cl_multinomial(std::span<const std::uint64_t>(&cells[2 * row], 2));
    }
    return bits;
}

ParentSearchResult search_parents_exhaustive(const PackedTrajectory& data, std::size_t i, std::size_t max_parents) {
    const std::size_t m = data.num_features;
    if (i >= m) throw Error("search_parents_exhaustive: feature index out of range");
    const std::size_t p = std::min(max_parents, m);

    ParentSearchResult best{{}, feature_code_length(data, i, {})};
    std::vector<std::size_t> subset;
    for (std::size_t size = 1; size <= p; ++size) {
        // Lexicographic enumeration of all `size`-subsets of {0..m-1}.
        subset.resize(size);
        std::iota(subset.begin(), subset.end(), std::size_t{0});
        while (true) {
            const CodeLength bits = feature_code_length(data, i, subset);
            if (bits < best.bits - 1e-9) best = {subset, bits};
            std::size_t pos = size;
            while (pos > 0 && subset[pos - 1] == m - size + pos - 1) --pos;
            if (pos == 0) break;
            ++subset[pos - 1];
            for (std::size_t q = pos; q < size; ++q) subset[q] = subset[q - 1] + 1;
        }
    }
    return best;
}

namespace {

DbnStructure search_exhaustive_structure(const PackedTrajectory& data, std::size_t max_parents, bool parallel) {
    const std::size_t m = data.num_features;
    DbnStructure g(m);
    std::vector<ParentSearchResult> results(m);
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
            results[static_cast<std::size_t>(i)] =
                search_parents_exhaustive(data, static_cast<std::size_t>(i), max_parents);
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) results[i] = search_parents_exhaustive(data, i, max_parents);
    }
    for (std::size_t i = 0; i < m; ++i) g.set_parents(i, std::move(results[i].parents));
    return g;
}

DbnStructure dispatch(const PackedTrajectory& data, const StructureOptions& options, bool parallel) {
    switch (options.strategy) {
        case StructureStrategy::exhaustive:
            return search_exhaustive_structure(data, options.max_parents, parallel);
        case StructureStrategy::mutual_information:
            return mutual_information_edges(data);
        case StructureStrategy::chow_liu:
            return chow_liu_forest(data, options.chow_liu_threshold.value_or(mdl_mi_threshold(data.transitions())));
    }
    throw Error("search_structure: unknown strategy");
}

}  // namespace

DbnStructure search_structure(const PackedTrajectory& data, const StructureOptions& options) {
    return dispatch(data, options, true);
}

DbnStructure search_structure_serial(const PackedTrajectory& data, const StructureOptions& options) {
    return dispatch(data, options, false);
}

// ----------------------------------------------------- MI heuristics

double mdl_mi_threshold(std::size_t n) {
    if (n < 2) return 0.0;
    const double dn = static_cast<double>(n);
    return std::log2(dn) / (2.0 * dn);
}

std::vector<std::vector<double>> transition_mutual_information(const PackedTrajectory& data) {
    const std::size_t m = data.num_features;
    const std::size_t n = data.transitions();
    std::vector<std::vector<double>> mi(m, std::vector<double>(m, 0.0));
    if (n == 0) return mi;
    const double dn = static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t js = 0; js < static_cast<std::int64_t>(m); ++js) {
        const auto j = static_cast<std::size_t>(js);
        for (std::size_t i = 0; i < m; ++i) {
            std::uint64_t joint[2][2] = {{0, 0}, {0, 0}};
            for (std::size_t t = 0; t < n; ++t) ++joint[data.bit(t, j)][data.bit(t + 1, i)];
            double v = 0.0;
            for (int a = 0; a < 2; ++a) {
                const double pa = static_cast<double>(joint[a][0] + joint[a][1]) / dn;
                for (int b = 0; b < 2; ++b) {
                    if (joint[a][b] == 0) continue;
                    const double pb = static_cast<double>(joint[0][b] + joint[1][b]) / dn;
                    const double pab = static_cast<double>(joint[a][b]) / dn;
                    v += pab * std::log2(pab / (pa * pb));
                }
            }
            mi[j][i] = std::max(v, 0.0);
        }
    }
    return mi;
}

DbnStructure mutual_information_edges(const PackedTrajectory& data) {
    const std::size_t m = data.num_features;
    DbnStructure g(m);
    if (data.transitions() < 1) return g;
    const auto mi = transition_mutual_information(data);
    const double threshold = mdl_mi_threshold(data.transitions());
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> parents;
        for (std::size_t j = 0; j < m; ++j) {
            if (mi[j][i] > threshold) parents.push_back(j);
        }
        g.set_parents(i, std::move(parents));
    }
    return g;
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

}  // namespace

DbnStructure chow_liu_forest(const PackedTrajectory& data, double threshold) {
    const std::size_t m = data.num_features;
    DbnStructure g(m);
    if (data.transitions() < 1 || m == 0) return g;
    const auto mi = transition_mutual_information(data);

    // Node j is x^j_{t-1}; node m + i is x^i_t.
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            if (mi[j][i] > threshold) edges.emplace_back(mi[j][i], j, i);
        }
    }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

    DisjointSets sets(2 * m);
    std::vector<std::vector<std::size_t>> parents(m);
    for (const auto& [w, j, i] : edges) {
        if (sets.unite(j, m + i)) parents[i].push_back(j);
    }
    for (std::size_t i = 0; i < m; ++i) g.set_parents(i, std::move(parents[i]));
    return g;
}

// ------------------------------------------------------------------ Cost

CodeLength reward_code_length(std::span<const FeatureVector> xs, std::span<const double> rewards,
                              RewardModel* fitted) {
    const auto samples = pair_rewards(xs, rewards);
    const std::size_t m = xs.empty() ? 0 : xs.front().size();
    const auto model = fit_weights(build_design(samples.xs, samples.rs, m));
    if (fitted) *fitted = model;
    return cl_rewards(model, m, samples.size());
}

CostReport cost_from_trajectory(std::span<const FeatureVector> xs, std::span<const ActionId> actions,
                                std::span<const double> rewards, const DbnStructure& g) {
    if (!xs.empty() && xs.front().size() != g.num_features()) {
        throw Error("cost: structure has " + std::to_string(g.num_features()) + " features, feature map has " +
                    std::to_string(xs.front().size()));
    }
    if (xs.size() <= 1) return CostReport{};
    const auto counts = accumulate_counts(pack_trajectory(xs, actions), g);
    return CostReport::make(cl_state_sequence(counts), reward_code_length(xs, rewards));
}

CostReport cost(const FeatureMap& phi, const DbnStructure& g, const History& h) {
    if (phi.size() != g.num_features()) {
        throw Error("cost: structure has " + std::to_string(g.num_features()) + " features, feature map has " +
                    std::to_string(phi.size()));
    }
    const auto xs = feature_trajectory(phi, h);
    return cost_from_trajectory(xs, h.actions(), h.rewards(), g);
}

}  // namespace phidbn
