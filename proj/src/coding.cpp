#include "phidbn/coding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace phidbn {

double entropy_bits(std::span<const std::uint64_t> counts) {
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    if (n == 0) return 0.0;
    const double log_n = std::log2(static_cast<double>(n));
    double bits = 0.0;
    for (auto c : counts) {
        if (c == 0 || c == n) continue;
        const double dc = static_cast<double>(c);
        bits += dc * (log_n - std::log2(dc));
    }
    return bits;
}

CodeLength cl_multinomial(std::span<const std::uint64_t> counts) {
    std::uint64_t n = 0;
    std::size_t nonempty = 0;
    for (auto c : counts) {
        n += c;
        if (c > 0) ++nonempty;
    }
    if (n == 0) return 0.0;
    return entropy_bits(counts) + 0.5 * static_cast<double>(nonempty - 1) * std::log2(static_cast<double>(n));
}

CodeLength cl_rows(const FeatureRows& rows) {
    CodeLength bits = 0.0;
    for (const auto& [key, oc] : rows) {
        const std::uint64_t cells[2] = {oc.zeros, oc.ones};
        bits += cl_multinomial(cells);
    }
    return bits;
}

double nll_rows(const FeatureRows& rows) {
    double bits = 0.0;
    for (const auto& [key, oc] : rows) {
        const std::uint64_t cells[2] = {oc.zeros, oc.ones};
        bits += entropy_bits(cells);
    }
    return bits;
}

// ------------------------------------------------------- TransitionCounts

TransitionCounts::TransitionCounts(DbnStructure structure)
    : structure_(std::move(structure)), rows_(structure_.num_features()) {}

std::uint64_t TransitionCounts::total(std::size_t i) const {
    std::uint64_t n = 0;
    for (const auto& [key, oc] : rows_.at(i)) n += oc.total();
    return n;
}

std::size_t TransitionCounts::num_rows() const {
    std::size_t k = 0;
    for (const auto& r : rows_) k += r.size();
    return k;
}

void TransitionCounts::write_csv(std::ostream& os) const {
    os << "i,a,u_bits,x,count\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const std::size_t width = structure_.parents(i).size();
        for (const auto& [key, oc] : rows_[i]) {
            std::string u;
            for (std::size_t k = 0; k < width; ++k) u.push_back(((key.parents >> k) & 1U) ? '1' : '0');
            if (oc.zeros) os << i << ',' << key.action << ',' << u << ",0," << oc.zeros << '\n';
            if (oc.ones) os << i << ',' << key.action << ',' << u << ",1," << oc.ones << '\n';
        }
    }
}

// ------------------------------------------------------------- Packing

PackedTrajectory pack_trajectory(std::span<const FeatureVector> xs, std::span<const ActionId> as,
                                 std::size_t min_actions) {
    PackedTrajectory data;
    data.num_features = xs.empty() ? 0 : xs.front().size();
    if (data.num_features > 64) throw Error("pack_trajectory: more than 64 features");
    const std::size_t transitions = xs.empty() ? 0 : xs.size() - 1;
    if (as.size() < transitions) {
        throw Error("pack_trajectory: " + std::to_string(as.size()) + " actions for " +
                    std::to_string(transitions) + " transitions");
    }
    data.states.reserve(xs.size());
    for (const auto& x : xs) {
        if (x.size() != data.num_features) throw Error("pack_trajectory: ragged feature vectors");
        data.states.push_back(x.packed());
    }
    data.actions.assign(as.begin(), as.begin() + static_cast<std::ptrdiff_t>(transitions));
    data.num_actions = min_actions;
    for (auto a : data.actions) data.num_actions = std::max<std::size_t>(data.num_actions, a + 1);
    return data;
}

std::uint64_t parent_assignment(std::uint64_t state, std::span<const std::size_t> parents) {
    std::uint64_t u = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) u |= ((state >> parents[k]) & 1U) << k;
    return u;
}

FeatureRows accumulate_feature_rows(const PackedTrajectory& data, std::size_t i,
                                    std::span<const std::size_t> parents) {
    FeatureRows rows;
    for (std::size_t t = 0; t < data.transitions(); ++t) {
        const RowKey key{data.actions[t], parent_assignment(data.states[t], parents)};
        rows[key].add(data.bit(t + 1, i));
    }
    return rows;
}

namespace {

void check_arity(const PackedTrajectory& data, const DbnStructure& g) {
    if (!data.states.empty() && g.num_features() != data.num_features) {
        throw Error("accumulate_counts: structure has " + std::to_string(g.num_features()) +
                    " features but the trajectory has " + std::to_string(data.num_features));
    }
    g.validate(g.num_features());
}

}  // namespace

TransitionCounts accumulate_counts_serial(const PackedTrajectory& data, const DbnStructure& g) {
    check_arity(data, g);
    TransitionCounts counts(g);
    for (std::size_t i = 0; i < g.num_features(); ++i) {
        counts.mutable_rows(i) = accumulate_feature_rows(data, i, g.parents(i));
    }
    return counts;
}

TransitionCounts accumulate_counts(const PackedTrajectory& data, const DbnStructure& g) {
    check_arity(data, g);
    TransitionCounts counts(g);
    const auto m = static_cast<std::int64_t>(g.num_features());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < m; ++i) {
        const auto fi = static_cast<std::size_t>(i);
        counts.mutable_rows(fi) = accumulate_feature_rows(data, fi, g.parents(fi));
    }
    return counts;
}

TransitionCounts accumulate_counts(std::span<const FeatureVector> xs, std::span<const ActionId> as,
                                   const DbnStructure& g) {
    if (!xs.empty() && xs.front().size() != g.num_features()) {
        throw Error("accumulate_counts: structure has " + std::to_string(g.num_features()) +
                    " features but vectors have " + std::to_string(xs.front().size()));
    }
    return accumulate_counts(pack_trajectory(xs, as), g);
}

CodeLength cl_state_sequence(const TransitionCounts& counts) {
    CodeLength bits = 0.0;
    for (std::size_t i = 0; i < counts.num_features(); ++i) bits += cl_rows(counts.rows(i));
    return bits;
}

double neg_log_likelihood(const TransitionCounts& counts) {
    double bits = 0.0;
    for (std::size_t i = 0; i < counts.num_features(); ++i) bits += nll_rows(counts.rows(i));
    return bits;
}

}  // namespace phidbn
