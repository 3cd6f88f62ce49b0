#include "phidbn/model.hpp"

namespace phidbn {

FactoredModel::FactoredModel(DbnStructure structure, std::size_t num_actions,
                             std::vector<std::map<RowKey, double>> tables)
    : structure_(std::move(structure)), num_actions_(num_actions), tables_(std::move(tables)) {
    if (tables_.size() != structure_.num_features()) throw Error("FactoredModel: one table per feature required");
    for (const auto& t : tables_) {
        for (const auto& [key, p] : t) {
            if (!(p >= 0.0 && p <= 1.0)) throw Error("FactoredModel: probability outside [0,1]");
        }
    }
}

double FactoredModel::p1(std::size_t i, ActionId a, std::uint64_t parent_bits) const {
    const auto& t = tables_.at(i);
    const auto it = t.find(RowKey{a, parent_bits});
    return it == t.end() ? kUnseenProbability : it->second;
}

bool FactoredModel::seen(std::size_t i, ActionId a, std::uint64_t parent_bits) const {
    return tables_.at(i).contains(RowKey{a, parent_bits});
}

nlohmann::json FactoredModel::to_json() const {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tables_.size(); ++i) {
        const std::size_t width = structure_.parents(i).size();
        for (const auto& [key, p] : tables_[i]) {
            std::string u;
            for (std::size_t k = 0; k < width; ++k) u.push_back(((key.parents >> k) & 1U) ? '1' : '0');
            nlohmann::ordered_json row;
            row["i"] = i;
            row["a"] = key.action;
            row["u"] = u;
            row["p1"] = p;
            rows.push_back(row);
        }
    }
    return rows;
}

FactoredModel estimate_model(const TransitionCounts& counts, std::size_t num_actions) {
    std::vector<std::map<RowKey, double>> tables(counts.num_features());
    for (std::size_t i = 0; i < counts.num_features(); ++i) {
        for (const auto& [key, oc] : counts.rows(i)) {
            if (oc.total() == 0) continue;
            tables[i][key] = static_cast<double>(oc.ones) / static_cast<double>(oc.total());
        }
    }
    return FactoredModel(counts.structure(), num_actions, std::move(tables));
}

namespace {

void check_arity(const FactoredModel& model, const FeatureVector& x) {
    if (x.size() != model.num_features()) {
        throw Error("FactoredModel: model has " + std::to_string(model.num_features()) + " features, vector has " +
                    std::to_string(x.size()));
    }
}

}  // namespace

double transition_probability(const FactoredModel& model, const FeatureVector& x, ActionId a,
                              const FeatureVector& next) {
    check_arity(model, x);
    check_arity(model, next);
    const std::uint64_t state = x.packed();
    double p = 1.0;
    for (std::size_t i = 0; i < model.num_features(); ++i) {
        const double q = model.p1(i, a, parent_assignment(state, model.structure().parents(i)));
        p *= next[i] ? q : 1.0 - q;
    }
    return p;
}

FeatureVector sample_step(const FactoredModel& model, const FeatureVector& x, ActionId a, Rng& rng) {
    check_arity(model, x);
    const std::uint64_t state = x.packed();
    FeatureVector next(model.num_features());
    for (std::size_t i = 0; i < model.num_features(); ++i) {
        const double q = model.p1(i, a, parent_assignment(state, model.structure().parents(i)));
        next.set(i, bernoulli(rng, q));
    }
    return next;
}

}  // namespace phidbn
