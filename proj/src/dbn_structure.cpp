#include "phidbn/dbn_structure.hpp"

#include <algorithm>

#include "phidbn/core.hpp"

namespace phidbn {

namespace {

std::vector<std::size_t> normalized(std::vector<std::size_t> parents) {
    std::sort(parents.begin(), parents.end());
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    return parents;
}

}  // namespace

DbnStructure::DbnStructure(std::vector<std::vector<std::size_t>> parents) : parents_(std::move(parents)) {
    for (auto& p : parents_) p = normalized(std::move(p));
}

void DbnStructure::set_parents(std::size_t i, std::vector<std::size_t> parents) {
    parents_.at(i) = normalized(std::move(parents));
}

std::size_t DbnStructure::max_in_degree() const {
    std::size_t k = 0;
    for (const auto& p : parents_) k = std::max(k, p.size());
    return k;
}

std::size_t DbnStructure::num_edges() const {
    std::size_t k = 0;
    for (const auto& p : parents_) k += p.size();
    return k;
}

void DbnStructure::validate(std::size_t m) const {
    if (parents_.size() != m) {
        throw Error("DbnStructure: structure has " + std::to_string(parents_.size()) +
                    " features, expected " + std::to_string(m));
    }
    for (const auto& p : parents_) {
        if (p.size() > 63) throw Error("DbnStructure: more than 63 parents");
        for (auto j : p) {
            if (j >= m) throw Error("DbnStructure: parent index " + std::to_string(j) + " out of range");
        }
    }
}

nlohmann::json DbnStructure::to_json() const {
    return nlohmann::json{{"parents", parents_}};
}

DbnStructure DbnStructure::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("parents")) throw Error("DbnStructure: missing \"parents\"");
    DbnStructure g(j.at("parents").get<std::vector<std::vector<std::size_t>>>());
    g.validate(g.num_features());
    return g;
}

std::string to_string(const DbnStructure& g) {
    std::string s;
    for (std::size_t i = 0; i < g.num_features(); ++i) {
        if (i) s += ' ';
        s += std::to_string(i) + "<-{";
        const auto& p = g.parents(i);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) s += ',';
            s += std::to_string(p[k]);
        }
        s += '}';
    }
    return s;
}

}  // namespace phidbn
