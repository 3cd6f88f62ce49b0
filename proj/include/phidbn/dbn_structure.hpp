#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace phidbn {

/// Parent sets Pa^i over the previous time slice, one per feature.
/// Parent lists are kept sorted and duplicate-free; self-parents are allowed.
class DbnStructure {
public:
    DbnStructure() = default;
    /// m features, all with empty parent sets.
    explicit DbnStructure(std::size_t m) : parents_(m) {}
    explicit DbnStructure(std::vector<std::vector<std::size_t>> parents);

    std::size_t num_features() const { return parents_.size(); }
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
    void set_parents(std::size_t i, std::vector<std::size_t> parents);
    std::size_t max_in_degree() const;
    std::size_t num_edges() const;

    /// Throws unless every parent index is < m.
    void validate(std::size_t m) const;

    nlohmann::json to_json() const;
    static DbnStructure from_json(const nlohmann::json& j);

    friend bool operator==(const DbnStructure&, const DbnStructure&) = default;

private:
    std::vector<std::vector<std::size_t>> parents_;
};

std::string to_string(const DbnStructure& g);

}  // namespace phidbn
