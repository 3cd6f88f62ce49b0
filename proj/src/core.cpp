#include "phidbn/core.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace phidbn {

// ---------------------------------------------------------------- History

void History::observe(Observation o) {
    if (actions_.size() != observations_.size() || rewards_.size() != actions_.size()) {
        throw Error("History::observe: expected an action or reward first");
    }
    observations_.push_back(o);
}

void History::act(ActionId a) {
    if (observations_.size() != actions_.size() + 1) {
        throw Error("History::act: expected an observation first");
    }
    actions_.push_back(a);
}

void History::reward(double r) {
    if (actions_.size() != rewards_.size() + 1) {
        throw Error("History::reward: expected an action first");
    }
    rewards_.push_back(r);
}

void History::record(ActionId a, double r, Observation next) {
    act(a);
    reward(r);
    observe(next);
}

History History::prefix(std::size_t t) const {
    if (t > observations_.size()) throw Error("History::prefix: t exceeds history length");
    History h;
    h.observations_.assign(observations_.begin(), observations_.begin() + t);
    const std::size_t k = t == 0 ? 0 : std::min(t - 1, actions_.size());
    h.actions_.assign(actions_.begin(), actions_.begin() + k);
    h.rewards_.assign(rewards_.begin(), rewards_.begin() + std::min(k, rewards_.size()));
    return h;
}

// ---------------------------------------------------------- FeatureVector

FeatureVector::FeatureVector(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) bits_.push_back(b != 0 ? 1 : 0);
}

std::uint64_t FeatureVector::packed() const {
    if (bits_.size() > 64) throw Error("FeatureVector::packed: more than 64 features");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        v |= static_cast<std::uint64_t>(bits_[i]) << i;
    }
    return v;
}

FeatureVector FeatureVector::unpack(std::uint64_t bits, std::size_t m) {
    FeatureVector x(m);
    for (std::size_t i = 0; i < m; ++i) x.bits_[i] = (bits >> i) & 1U;
    return x;
}

std::string FeatureVector::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

// -------------------------------------------------------------- Features

std::string FeatureId::to_string() const {
    std::string s = name;
    s.push_back('(');
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (k) s.push_back(',');
        s += std::to_string(params[k]);
    }
    s.push_back(')');
    return s;
}

Feature::Feature(FeatureId id, Predicate predicate)
    : id_(std::move(id)), predicate_(std::move(predicate)) {
    if (!predicate_) throw Error("Feature: empty predicate for " + id_.to_string());
}

FeatureMap::FeatureMap(std::vector<Feature> features) {
    for (auto& f : features) add(std::move(f));
}

void FeatureMap::add(Feature f) {
    if (find(f.id())) throw Error("FeatureMap::add: duplicate feature " + f.id().to_string());
    features_.push_back(std::move(f));
}

void FeatureMap::remove(std::size_t i) {
    if (i >= features_.size()) throw Error("FeatureMap::remove: index out of range");
    features_.erase(features_.begin() + static_cast<std::ptrdiff_t>(i));
}

std::optional<std::size_t> FeatureMap::find(const FeatureId& id) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].id() == id) return i;
    }
    return std::nullopt;
}

std::vector<FeatureId> FeatureMap::ids() const {
    std::vector<FeatureId> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.id());
    return out;
}

FeatureVector evaluate_features_at(const FeatureMap& phi, const History& h, std::size_t t) {
    FeatureVector x(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) x.set(i, phi[i](h, t));
    return x;
}

FeatureVector evaluate_features(const FeatureMap& phi, const History& h) {
    return evaluate_features_at(phi, h, h.length());
}

std::vector<FeatureVector> feature_trajectory(const FeatureMap& phi, const History& h) {
    std::vector<FeatureVector> xs;
    xs.reserve(h.length());
    for (std::size_t t = 1; t <= h.length(); ++t) xs.push_back(evaluate_features_at(phi, h, t));
    return xs;
}

Feature observation_bit(int lag, int bit) {
    if (lag < 0 || bit < 0 || bit > 30) throw Error("observation_bit: bad parameters");
    return Feature({"obs_bit", {lag, bit}}, [lag, bit](const History& h, std::size_t t) {
        const auto l = static_cast<std::size_t>(lag);
        if (t <= l) return false;
        return ((h.observation(t - l) >> bit) & 1) != 0;
    });
}

Feature last_action_is(ActionId a) {
    return Feature({"last_action", {static_cast<int>(a)}}, [a](const History& h, std::size_t t) {
        return t >= 2 && h.action(t - 1) == a;
    });
}

Feature last_action_is_not(ActionId a) {
    return Feature({"last_action_not", {static_cast<int>(a)}}, [a](const History& h, std::size_t t) {
        return t >= 2 && h.action(t - 1) != a;
    });
}

Feature constant_feature(bool value) {
    return Feature({"const", {value ? 1 : 0}}, [value](const History&, std::size_t) { return value; });
}

std::optional<Feature> make_generic_feature(const FeatureId& id) {
    const auto& p = id.params;
    if (id.name == "obs_bit" && p.size() == 2) return observation_bit(p[0], p[1]);
    if (id.name == "last_action" && p.size() == 1 && p[0] >= 0) {
        return last_action_is(static_cast<ActionId>(p[0]));
    }
    if (id.name == "last_action_not" && p.size() == 1 && p[0] >= 0) {
        return last_action_is_not(static_cast<ActionId>(p[0]));
    }
    if (id.name == "const" && p.size() == 1) return constant_feature(p[0] != 0);
    return std::nullopt;
}

std::size_t bits_for_alphabet(std::size_t size) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < size) ++bits;
    return std::max<std::size_t>(bits, 1);
}

// ----------------------------------------------------------- JSON Lines

void write_cycle_jsonl(std::ostream& os, std::size_t t, Observation o, ActionId a, double r) {
    nlohmann::ordered_json j;
    j["t"] = t;
    j["o"] = o;
    j["a"] = a;
    j["r"] = r;
    os << j.dump() << '\n';
}

void write_history_jsonl(std::ostream& os, const History& h) {
    const auto obs = h.observations();
    const auto acts = h.actions();
    const auto rews = h.rewards();
    for (std::size_t k = 0; k < obs.size(); ++k) {
        if (k < rews.size()) {
            write_cycle_jsonl(os, k + 1, obs[k], acts[k], rews[k]);
        } else {
            nlohmann::ordered_json j;
            j["t"] = k + 1;
            j["o"] = obs[k];
            if (k < acts.size()) j["a"] = acts[k];
            os << j.dump() << '\n';
        }
    }
}

History read_history_jsonl(std::istream& is) {
    History h;
    std::string line;
    std::size_t lineno = 0;
    bool open_cycle = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (open_cycle) {
            throw Error("history line " + std::to_string(lineno) + ": record after an incomplete cycle");
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("history line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("o") || !j["o"].is_number_integer()) {
            throw Error("history line " + std::to_string(lineno) + ": missing integer field \"o\"");
        }
        if (j.contains("t") && j["t"].get<std::size_t>() != h.length() + 1) {
            throw Error("history line " + std::to_string(lineno) + ": non-consecutive t");
        }
        h.observe(j["o"].get<Observation>());
        const bool has_a = j.contains("a") && !j["a"].is_null();
        const bool has_r = j.contains("r") && !j["r"].is_null();
        if (has_a) {
            const auto a = j["a"].get<std::int64_t>();
            if (a < 0) throw Error("history line " + std::to_string(lineno) + ": negative action");
            h.act(static_cast<ActionId>(a));
        }
        if (has_r) {
            if (!has_a) throw Error("history line " + std::to_string(lineno) + ": reward without action");
            h.reward(j["r"].get<double>());
        }
        open_cycle = !(has_a && has_r);
    }
    return h;
}

}  // namespace phidbn
