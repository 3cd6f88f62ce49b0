#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phidbn {

/// Raised on contract violations (arity mismatches, malformed input, ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Observation = std::int32_t;
using ActionId = std::uint32_t;

/// Interaction record o1 a1 r1 o2 a2 r2 ... on.
///
/// Appends are checked against the cycle order observe -> act -> reward.
/// Time indices are 1-based in the accessors that take a `t`.
class History {
public:
    History() = default;

    void observe(Observation o);
    void act(ActionId a);
    void reward(double r);

    /// act + reward + observe in one call.
    void record(ActionId a, double r, Observation next);

    /// Number of observations (n).
    std::size_t length() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }

    std::span<const Observation> observations() const { return observations_; }
    std::span<const ActionId> actions() const { return actions_; }
    std::span<const double> rewards() const { return rewards_; }

    Observation observation(std::size_t t) const { return observations_.at(t - 1); }
    ActionId action(std::size_t t) const { return actions_.at(t - 1); }
    double reward_at(std::size_t t) const { return rewards_.at(t - 1); }

    /// h_t = o1 a1 r1 ... o_t.
    History prefix(std::size_t t) const;

    friend bool operator==(const History&, const History&) = default;

private:
    std::vector<Observation> observations_;
    std::vector<ActionId> actions_;
    std::vector<double> rewards_;
};

/// Binary feature vector x = (x^1..x^m). The constant bit x^0 is implicit.
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::size_t m) : bits_(m, 0) {}
    FeatureVector(std::initializer_list<int> bits);

    std::size_t size() const { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool value) { bits_.at(i) = value ? 1 : 0; }

    /// Bit i of the result is feature i. Requires size() <= 64.
    std::uint64_t packed() const;
    static FeatureVector unpack(std::uint64_t bits, std::size_t m);

    std::string to_string() const;

    auto operator<=>(const FeatureVector&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Identity of a feature: kind name plus integer parameters.
struct FeatureId {
    std::string name;
    std::vector<int> params;

    std::string to_string() const;
    auto operator<=>(const FeatureId&) const = default;
};

/// A named binary predicate over histories. `t` is the prefix length the
/// predicate is evaluated on; features must return 0 when their context
/// reaches before the start of the history.
class Feature {
public:
    using Predicate = std::function<bool(const History&, std::size_t t)>;

    Feature(FeatureId id, Predicate predicate);

    const FeatureId& id() const { return id_; }
    bool operator()(const History& h, std::size_t t) const { return predicate_(h, t); }

private:
    FeatureId id_;
    Predicate predicate_;
};

/// Ordered set of binary features (Phi).
class FeatureMap {
public:
    FeatureMap() = default;
    explicit FeatureMap(std::vector<Feature> features);

    std::size_t size() const { return features_.size(); }
    bool empty() const { return features_.empty(); }
    const Feature& operator[](std::size_t i) const { return features_.at(i); }

    /// Throws if a feature with the same id is already present.
    void add(Feature f);
    void remove(std::size_t i);
    std::optional<std::size_t> find(const FeatureId& id) const;
    std::vector<FeatureId> ids() const;

    auto begin() const { return features_.begin(); }
    auto end() const { return features_.end(); }

private:
    std::vector<Feature> features_;
};

/// Phi(h_t) for the prefix of length t.
FeatureVector evaluate_features_at(const FeatureMap& phi, const History& h, std::size_t t);

/// Phi(h) on the whole history.
FeatureVector evaluate_features(const FeatureMap& phi, const History& h);

/// [Phi(h_1), ..., Phi(h_n)].
std::vector<FeatureVector> feature_trajectory(const FeatureMap& phi, const History& h);

// Generic feature kinds.

/// Bit `bit` of o_{t-lag}; lag 0 is the current observation.
Feature observation_bit(int lag, int bit);
/// 1 iff the previous action a_{t-1} equals `a`.
Feature last_action_is(ActionId a);
/// 1 iff a previous action exists and differs from `a`.
Feature last_action_is_not(ActionId a);
Feature constant_feature(bool value);

/// Builds one of the generic kinds above from its id, or nullopt.
std::optional<Feature> make_generic_feature(const FeatureId& id);

/// Number of bits used per observation symbol for an alphabet of `size`.
std::size_t bits_for_alphabet(std::size_t size);

// History JSON Lines: {"t":int,"o":int,"a":int,"r":float} per cycle. The
// trailing observation that has no action yet is written as {"t":n,"o":int}.
void write_history_jsonl(std::ostream& os, const History& h);
void write_cycle_jsonl(std::ostream& os, std::size_t t, Observation o, ActionId a, double r);
History read_history_jsonl(std::istream& is);

}  // namespace phidbn
