#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phidbn/core.hpp"
#include "phidbn/dbn_structure.hpp"
#include "phidbn/rng.hpp"

namespace phidbn::envs {

// ------------------------------------------------------------- vacuum

enum class Room : std::uint8_t { A = 0, B = 1 };

/// Days since each room was last cleaned (capped at 3) and robot position.
struct VacuumState {
    int age_a = 3;
    Room room = Room::A;
    int age_b = 3;

    auto operator<=>(const VacuumState&) const = default;
};

inline constexpr VacuumState kVacuumStart{3, Room::A, 3};
inline constexpr int kMaxAge = 3;

/// Nothing, Suck, Move.
inline constexpr ActionId kNothing = 0;
inline constexpr ActionId kSuck = 1;
inline constexpr ActionId kMove = 2;
inline constexpr std::size_t kVacuumActions = 3;

struct VacuumStep {
    VacuumState next;
    double reward = 0.0;
};

/// Reward on the successor: 1[age_a' < 3] + 1[age_b' < 3] - 1[a != N].
double vacuum_reward(const VacuumState& next, ActionId a);
VacuumStep vacuum_step(const VacuumState& s, ActionId a);

/// Suck and Move each fail with the given probabilities. A failed action
/// moves the world like Nothing but still pays the action cost.
VacuumStep vacuum_stochastic_step(const VacuumState& s, ActionId a, double suck_failure, double move_failure,
                                  Rng& rng);

/// Observation in {A,B} x {Clean,Dirty}: bit 0 = room (B), bit 1 = dirty.
/// A room is dirty iff its age is 3.
Observation vacuum_observation(const VacuumState& s);
inline constexpr std::size_t kVacuumObservations = 4;

/// Dense index in [0, 32).
std::size_t vacuum_index(const VacuumState& s);
VacuumState vacuum_state_from_index(std::size_t k);
inline constexpr std::size_t kVacuumStates = 32;

enum class EncodingMode { compact, onehot };

EncodingMode parse_encoding(const std::string& s);
std::string to_string(EncodingMode e);

/// Binary layout of a vacuum state:
///   compact: age_a (2 bits, low first) | room | age_b (2 bits)
///   onehot:  1[age_a = 0..3] | room | 1[age_b = 0..3]
/// followed, when enabled, by 1[a_{t-1} = a] for a = N, S, M.
struct Encoding {
    EncodingMode mode = EncodingMode::compact;
    bool action_indicators = false;

    std::size_t state_width() const { return mode == EncodingMode::compact ? 5 : 9; }
    std::size_t width() const { return state_width() + (action_indicators ? kVacuumActions : 0); }
};

FeatureVector encode(const VacuumState& s, std::optional<ActionId> last_action, const Encoding& enc);
VacuumState decode(const FeatureVector& x, const Encoding& enc);

/// History features that reproduce `encode` from o/a alone, assuming the
/// episode starts in kVacuumStart.
FeatureMap vacuum_feature_map(const Encoding& enc);

/// Parent sets of the true dynamics under the given encoding.
DbnStructure vacuum_true_structure(const Encoding& enc);

/// [1[age_a < 3], 1[age_b < 3], 1[a_{t-1} != N]] as history features.
FeatureMap vacuum_reward_feature_map();

/// Generic kinds plus the vacuum history features.
std::optional<Feature> make_feature(const FeatureId& id);
FeatureMap make_feature_map(const std::vector<FeatureId>& ids);

// -------------------------------------------------------- environments

struct EnvResponse {
    Observation observation = 0;
    double reward = 0.0;
};

/// Single-owner stateful environment. Randomness comes from the engine the
/// environment was seeded with.
class Environment {
public:
    virtual ~Environment() = default;

    virtual Observation reset() = 0;
    virtual EnvResponse step(ActionId a) = 0;
    virtual std::size_t num_actions() const = 0;
    virtual std::size_t observation_alphabet() const = 0;
    virtual std::string name() const = 0;
};

class VacuumEnv final : public Environment {
public:
    /// Failure probabilities of 0 give the deterministic world.
    VacuumEnv(std::uint64_t seed, double suck_failure = 0.0, double move_failure = 0.0);

    Observation reset() override;
    EnvResponse step(ActionId a) override;
    std::size_t num_actions() const override { return kVacuumActions; }
    std::size_t observation_alphabet() const override { return kVacuumObservations; }
    std::string name() const override;

    const VacuumState& state() const { return state_; }
    std::optional<ActionId> last_action() const { return last_action_; }

private:
    Rng rng_;
    double suck_failure_;
    double move_failure_;
    VacuumState state_ = kVacuumStart;
    std::optional<ActionId> last_action_;
};

/// Binary observation stream o_t = f(o_{t-k}..o_{t-1}, a_{t-1}) with flip
/// noise. The reward of a step is the observation it emits.
///
/// Rule table entry index: context c = sum_j o_{t-j} << (j-1), j = 1..k,
/// plus a * 2^k when the rule is action dependent.
class BitstreamEnv final : public Environment {
public:
    BitstreamEnv(std::size_t order, std::vector<std::uint8_t> rule, bool action_dependent, double noise,
                 std::size_t num_actions, std::uint64_t seed);

    /// Rule given as a hexadecimal number whose bit c is entry c.
    static BitstreamEnv from_hex(std::size_t order, const std::string& hex, bool action_dependent, double noise,
                                 std::size_t num_actions, std::uint64_t seed);

    Observation reset() override;
    EnvResponse step(ActionId a) override;
    std::size_t num_actions() const override { return num_actions_; }
    std::size_t observation_alphabet() const override { return 2; }
    std::string name() const override { return "bitstream"; }

    std::size_t order() const { return order_; }
    /// Noise-free successor for the given context and action.
    bool rule_output(std::uint64_t context, ActionId a) const;
    std::uint64_t context() const { return context_; }

private:
    Observation emit(ActionId a);

    std::size_t order_;
    std::vector<std::uint8_t> rule_;
    bool action_dependent_;
    double noise_;
    std::size_t num_actions_;
    Rng rng_;
    std::uint64_t context_ = 0;
};

/// Parity of the last k bits as a rule table.
std::vector<std::uint8_t> parity_rule(std::size_t order);

/// Runs `steps` cycles with a uniformly random policy (separate engine
/// seeded from `policy_seed`).
History random_policy_history(Environment& env, std::size_t steps, std::uint64_t policy_seed);

}  // namespace phidbn::envs
