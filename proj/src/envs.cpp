#include "phidbn/envs.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace phidbn::envs {

// ---------------------------------------------------------------- vacuum

double vacuum_reward(const VacuumState& next, ActionId a) {
    return (next.age_a < kMaxAge ? 1.0 : 0.0) + (next.age_b < kMaxAge ? 1.0 : 0.0) - (a != kNothing ? 1.0 : 0.0);
}

VacuumStep vacuum_step(const VacuumState& s, ActionId a) {
    if (a >= kVacuumActions) throw Error("vacuum_step: action out of range");
    VacuumState next;
    next.age_a = (s.room == Room::A && a == kSuck) ? 0 : std::min(s.age_a + 1, kMaxAge);
    next.age_b = (s.room == Room::B && a == kSuck) ? 0 : std::min(s.age_b + 1, kMaxAge);
    next.room = a == kMove ? (s.room == Room::B ? Room::A : Room::B) : s.room;
    return {next, vacuum_reward(next, a)};
}

VacuumStep vacuum_stochastic_step(const VacuumState& s, ActionId a, double suck_failure, double move_failure,
                                  Rng& rng) {
    if (suck_failure < 0.0 || suck_failure > 1.0 || move_failure < 0.0 || move_failure > 1.0) {
        throw Error("vacuum_stochastic_step: failure probabilities must lie in [0,1]");
    }
    bool failed = false;
    if (a == kSuck) failed = bernoulli(rng, suck_failure);
    if (a == kMove) failed = bernoulli(rng, move_failure);
    if (!failed) return vacuum_step(s, a);
    // A failed action moves the world like N but still costs.
    auto step = vacuum_step(s, kNothing);
    step.reward = vacuum_reward(step.next, a);
    return step;
}

Observation vacuum_observation(const VacuumState& s) {
    const int age = s.room == Room::A ? s.age_a : s.age_b;
    return static_cast<Observation>((s.room == Room::B ? 1 : 0) | (age == kMaxAge ? 2 : 0));
}

std::size_t vacuum_index(const VacuumState& s) {
    return static_cast<std::size_t>(s.age_a) * 8 + (s.room == Room::B ? 4 : 0) + static_cast<std::size_t>(s.age_b);
}

VacuumState vacuum_state_from_index(std::size_t k) {
    if (k >= kVacuumStates) throw Error("vacuum_state_from_index: index out of range");
    return {static_cast<int>(k / 8), (k / 4) % 2 ? Room::B : Room::A, static_cast<int>(k % 4)};
}

EncodingMode parse_encoding(const std::string& s) {
    if (s == "compact") return EncodingMode::compact;
    if (s == "onehot") return EncodingMode::onehot;
    throw Error("unknown encoding '" + s + "' (expected compact|onehot)");
}

std::string to_string(EncodingMode e) {
    return e == EncodingMode::compact ? "compact" : "onehot";
}

FeatureVector encode(const VacuumState& s, std::optional<ActionId> last_action, const Encoding& enc) {
    FeatureVector x(enc.width());
    const bool in_b = s.room == Room::B;
    if (enc.mode == EncodingMode::compact) {
        x.set(0, s.age_a & 1);
        x.set(1, (s.age_a >> 1) & 1);
        x.set(2, in_b);
        x.set(3, s.age_b & 1);
        x.set(4, (s.age_b >> 1) & 1);
    } else {
        x.set(static_cast<std::size_t>(s.age_a), true);
        x.set(4, in_b);
        x.set(5 + static_cast<std::size_t>(s.age_b), true);
    }
    if (enc.action_indicators && last_action) {
        if (*last_action >= kVacuumActions) throw Error("encode: action out of range");
        x.set(enc.state_width() + *last_action, true);
    }
    return x;
}

VacuumState decode(const FeatureVector& x, const Encoding& enc) {
    if (x.size() != enc.width()) throw Error("decode: width mismatch");
    VacuumState s;
    if (enc.mode == EncodingMode::compact) {
        s.age_a = (x[0] ? 1 : 0) | (x[1] ? 2 : 0);
        s.room = x[2] ? Room::B : Room::A;
        s.age_b = (x[3] ? 1 : 0) | (x[4] ? 2 : 0);
        return s;
    }
    auto age_from = [&](std::size_t base) {
        int age = -1;
        for (int v = 0; v <= kMaxAge; ++v) {
            if (x[base + static_cast<std::size_t>(v)]) {
                if (age >= 0) throw Error("decode: one-hot block has several bits set");
                age = v;
            }
        }
        if (age < 0) throw Error("decode: one-hot block is empty");
        return age;
    };
    s.age_a = age_from(0);
    s.room = x[4] ? Room::B : Room::A;
    s.age_b = age_from(5);
    return s;
}

namespace {

Room room_at(const History& h, std::size_t t) {
    return (h.observation(t) & 1) ? Room::B : Room::A;
}

// Age of `room` in h_t under the deterministic dynamics from kVacuumStart:
// steps since the latest successful suck in that room, capped at 3.
int age_from_history(const History& h, std::size_t t, Room room) {
    for (std::size_t back = 1; back <= static_cast<std::size_t>(kMaxAge) && back < t; ++back) {
        const std::size_t tp = t - back;
        if (h.action(tp) == kSuck && room_at(h, tp) == room) return static_cast<int>(back - 1);
    }
    return kMaxAge;
}

Room parse_room(int v) {
    if (v != 0 && v != 1) throw Error("vacuum feature: room must be 0 (A) or 1 (B)");
    return v ? Room::B : Room::A;
}

Feature vacuum_age_bit(Room room, int bit) {
    return Feature({"vacuum_age_bit", {static_cast<int>(room), bit}}, [room, bit](const History& h, std::size_t t) {
        return t >= 1 && ((age_from_history(h, t, room) >> bit) & 1) != 0;
    });
}

Feature vacuum_age_is(Room room, int value) {
    return Feature({"vacuum_age_is", {static_cast<int>(room), value}}, [room, value](const History& h, std::size_t t) {
        return t >= 1 && age_from_history(h, t, room) == value;
    });
}

Feature vacuum_age_below(Room room, int threshold) {
    return Feature({"vacuum_age_lt", {static_cast<int>(room), threshold}},
                   [room, threshold](const History& h, std::size_t t) {
                       return t >= 1 && age_from_history(h, t, room) < threshold;
                   });
}

Feature vacuum_in_room_b() {
    return Feature({"vacuum_room", {}}, [](const History& h, std::size_t t) {
        return t >= 1 && room_at(h, t) == Room::B;
    });
}

}  // namespace

FeatureMap vacuum_feature_map(const Encoding& enc) {
    FeatureMap phi;
    if (enc.mode == EncodingMode::compact) {
        phi.add(vacuum_age_bit(Room::A, 0));
        phi.add(vacuum_age_bit(Room::A, 1));
        phi.add(vacuum_in_room_b());
        phi.add(vacuum_age_bit(Room::B, 0));
        phi.add(vacuum_age_bit(Room::B, 1));
    } else {
        for (int v = 0; v <= kMaxAge; ++v) phi.add(vacuum_age_is(Room::A, v));
        phi.add(vacuum_in_room_b());
        for (int v = 0; v <= kMaxAge; ++v) phi.add(vacuum_age_is(Room::B, v));
    }
    if (enc.action_indicators) {
        for (ActionId a = 0; a < kVacuumActions; ++a) phi.add(last_action_is(a));
    }
    return phi;
}

DbnStructure vacuum_true_structure(const Encoding& enc) {
    std::vector<std::vector<std::size_t>> parents;
    if (enc.mode == EncodingMode::compact) {
        parents = {{0, 1, 2}, {0, 1, 2}, {2}, {2, 3, 4}, {2, 3, 4}};
    } else {
        parents = {{4}, {0, 4}, {1, 4}, {2, 3, 4}, {4}, {4}, {4, 5}, {4, 6}, {4, 7, 8}};
    }
    if (enc.action_indicators) {
        for (std::size_t a = 0; a < kVacuumActions; ++a) parents.emplace_back();
    }
    return DbnStructure(std::move(parents));
}

FeatureMap vacuum_reward_feature_map() {
    FeatureMap phi;
    phi.add(vacuum_age_below(Room::A, kMaxAge));
    phi.add(vacuum_age_below(Room::B, kMaxAge));
    phi.add(last_action_is_not(kNothing));
    return phi;
}

std::optional<Feature> make_feature(const FeatureId& id) {
    if (auto f = make_generic_feature(id)) return f;
    const auto& p = id.params;
    if (id.name == "vacuum_age_bit" && p.size() == 2 && (p[1] == 0 || p[1] == 1)) {
        return vacuum_age_bit(parse_room(p[0]), p[1]);
    }
    if (id.name == "vacuum_age_is" && p.size() == 2 && p[1] >= 0 && p[1] <= kMaxAge) {
        return vacuum_age_is(parse_room(p[0]), p[1]);
    }
    if (id.name == "vacuum_age_lt" && p.size() == 2) return vacuum_age_below(parse_room(p[0]), p[1]);
    if (id.name == "vacuum_room" && p.empty()) return vacuum_in_room_b();
    return std::nullopt;
}

FeatureMap make_feature_map(const std::vector<FeatureId>& ids) {
    FeatureMap phi;
    for (const auto& id : ids) {
        auto f = make_feature(id);
        if (!f) throw Error("unknown feature " + id.to_string());
        phi.add(std::move(*f));
    }
    return phi;
}

// ------------------------------------------------------------ VacuumEnv

VacuumEnv::VacuumEnv(std::uint64_t seed, double suck_failure, double move_failure)
    : rng_(seed), suck_failure_(suck_failure), move_failure_(move_failure) {
    if (suck_failure < 0.0 || suck_failure > 1.0 || move_failure < 0.0 || move_failure > 1.0) {
        throw Error("VacuumEnv: failure probabilities must lie in [0,1]");
    }
}

Observation VacuumEnv::reset() {
    state_ = kVacuumStart;
    last_action_.reset();
    return vacuum_observation(state_);
}

EnvResponse VacuumEnv::step(ActionId a) {
    const auto s = (suck_failure_ > 0.0 || move_failure_ > 0.0)
                       ? vacuum_stochastic_step(state_, a, suck_failure_, move_failure_, rng_)
                       : vacuum_step(state_, a);
    state_ = s.next;
    last_action_ = a;
    return {vacuum_observation(state_), s.reward};
}

std::string VacuumEnv::name() const {
    return (suck_failure_ > 0.0 || move_failure_ > 0.0) ? "vacuum-noisy" : "vacuum";
}

// --------------------------------------------------------- BitstreamEnv

BitstreamEnv::BitstreamEnv(std::size_t order, std::vector<std::uint8_t> rule, bool action_dependent, double noise,
                           std::size_t num_actions, std::uint64_t seed)
    : order_(order),
      rule_(std::move(rule)),
      action_dependent_(action_dependent),
      noise_(noise),
      num_actions_(num_actions),
      rng_(seed) {
    if (order_ > 20) throw Error("BitstreamEnv: order must be <= 20");
    if (num_actions_ == 0) throw Error("BitstreamEnv: need at least one action");
    if (noise_ < 0.0 || noise_ > 1.0) throw Error("BitstreamEnv: noise must lie in [0,1]");
    const std::size_t entries = (std::size_t{1} << order_) * (action_dependent_ ? num_actions_ : 1);
    if (rule_.size() != entries) {
        throw Error("BitstreamEnv: rule table has " + std::to_string(rule_.size()) + " entries, expected " +
                    std::to_string(entries));
    }
}

BitstreamEnv BitstreamEnv::from_hex(std::size_t order, const std::string& hex, bool action_dependent, double noise,
                                    std::size_t num_actions, std::uint64_t seed) {
    if (order > 20) throw Error("BitstreamEnv: order must be <= 20");
    const std::size_t entries = (std::size_t{1} << order) * (action_dependent ? num_actions : 1);
    std::string digits = hex;
    if (digits.rfind("0x", 0) == 0 || digits.rfind("0X", 0) == 0) digits = digits.substr(2);
    if (digits.empty()) throw Error("BitstreamEnv: empty rule");
    std::vector<std::uint8_t> bits;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (!std::isxdigit(static_cast<unsigned char>(*it))) throw Error("BitstreamEnv: bad hex digit in rule");
        const int v = std::isdigit(static_cast<unsigned char>(*it)) ? *it - '0'
                                                                     : std::tolower(static_cast<unsigned char>(*it)) - 'a' + 10;
        for (int b = 0; b < 4; ++b) bits.push_back(static_cast<std::uint8_t>((v >> b) & 1));
    }
    if (bits.size() < entries) {
        throw Error("BitstreamEnv: rule '" + hex + "' covers " + std::to_string(bits.size()) + " of " +
                    std::to_string(entries) + " table entries");
    }
    if (std::any_of(bits.begin() + static_cast<std::ptrdiff_t>(entries), bits.end(), [](auto b) { return b != 0; })) {
        throw Error("BitstreamEnv: rule '" + hex + "' has bits beyond the table");
    }
    bits.resize(entries);
    return BitstreamEnv(order, std::move(bits), action_dependent, noise, num_actions, seed);
}

bool BitstreamEnv::rule_output(std::uint64_t context, ActionId a) const {
    const std::uint64_t mask = (std::uint64_t{1} << order_) - 1;
    std::size_t idx = static_cast<std::size_t>(context & mask);
    if (action_dependent_) idx += static_cast<std::size_t>(a) << order_;
    return rule_.at(idx) != 0;
}

Observation BitstreamEnv::emit(ActionId a) {
    bool out = rule_output(context_, a);
    if (noise_ > 0.0 && bernoulli(rng_, noise_)) out = !out;
    const std::uint64_t mask = (std::uint64_t{1} << order_) - 1;
    context_ = ((context_ << 1) | (out ? 1U : 0U)) & mask;
    return out ? 1 : 0;
}

Observation BitstreamEnv::reset() {
    context_ = 0;
    for (std::size_t j = 0; j < order_; ++j) context_ |= static_cast<std::uint64_t>(rng_() & 1U) << j;
    return emit(0);
}

EnvResponse BitstreamEnv::step(ActionId a) {
    if (a >= num_actions_) throw Error("BitstreamEnv: action out of range");
    const Observation o = emit(a);
    return {o, static_cast<double>(o)};
}

std::vector<std::uint8_t> parity_rule(std::size_t order) {
    std::vector<std::uint8_t> rule(std::size_t{1} << order);
    for (std::size_t c = 0; c < rule.size(); ++c) rule[c] = static_cast<std::uint8_t>(std::popcount(c) & 1);
    return rule;
}

History random_policy_history(Environment& env, std::size_t steps, std::uint64_t policy_seed) {
    Rng policy(policy_seed);
    History h;
    h.observe(env.reset());
    for (std::size_t t = 0; t < steps; ++t) {
        const auto a = static_cast<ActionId>(uniform_index(policy, env.num_actions()));
        const auto r = env.step(a);
        h.record(a, r.reward, r.observation);
    }
    return h;
}

}  // namespace phidbn::envs
