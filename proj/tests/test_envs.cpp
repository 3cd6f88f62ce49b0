#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phidbn/envs.hpp"
#include "phidbn/phi_search.hpp"

using namespace phidbn;
using namespace phidbn::envs;

TEST_CASE("vacuum step examples") {
    auto s = vacuum_step(VacuumState{3, Room::A, 3}, kSuck);
    CHECK(s.next == VacuumState{0, Room::A, 3});
    CHECK(s.reward == 0.0);
    s = vacuum_step(VacuumState{1, Room::B, 3}, kNothing);
    CHECK(s.next == VacuumState{2, Room::B, 3});
    CHECK(s.reward == 1.0);
    s = vacuum_step(VacuumState{2, Room::B, 0}, kMove);
    CHECK(s.next == VacuumState{3, Room::A, 1});
    CHECK(s.reward == 0.0);
    s = vacuum_step(VacuumState{0, Room::B, 2}, kSuck);
    CHECK(s.next == VacuumState{1, Room::B, 0});
    CHECK(s.reward == 1.0);
}

TEST_CASE("vacuum dynamics against the rules on all states") {
    for (std::size_t k = 0; k < kVacuumStates; ++k) {
        const auto s = vacuum_state_from_index(k);
        CHECK(vacuum_index(s) == k);
        for (ActionId a = 0; a < 3; ++a) {
            const auto step = vacuum_step(s, a);
            const int age_a = (s.room == Room::A && a == kSuck) ? 0 : std::min(s.age_a + 1, 3);
            const int age_b = (s.room == Room::B && a == kSuck) ? 0 : std::min(s.age_b + 1, 3);
            const Room room = a == kMove ? (s.room == Room::A ? Room::B : Room::A) : s.room;
            CHECK(step.next == VacuumState{age_a, room, age_b});
            CHECK(step.reward == (age_a < 3) + (age_b < 3) - (a != kNothing ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("stochastic step") {
    Rng rng(1);
    for (std::size_t k = 0; k < kVacuumStates; ++k) {
        const auto s = vacuum_state_from_index(k);
        for (ActionId a = 0; a < 3; ++a) {
            const auto det = vacuum_step(s, a);
            const auto st = vacuum_stochastic_step(s, a, 0.0, 0.0, rng);
            CHECK(st.next == det.next);
            CHECK(st.reward == det.reward);
            const auto fail = vacuum_stochastic_step(s, a, 1.0, 1.0, rng);
            CHECK(fail.next == vacuum_step(s, kNothing).next);
            CHECK(fail.reward == vacuum_reward(fail.next, a));
        }
    }
    const VacuumState s{3, Room::A, 3};
    int failures = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) failures += vacuum_stochastic_step(s, kSuck, 0.2, 0.0, rng).next.age_a != 0;
    CHECK(std::abs(failures / double(n) - 0.2) <= 0.01);
    failures = 0;
    for (int k = 0; k < n; ++k) failures += vacuum_stochastic_step(s, kMove, 0.0, 0.2, rng).next.room == Room::A;
    CHECK(std::abs(failures / double(n) - 0.2) <= 0.01);
    CHECK_THROWS_AS(vacuum_stochastic_step(s, kSuck, 1.5, 0.0, rng), Error);
}

TEST_CASE("observations: room and dirt of the current room") {
    CHECK(vacuum_observation(VacuumState{3, Room::A, 0}) == 2);
    CHECK(vacuum_observation(VacuumState{2, Room::A, 3}) == 0);
    CHECK(vacuum_observation(VacuumState{3, Room::B, 3}) == 3);
    CHECK(vacuum_observation(VacuumState{3, Room::B, 1}) == 1);

    VacuumEnv env(2);
    CHECK(env.reset() == vacuum_observation(kVacuumStart));
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const auto r = env.step(static_cast<ActionId>(uniform_index(rng, 3)));
        const auto& s = env.state();
        CHECK(r.observation == vacuum_observation(s));
        const int age = s.room == Room::A ? s.age_a : s.age_b;
        CHECK(((r.observation & 2) != 0) == (age == 3));
    }
    CHECK_THROWS_AS(env.step(3), Error);
}

TEST_CASE("encoding layouts") {
    const Encoding onehot{EncodingMode::onehot, true};
    CHECK(encode(VacuumState{0, Room::A, 3}, kSuck, onehot).to_string() == "1000" "0" "0001" "010");
    const Encoding compact{EncodingMode::compact, false};
    CHECK(encode(VacuumState{3, Room::B, 1}, std::nullopt, compact).to_string() == "11" "1" "10");
    CHECK(encode(kVacuumStart, std::nullopt, Encoding{EncodingMode::compact, true}).to_string() == "11" "0" "11" "000");
    CHECK(onehot.width() == 12);
    CHECK(compact.width() == 5);
    CHECK(parse_encoding("onehot") == EncodingMode::onehot);
    CHECK_THROWS_AS(parse_encoding("gray"), Error);
}

TEST_CASE("encoding is a bijection") {
    for (auto mode : {EncodingMode::compact, EncodingMode::onehot}) {
        const Encoding enc{mode, false};
        std::vector<std::uint64_t> codes;
        for (std::size_t k = 0; k < kVacuumStates; ++k) {
            const auto s = vacuum_state_from_index(k);
            const auto x = encode(s, std::nullopt, enc);
            CHECK(decode(x, enc) == s);
            codes.push_back(x.packed());
            if (mode == EncodingMode::onehot) {
                int ones_a = 0, ones_b = 0;
                for (int j = 0; j < 4; ++j) {
                    ones_a += x[j];
                    ones_b += x[5 + j];
                }
                CHECK(ones_a == 1);
                CHECK(ones_b == 1);
            }
        }
        std::sort(codes.begin(), codes.end());
        CHECK(std::adjacent_find(codes.begin(), codes.end()) == codes.end());
    }
}

TEST_CASE("deterministic episodes replay bit-identically") {
    VacuumEnv a(5), b(6);
    const auto ha = random_policy_history(a, 300, 9);
    const auto hb = random_policy_history(b, 300, 9);
    CHECK(ha == hb);
    VacuumEnv n1(5, 0.2, 0.2), n2(5, 0.2, 0.2);
    CHECK(random_policy_history(n1, 300, 9) == random_policy_history(n2, 300, 9));
    CHECK(n1.name() == "vacuum-noisy");
}

TEST_CASE("bitstream rule tables") {
    CHECK(parity_rule(3) == std::vector<std::uint8_t>{0, 1, 1, 0, 1, 0, 0, 1});
    CHECK_THROWS_AS(BitstreamEnv::from_hex(3, "1FF", false, 0.0, 2, 0), Error);
    CHECK_THROWS_AS(BitstreamEnv::from_hex(3, "9", false, 0.0, 2, 0), Error);
    CHECK_THROWS_AS(BitstreamEnv::from_hex(3, "zz", false, 0.0, 2, 0), Error);
    CHECK_THROWS_AS(BitstreamEnv(2, {0, 1}, false, 0.0, 2, 0), Error);
    CHECK_NOTHROW(BitstreamEnv::from_hex(2, "0x96", true, 0.0, 2, 0));
}

TEST_CASE("constant rule gives a constant stream") {
    auto env = BitstreamEnv::from_hex(0, "1", false, 0.0, 2, 1);
    const auto h = random_policy_history(env, 100, 2);
    for (std::size_t t = 1; t <= h.length(); ++t) {
        CHECK(h.observation(t) == 1);
        if (t < h.length()) CHECK(h.reward_at(t) == 1.0);
    }
}

TEST_CASE("parity stream replays as XOR of the last three bits") {
    auto env = BitstreamEnv::from_hex(3, "96", false, 0.0, 2, 3);
    const auto h = random_policy_history(env, 500, 4);
    for (std::size_t t = 4; t <= h.length(); ++t) {
        CHECK(h.observation(t) == (h.observation(t - 1) ^ h.observation(t - 2) ^ h.observation(t - 3)));
    }
    for (std::size_t t = 1; t < h.length(); ++t) CHECK(h.reward_at(t) == h.observation(t + 1));
}

TEST_CASE("action-dependent rule uses the last action") {
    // order 1: copy the last bit under action 0, invert under action 1
    auto env = BitstreamEnv::from_hex(1, "6", true, 0.0, 2, 5);
    const auto h = random_policy_history(env, 300, 6);
    for (std::size_t t = 2; t <= h.length(); ++t) {
        CHECK(h.observation(t) == (h.observation(t - 1) ^ (h.action(t - 1) == 1 ? 1U : 0U)));
    }
}

TEST_CASE("noise 0.5 gives a flat cost table") {
    auto env = BitstreamEnv::from_hex(3, "96", false, 0.5, 2, 7);
    const auto h = random_policy_history(env, 4000, 8);
    // the reward is the current bit, so m >= 1 fits it exactly; past that the
    // older bits carry no information and only add model cost
    const auto table = cost_table_over_m(h, WindowPhi{0, 1, 0}, 1, 5, StructureOptions{});
    const double base = table.front().second.total;
    const double n = static_cast<double>(h.length());
    for (const auto& [m, c] : table) {
        CHECK(c.total >= base - 3.0 * std::log2(n));
        CHECK(c.total <= base + 3.0 * static_cast<double>(m) * std::log2(n));
        CHECK(c.state_bits >= n - 1 - 3.0 * std::sqrt(n));
    }
    int ones = 0;
    for (std::size_t t = 1; t <= h.length(); ++t) ones += h.observation(t);
    CHECK(std::abs(ones - n / 2) <= 3 * std::sqrt(n / 4));
}

TEST_CASE("feature factory covers vacuum features") {
    for (const auto& enc : {Encoding{EncodingMode::compact, true}, Encoding{EncodingMode::onehot, true}}) {
        const auto phi = vacuum_feature_map(enc);
        const auto rebuilt = make_feature_map(phi.ids());
        CHECK(rebuilt.ids() == phi.ids());
        CHECK(vacuum_true_structure(enc).num_features() == enc.width());
    }
    CHECK_THROWS_AS(make_feature_map({FeatureId{"unknown", {}}}), Error);
}
