#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phidbn/oracle.hpp"
#include "phidbn/planner.hpp"

using namespace phidbn;

namespace {

// P(x'^i = 1 | x, a) = alpha_ia + beta_i x^i and a linear reward, so Q* is
// linear in (1, x) and the greedy action does not depend on x.
struct LinearWorld {
    FactoredModel model;
    RewardModel reward;
};

LinearWorld linear_world() {
    const double alpha[3][2] = {{0.1, 0.6}, {0.3, 0.2}, {0.5, 0.1}};
    const double beta[3] = {0.3, 0.5, 0.2};
    std::vector<std::map<RowKey, double>> tables(3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (ActionId a = 0; a < 2; ++a) {
            tables[i][RowKey{a, 0}] = alpha[i][a];
            tables[i][RowKey{a, 1}] = alpha[i][a] + beta[i];
        }
    }
    LinearWorld w{FactoredModel(DbnStructure({{0}, {1}, {2}}), 2, tables), {}};
    w.reward.w = Eigen::Vector4d(0.2, 1.0, -0.5, 0.8);
    return w;
}

double value_error(const LinearQ& q, const oracle::ValueIterationResult& vi, std::size_t m) {
    double err = 0.0;
    for (std::size_t s = 0; s < (std::size_t{1} << m); ++s) {
        err = std::max(err, std::abs(q.max_value(FeatureVector::unpack(s, m)) - vi.V[s]));
    }
    return err;
}

double sup_norm_error(const LinearQ& q, const oracle::ValueIterationResult& vi, std::size_t m, std::size_t actions) {
    double err = 0.0;
    for (std::size_t s = 0; s < (std::size_t{1} << m); ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
            err = std::max(err, std::abs(q.value(FeatureVector::unpack(s, m), static_cast<ActionId>(a)) -
                                         vi.Q[s * actions + a]));
        }
    }
    return err;
}

}  // namespace

TEST_CASE("step-size schedule") {
    const StepSchedule s;
    CHECK(s.at(0) == 0.1);
    CHECK(s.at(10000) == doctest::Approx(0.05));
    CHECK(s.at(90000) == doctest::Approx(0.01));
}

TEST_CASE("LinearQ basics") {
    CHECK_THROWS_AS(LinearQ(0, 3), Error);
    CHECK_THROWS_AS(LinearQ(2, 3, 1.0), Error);
    CHECK_THROWS_AS(LinearQ(2, 3, 0.9, {}, 1.5), Error);
    LinearQ q(3, 2, 0.9);
    q.weights(1) = {0.5, 1.0, -1.0};
    CHECK(q.value(FeatureVector{1, 1}, 1) == 0.5);
    CHECK(q.value(FeatureVector{1, 0}, 1) == 1.5);
    CHECK_THROWS_AS(q.value(FeatureVector{1}, 0), Error);
    optimistic_init(q, 2.0);
    CHECK(q.weights(0)[0] == doctest::Approx(20.0));
    CHECK(q.weights(1)[0] == doctest::Approx(20.0));
    CHECK(q.to_json().dump().rfind(R"({"0":[)", 0) == 0);
}

TEST_CASE("greedy ties go to the lowest action") {
    LinearQ q(3, 1, 0.9);
    CHECK(greedy_action(q, FeatureVector{0}) == 0);
    q.weights(1)[1] = 1.0;
    q.weights(2)[1] = 1.0;
    CHECK(greedy_action(q, FeatureVector{1}) == 1);
    CHECK(greedy_action(q, FeatureVector{0}) == 0);
    CHECK(q.max_value(FeatureVector{1}) == 1.0);
}

TEST_CASE("epsilon-greedy action frequencies") {
    LinearQ q(4, 1, 0.9);
    q.weights(2)[0] = 1.0;
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) CHECK(act(Policy{&q, 0.0}, FeatureVector{0}, rng) == 2);
    std::vector<int> hist(4, 0);
    const int n = 40000;
    for (int k = 0; k < n; ++k) ++hist[act(Policy{&q, 1.0}, FeatureVector{0}, rng)];
    for (int c : hist) CHECK(std::abs(c - n / 4.0) < 3 * std::sqrt(n * 0.25 * 0.75));
    std::fill(hist.begin(), hist.end(), 0);
    for (int k = 0; k < n; ++k) ++hist[act(Policy{&q, 0.4}, FeatureVector{0}, rng)];
    const double p2 = 0.6 + 0.1;
    CHECK(std::abs(hist[2] - n * p2) < 3 * std::sqrt(n * p2 * (1 - p2)));
    CHECK_THROWS_AS(act(Policy{&q, 1.5}, FeatureVector{0}, rng), Error);
    CHECK_THROWS_AS(act(Policy{nullptr, 0.1}, FeatureVector{0}, rng), Error);
}

TEST_CASE("linear world: Q-learning reaches the value-iteration Q*") {
    const auto world = linear_world();
    const auto flat = oracle::flat_from_factored(world.model, world.reward, 2);
    flat.check();
    const auto vi = oracle::value_iteration(flat, 0.9);
    for (double lambda : {0.0, 0.8}) {
        Rng rng(2);
        // Robbins-Monro schedule small enough for the 1e6-update budget
        const StepSchedule schedule{0.02, 1e4};
        TdOptions opts;
        opts.episodes = 5000;
        opts.steps = 200;
        opts.epsilon = 0.3;
        const auto q = td_train(LinearQ(2, 3, 0.9, schedule, lambda), world.model, world.reward, opts, rng);
        CHECK(q.updates() == 1000000);
        INFO("lambda = " << lambda);
        CHECK(value_error(q, vi, 3) <= 0.05);
        CHECK(sup_norm_error(q, vi, 3, 2) <= 0.1);
    }
}

TEST_CASE("warm start needs no more updates than a cold start") {
    const auto world = linear_world();
    const auto vi = oracle::value_iteration(oracle::flat_from_factored(world.model, world.reward, 2), 0.9);
    TdOptions opts;
    opts.episodes = 1;
    opts.steps = 1000;
    opts.epsilon = 0.3;
    auto updates_to_target = [&](LinearQ q) {
        Rng rng(3);
        for (int round = 0; round < 2000; ++round) {
            if (sup_norm_error(q, vi, 3, 2) <= 0.05) return q.updates();
            q = td_train(q, world.model, world.reward, opts, rng);
        }
        return std::uint64_t{0};
    };
    Rng rng(4);
    TdOptions longer = opts;
    longer.episodes = 100;
    const auto trained = td_train(LinearQ(2, 3, 0.9), world.model, world.reward, longer, rng);
    LinearQ warm = trained;
    warm.set_updates(0);
    const auto cold_n = updates_to_target(LinearQ(2, 3, 0.9));
    const auto warm_n = updates_to_target(warm);
    REQUIRE(cold_n > 0);
    CHECK(warm_n <= cold_n);
}

TEST_CASE("divergence guard throws") {
    const auto world = linear_world();
    Rng rng(5);
    TdOptions opts;
    opts.episodes = 50;
    opts.steps = 200;
    opts.weight_limit = 1e6;
    LinearQ q(2, 3, 0.999, StepSchedule{50.0, 1e4});
    CHECK_THROWS_AS(td_train(q, world.model, world.reward, opts, rng), Error);
}

TEST_CASE("td_train validates inputs") {
    const auto world = linear_world();
    Rng rng(6);
    TdOptions opts;
    CHECK_THROWS_AS(td_train(LinearQ(2, 2, 0.9), world.model, world.reward, opts, rng), Error);
    opts.start = FeatureVector{1, 0};
    CHECK_THROWS_AS(td_train(LinearQ(2, 3, 0.9), world.model, world.reward, opts, rng), Error);
}
