#include <doctest.h>

#include <cmath>
#include <sstream>

#include "phidbn/coding.hpp"
#include "phidbn/envs.hpp"
#include "phidbn/oracle.hpp"
#include "phidbn/rng.hpp"

using namespace phidbn;

namespace {

struct SampleData {
    std::vector<FeatureVector> xs;
    std::vector<ActionId> as;
};

SampleData sample_data(Rng& rng, std::size_t m, std::size_t n, std::size_t actions) {
    SampleData d;
    for (std::size_t t = 0; t < n; ++t) {
        FeatureVector x(m);
        for (std::size_t i = 0; i < m; ++i) x.set(i, bernoulli(rng, 0.3 + 0.1 * static_cast<double>(i % 4)));
        d.xs.push_back(x);
        d.as.push_back(static_cast<ActionId>(uniform_index(rng, actions)));
    }
    return d;
}

DbnStructure random_structure(Rng& rng, std::size_t m, std::size_t max_parents) {
    DbnStructure g(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> pa;
        for (std::size_t j = 0; j < m; ++j) {
            if (pa.size() < max_parents && bernoulli(rng, 0.4)) pa.push_back(j);
        }
        g.set_parents(i, pa);
    }
    return g;
}

}  // namespace

TEST_CASE("cl_multinomial examples") {
    const std::vector<std::uint64_t> empty;
    CHECK(cl_multinomial(empty) == 0.0);
    CHECK(cl_multinomial(std::vector<std::uint64_t>{0, 0}) == 0.0);
    CHECK(cl_multinomial(std::vector<std::uint64_t>{4}) == 0.0);
    CHECK(cl_multinomial(std::vector<std::uint64_t>{0, 7, 0}) == 0.0);
    CHECK(cl_multinomial(std::vector<std::uint64_t>{2, 2}) == 5.0);
}

TEST_CASE("cl_multinomial matches the oracle and is permutation invariant") {
    Rng rng(1);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t k = 1 + uniform_index(rng, 8);
        std::vector<std::uint64_t> c(k);
        for (auto& v : c) v = bernoulli(rng, 0.2) ? 0 : uniform_index(rng, 200);
        const double bits = cl_multinomial(c);
        CHECK(bits == doctest::Approx(oracle::multinomial_code(c)).epsilon(1e-12));
        std::reverse(c.begin(), c.end());
        CHECK(std::abs(cl_multinomial(c) - bits) < 1e-9);
        CHECK(bits >= 0.0);
    }
}

TEST_CASE("accumulate_counts basics") {
    const DbnStructure g(2);
    std::vector<FeatureVector> one{FeatureVector{1, 0}};
    std::vector<ActionId> as{0};
    CHECK(accumulate_counts(one, as, g).num_rows() == 0);

    std::vector<FeatureVector> constant(10, FeatureVector{1, 0});
    std::vector<ActionId> zeros(10, 0);
    const auto c = accumulate_counts(constant, zeros, g);
    CHECK(c.rows(0).size() == 1);
    CHECK(c.rows(0).begin()->second == OutcomeCounts{0, 9});
    CHECK(c.rows(1).begin()->second == OutcomeCounts{9, 0});
    CHECK(c.total(0) == 9);
    CHECK(cl_state_sequence(c) == 0.0);

    CHECK_THROWS_AS(accumulate_counts(constant, zeros, DbnStructure(3)), Error);
    CHECK_THROWS_AS(accumulate_counts(constant, zeros, DbnStructure({{0}, {5}})), Error);
}

TEST_CASE("every feature totals n-1 transitions") {
    Rng rng(2);
    const auto d = sample_data(rng, 5, 300, 3);
    const auto g = random_structure(rng, 5, 3);
    const auto c = accumulate_counts(d.xs, d.as, g);
    for (std::size_t i = 0; i < 5; ++i) CHECK(c.total(i) == 299);
}

TEST_CASE("parallel and serial accumulation agree exactly") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const auto d = sample_data(rng, 8, 500, 4);
        const auto g = random_structure(rng, 8, 3);
        const auto packed = pack_trajectory(d.xs, d.as);
        const auto par = accumulate_counts(packed, g);
        const auto ser = accumulate_counts_serial(packed, g);
        CHECK(par == ser);
        CHECK(cl_state_sequence(par) == cl_state_sequence(ser));
    }
}

TEST_CASE("one parentless feature: n H + 1/2 log n") {
    std::vector<FeatureVector> xs;
    std::vector<ActionId> as;
    const int pattern[] = {1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0};
    for (int b : pattern) {
        xs.push_back(FeatureVector{b});
        as.push_back(0);
    }
    const auto c = accumulate_counts(xs, as, DbnStructure(1));
    // transitions see x_2..x_11: three ones, seven zeros
    const double n = 10.0;
    const double h = -(0.3 * std::log2(0.3) + 0.7 * std::log2(0.7));
    CHECK(cl_state_sequence(c) == doctest::Approx(n * h + 0.5 * std::log2(n)).epsilon(1e-12));
    CHECK(neg_log_likelihood(c) == doctest::Approx(n * h).epsilon(1e-12));
}

TEST_CASE("fair coin counts (50,50) have 100 bits of likelihood") {
    TransitionCounts c(DbnStructure(1));
    for (int k = 0; k < 50; ++k) {
        c.add(0, RowKey{0, 0}, true);
        c.add(0, RowKey{0, 0}, false);
    }
    CHECK(neg_log_likelihood(c) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("code minus likelihood is the penalty sum; ordering holds") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const auto d = sample_data(rng, 4, 200, 2);
        const auto g = random_structure(rng, 4, 2);
        const auto c = accumulate_counts(d.xs, d.as, g);
        double penalty = 0.0;
        bool all_single = true;
        for (std::size_t i = 0; i < 4; ++i) {
            for (const auto& [key, oc] : c.rows(i)) {
                const int used = (oc.zeros > 0) + (oc.ones > 0);
                penalty += 0.5 * (used - 1) * std::log2(static_cast<double>(oc.total()));
                all_single = all_single && used == 1;
            }
        }
        const double cl = cl_state_sequence(c);
        const double nll = neg_log_likelihood(c);
        CHECK(cl - nll == doctest::Approx(penalty).epsilon(1e-9));
        CHECK(nll >= 0.0);
        CHECK(cl >= nll);
        CHECK((cl == nll) == all_single);
    }
}

TEST_CASE("brute force: per-step recount matches for small m and n") {
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + uniform_index(rng, 3);
        const std::size_t n = 1 + uniform_index(rng, 8);
        const auto d = sample_data(rng, m, n, 2);
        const auto g = random_structure(rng, m, m);
        const double fast = cl_state_sequence(accumulate_counts(d.xs, d.as, g));
        CHECK(std::abs(fast - oracle::direct_state_code(d.xs, d.as, g)) < 1e-9);
    }
}

TEST_CASE("additivity over a split trajectory") {
    Rng rng(6);
    const auto d = sample_data(rng, 4, 101, 3);
    const auto g = random_structure(rng, 4, 2);
    const auto whole = accumulate_counts(d.xs, d.as, g);
    // parts share x_51 so the boundary transition is counted once
    const std::span<const FeatureVector> xs(d.xs);
    const std::span<const ActionId> as(d.as);
    const auto a = accumulate_counts(xs.subspan(0, 51), as.subspan(0, 51), g);
    const auto b = accumulate_counts(xs.subspan(50), as.subspan(50), g);
    for (std::size_t i = 0; i < 4; ++i) {
        FeatureRows sum = a.rows(i);
        for (const auto& [key, oc] : b.rows(i)) {
            sum[key].zeros += oc.zeros;
            sum[key].ones += oc.ones;
        }
        CHECK(sum == whole.rows(i));
    }
}

TEST_CASE("vacuum replay under the true structure has single-outcome rows") {
    const envs::Encoding enc{envs::EncodingMode::compact, false};
    envs::VacuumEnv env(0);
    const History h = envs::random_policy_history(env, 1000, 9);
    const auto xs = feature_trajectory(envs::vacuum_feature_map(enc), h);
    const auto c = accumulate_counts(xs, h.actions(), envs::vacuum_true_structure(enc));
    for (std::size_t i = 0; i < c.num_features(); ++i) {
        for (const auto& [key, oc] : c.rows(i)) CHECK((oc.zeros == 0 || oc.ones == 0));
    }
    CHECK(cl_state_sequence(c) == 0.0);
}

TEST_CASE("counts CSV dump") {
    TransitionCounts c(DbnStructure({{}, {0, 1}}));
    c.add(0, RowKey{1, 0}, true);
    c.add(1, RowKey{0, 0b10}, false);
    c.add(1, RowKey{0, 0b10}, false);
    std::ostringstream os;
    c.write_csv(os);
    CHECK(os.str() == "i,a,u_bits,x,count\n0,1,,1,1\n1,0,01,0,2\n");
}
