#include "phidbn/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "phidbn/envs.hpp"

namespace phidbn::oracle {

void FlatMdp::check(double tol) const {
    if (P.size() != num_states * num_actions * num_states || R.size() != num_states * num_actions) {
        throw Error("FlatMdp: tensor sizes do not match");
    }
    for (std::size_t s = 0; s < num_states; ++s) {
        for (std::size_t a = 0; a < num_actions; ++a) {
            double sum = 0.0;
            for (std::size_t t = 0; t < num_states; ++t) sum += p(s, a, t);
            if (std::abs(sum - 1.0) > tol) throw Error("FlatMdp: row does not sum to 1");
        }
    }
}

FlatMdp flat_from_factored(const FactoredModel& model, const RewardModel& reward, std::size_t num_actions) {
    const std::size_t m = model.num_features();
    if (m >= 63 || (std::size_t{1} << m) > kMaxFlatStates) throw Error("flat_from_factored: too many states");
    FlatMdp mdp;
    mdp.num_states = std::size_t{1} << m;
    mdp.num_actions = num_actions;
    mdp.P.assign(mdp.num_states * num_actions * mdp.num_states, 0.0);
    mdp.R.assign(mdp.num_states * num_actions, 0.0);
    std::vector<double> successor_reward(mdp.num_states);
    for (std::size_t t = 0; t < mdp.num_states; ++t) successor_reward[t] = reward.predict(FeatureVector::unpack(t, m));
    for (std::size_t s = 0; s < mdp.num_states; ++s) {
        const FeatureVector x = FeatureVector::unpack(s, m);
        for (std::size_t a = 0; a < num_actions; ++a) {
            double expected = 0.0;
            for (std::size_t t = 0; t < mdp.num_states; ++t) {
                const double q =
                    transition_probability(model, x, static_cast<ActionId>(a), FeatureVector::unpack(t, m));
                mdp.P[(s * num_actions + a) * mdp.num_states + t] = q;
                expected += q * successor_reward[t];
            }
            mdp.R[s * num_actions + a] = expected;
        }
    }
    return mdp;
}

FlatMdp flat_vacuum(double suck_failure, double move_failure) {
    using namespace envs;
    FlatMdp mdp;
    mdp.num_states = kVacuumStates;
    mdp.num_actions = kVacuumActions;
    mdp.P.assign(mdp.num_states * mdp.num_actions * mdp.num_states, 0.0);
    mdp.R.assign(mdp.num_states * mdp.num_actions, 0.0);
    for (std::size_t s = 0; s < kVacuumStates; ++s) {
        const VacuumState state = vacuum_state_from_index(s);
        for (ActionId a = 0; a < kVacuumActions; ++a) {
            const double fail = a == kSuck ? suck_failure : a == kMove ? move_failure : 0.0;
            const auto ok = vacuum_step(state, a);
            const auto idle = vacuum_step(state, kNothing);
            const std::size_t row = (s * kVacuumActions + a) * kVacuumStates;
            mdp.P[row + vacuum_index(ok.next)] += 1.0 - fail;
            mdp.P[row + vacuum_index(idle.next)] += fail;
            mdp.R[s * kVacuumActions + a] = (1.0 - fail) * ok.reward + fail * vacuum_reward(idle.next, a);
        }
    }
    return mdp;
}

ValueIterationResult value_iteration(const FlatMdp& mdp, double gamma, double tol) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("value_iteration: gamma must lie in (0,1)");
    const std::size_t S = mdp.num_states;
    const std::size_t A = mdp.num_actions;
    ValueIterationResult out;
    out.V.assign(S, 0.0);
    out.Q.assign(S * A, 0.0);
    out.policy.assign(S, 0);
    std::vector<double> next(S);
    while (true) {
        double change = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double best = -INFINITY;
            for (std::size_t a = 0; a < A; ++a) {
                double q = mdp.r(s, a);
                for (std::size_t t = 0; t < S; ++t) {
                    const double p = mdp.p(s, a, t);
                    if (p != 0.0) q += gamma * p * out.V[t];
                }
                out.Q[s * A + a] = q;
                best = std::max(best, q);
            }
            next[s] = best;
            change = std::max(change, std::abs(best - out.V[s]));
        }
        out.V.swap(next);
        ++out.sweeps;
        if (change < tol || out.sweeps > 1000000) break;
    }
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < A; ++a) {
            if (out.Q[s * A + a] > out.Q[s * A + best]) best = a;
        }
        out.policy[s] = best;
    }
    return out;
}

namespace {

std::size_t deterministic_successor(const FlatMdp& mdp, std::size_t s, std::size_t a) {
    for (std::size_t t = 0; t < mdp.num_states; ++t) {
        const double p = mdp.p(s, a, t);
        if (p == 1.0) return t;
        if (p != 0.0) throw Error("oracle: MDP is not deterministic");
    }
    throw Error("oracle: empty transition row");
}

}  // namespace

PolicyCycle follow_cycle(const FlatMdp& mdp, std::span<const std::size_t> policy, std::size_t start) {
    std::vector<std::size_t> seen_at(mdp.num_states, SIZE_MAX);
    std::vector<std::size_t> path;
    std::size_t s = start;
    while (seen_at[s] == SIZE_MAX) {
        seen_at[s] = path.size();
        path.push_back(s);
        s = deterministic_successor(mdp, s, policy[s]);
    }
    PolicyCycle c;
    double total = 0.0;
    for (std::size_t k = seen_at[s]; k < path.size(); ++k) {
        c.states.push_back(path[k]);
        c.actions.push_back(policy[path[k]]);
        total += mdp.r(path[k], policy[path[k]]);
    }
    c.average_reward = total / static_cast<double>(c.states.size());
    return c;
}

double cycle_gain(const FlatMdp& mdp, std::span<const std::size_t> actions, std::size_t start) {
    if (actions.empty()) throw Error("cycle_gain: empty action cycle");
    // (state, phase) pairs are finite, so the walk becomes periodic.
    const std::size_t L = actions.size();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
    std::vector<double> rewards;
    std::size_t s = start;
    std::size_t phase = 0;
    while (!seen.contains({s, phase})) {
        seen[{s, phase}] = rewards.size();
        rewards.push_back(mdp.r(s, actions[phase]));
        s = deterministic_successor(mdp, s, actions[phase]);
        phase = (phase + 1) % L;
    }
    const std::size_t from = seen[{s, phase}];
    double total = 0.0;
    for (std::size_t k = from; k < rewards.size(); ++k) total += rewards[k];
    return total / static_cast<double>(rewards.size() - from);
}

double multinomial_code(std::span<const std::uint64_t> counts) {
    double n = 0.0;
    double sum = 0.0;
    int nonzero = 0;
    for (std::uint64_t c : counts) {
        if (c == 0) continue;
        const double d = static_cast<double>(c);
        n += d;
        sum += d * std::log2(d);
        ++nonzero;
    }
    if (n == 0.0) return 0.0;
    return n * std::log2(n) - sum + 0.5 * (nonzero - 1) * std::log2(n);
}

namespace {

double feature_code(std::span<const FeatureVector> xs, std::span<const ActionId> actions, std::size_t i,
                    const std::vector<std::size_t>& parents) {
    std::map<std::pair<ActionId, std::vector<int>>, std::array<std::uint64_t, 2>> table;
    for (std::size_t t = 0; t + 1 < xs.size(); ++t) {
        std::vector<int> u;
        for (std::size_t j : parents) u.push_back(xs[t][j] ? 1 : 0);
        ++table[{actions[t], u}][xs[t + 1][i] ? 1 : 0];
    }
    double bits = 0.0;
    for (const auto& [key, c] : table) bits += multinomial_code(c);
    return bits;
}

void check_trajectory(std::span<const FeatureVector> xs, std::span<const ActionId> actions, std::size_t m) {
    if (xs.size() > 1 && actions.size() + 1 < xs.size()) throw Error("oracle: too few actions");
    for (const auto& x : xs) {
        if (x.size() != m) throw Error("oracle: feature width mismatch");
    }
}

}  // namespace

DbnStructure exhaustive_structure(std::span<const FeatureVector> xs, std::span<const ActionId> actions) {
    if (xs.empty()) throw Error("exhaustive_structure: empty data");
    const std::size_t m = xs.front().size();
    if (m > 4) throw Error("exhaustive_structure: at most 4 features");
    check_trajectory(xs, actions, m);

    // Subsets ordered by size, then lexicographically by their sorted elements.
    std::vector<std::vector<std::size_t>> subsets;
    for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t j = 0; j < m; ++j) {
            if (mask & (1U << j)) s.push_back(j);
        }
        subsets.push_back(s);
    }
    std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });

    DbnStructure g(m);
    for (std::size_t i = 0; i < m; ++i) {
        double best = INFINITY;
        std::vector<std::size_t> best_set;
        for (const auto& s : subsets) {
            const double bits = feature_code(xs, actions, i, s);
            if (bits < best - 1e-9) {
                best = bits;
                best_set = s;
            }
        }
        g.set_parents(i, best_set);
    }
    return g;
}

double direct_state_code(std::span<const FeatureVector> xs, std::span<const ActionId> actions, const DbnStructure& g) {
    check_trajectory(xs, actions, g.num_features());
    double bits = 0.0;
    for (std::size_t i = 0; i < g.num_features(); ++i) bits += feature_code(xs, actions, i, g.parents(i));
    return bits;
}

double direct_reward_code(std::span<const FeatureVector> xs, std::span<const double> rewards) {
    if (xs.size() < 2) return 0.0;
    const std::size_t n = std::min(rewards.size(), xs.size() - 1);
    if (n == 0) return 0.0;
    const std::size_t m = xs.front().size();
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m + 1));
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        X(row, 0) = 1.0;
        for (std::size_t j = 0; j < m; ++j) X(row, static_cast<Eigen::Index>(j + 1)) = xs[t + 1][j] ? 1.0 : 0.0;
        r(row) = rewards[t];
    }
    const Eigen::VectorXd w = X.completeOrthogonalDecomposition().solve(r);
    long double loss = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        const long double e = static_cast<long double>(X.row(row).dot(w)) - r(row);
        loss += e * e;
    }
    const double dn = static_cast<double>(n);
    const double floored = std::max(static_cast<double>(loss), 1.0 / dn);
    return dn / 2.0 * std::log2(floored) + (static_cast<double>(m) + 2.0) / 2.0 * std::log2(dn) -
           dn / 2.0 * std::log2(dn * std::numbers::e / (2.0 * std::numbers::pi));
}

CostReport direct_cost(const FeatureMap& phi, const DbnStructure& g, const History& h) {
    if (phi.size() != g.num_features()) throw Error("direct_cost: structure/feature map mismatch");
    if (h.length() <= 1) return {};
    std::vector<FeatureVector> xs;
    for (std::size_t t = 1; t <= h.length(); ++t) {
        FeatureVector x(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) x.set(i, phi[i](h, t));
        xs.push_back(x);
    }
    return CostReport::make(direct_state_code(xs, h.actions(), g), direct_reward_code(xs, h.rewards()));
}

GridFit grid_ansatz(const RewardModel& old, std::span<const FeatureVector> xs, std::span<const double> rs,
                    std::span<const std::uint8_t> new_column, double lo, double hi, double step) {
    if (xs.size() != rs.size() || new_column.size() != rs.size()) throw Error("grid_ansatz: length mismatch");
    // 2x2 sufficient statistics of the two-parameter loss.
    double spp = 0, spz = 0, szz = 0, spr = 0, szr = 0, srr = 0;
    for (std::size_t t = 0; t < rs.size(); ++t) {
        double p = old.w(0);
        for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(old.w.size()); ++i) {
            if (xs[t][i]) p += old.w(static_cast<Eigen::Index>(i + 1));
        }
        const double z = new_column[t] ? 1.0 : 0.0;
        spp += p * p;
        spz += p * z;
        szz += z * z;
        spr += p * rs[t];
        szr += z * rs[t];
        srr += rs[t] * rs[t];
    }
    const auto steps = static_cast<long>(std::llround((hi - lo) / step));
    GridFit best{0.0, 0.0, INFINITY};
    for (long i = 0; i <= steps; ++i) {
        const double v0 = lo + static_cast<double>(i) * step;
        for (long j = 0; j <= steps; ++j) {
            const double v1 = lo + static_cast<double>(j) * step;
            const double loss =
                v0 * v0 * spp + 2 * v0 * v1 * spz + v1 * v1 * szz - 2 * v0 * spr - 2 * v1 * szr + srr;
            if (loss < best.loss) best = {1.0 - v0, v1, loss};
        }
    }
    return best;
}

}  // namespace phidbn::oracle
