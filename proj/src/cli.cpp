#include "phidbn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>
#include <CLI11.hpp>

#include "phidbn/coding.hpp"
#include "phidbn/incremental.hpp"
#include "phidbn/model.hpp"
#include "phidbn/phi_search.hpp"
#include "phidbn/planner.hpp"
#include "phidbn/reward.hpp"
#include "phidbn/structure.hpp"

namespace phidbn::cli {

namespace {

bool is_vacuum(const std::string& env) { return env == "vacuum" || env == "vacuum-noisy"; }

template <class T>
std::string toml_value(const T& v) {
    std::ostringstream os;
    if constexpr (std::is_same_v<T, std::string>) {
        os << std::quoted(v);
    } else if constexpr (std::is_same_v<T, bool>) {
        os << (v ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<T>) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        std::string text(buf, res.ptr);
        if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
        os << text;
    } else {
        os << v;
    }
    return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (env != "vacuum" && env != "vacuum-noisy" && env != "bitstream") {
        throw ConfigError("env must be vacuum, vacuum-noisy or bitstream, got '" + env + "'");
    }
    try {
        envs::parse_encoding(encoding);
        parse_structure_strategy(structure);
        parse_search_mode(phi_search);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("noise must lie in [0,1]");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw ConfigError("epsilon0 must lie in [0,1]");
    if (relearn_period == 0) throw ConfigError("relearn_period must be positive");
    if (average_window == 0) throw ConfigError("average_window must be positive");
    if (max_parents > 8) throw ConfigError("max_parents above 8 is not supported");
    if (window_max > 30) throw ConfigError("window_max above 30 is not supported");
    if (env == "bitstream") {
        if (order > 20) throw ConfigError("order above 20 is not supported");
        if (actions == 0 || actions > 16) throw ConfigError("actions must lie in [1,16]");
        try {
            envs::BitstreamEnv::from_hex(order, rule, action_dependent, noise, actions, seed);
        } catch (const Error& e) {
            throw ConfigError(std::string("rule: ") + e.what());
        }
    }
}

std::string ExperimentConfig::to_toml() const {
    std::ostringstream os;
    os << "env = " << toml_value(env) << "\n"
       << "encoding = " << toml_value(encoding) << "\n"
       << "action_indicators = " << toml_value(action_indicators) << "\n"
       << "noise = " << toml_value(noise) << "\n"
       << "order = " << toml_value(order) << "\n"
       << "rule = " << toml_value(rule) << "\n"
       << "action_dependent = " << toml_value(action_dependent) << "\n"
       << "actions = " << toml_value(actions) << "\n"
       << "structure = " << toml_value(structure) << "\n"
       << "max_parents = " << toml_value(max_parents) << "\n"
       << "phi_search = " << toml_value(phi_search) << "\n"
       << "phi_steps = " << toml_value(phi_steps) << "\n"
       << "window_max = " << toml_value(window_max) << "\n"
       << "incremental = " << toml_value(incremental) << "\n"
       << "gamma = " << toml_value(gamma) << "\n"
       << "epsilon0 = " << toml_value(epsilon0) << "\n"
       << "episodes = " << toml_value(episodes) << "\n"
       << "virtual_steps = " << toml_value(virtual_steps) << "\n"
       << "seed = " << toml_value(seed) << "\n"
       << "steps = " << toml_value(steps) << "\n"
       << "relearn_period = " << toml_value(relearn_period) << "\n"
       << "average_window = " << toml_value(average_window) << "\n"
       << "out_dir = " << toml_value(out_dir) << "\n";
    return os.str();
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["env"] = env;
    j["encoding"] = encoding;
    j["action_indicators"] = action_indicators;
    j["noise"] = noise;
    j["order"] = order;
    j["rule"] = rule;
    j["action_dependent"] = action_dependent;
    j["actions"] = actions;
    j["structure"] = structure;
    j["max_parents"] = max_parents;
    j["phi_search"] = phi_search;
    j["phi_steps"] = phi_steps;
    j["window_max"] = window_max;
    j["incremental"] = incremental;
    j["gamma"] = gamma;
    j["epsilon0"] = epsilon0;
    j["episodes"] = episodes;
    j["virtual_steps"] = virtual_steps;
    j["seed"] = seed;
    j["steps"] = steps;
    j["relearn_period"] = relearn_period;
    j["average_window"] = average_window;
    return j;
}

ExperimentConfig parse_config_toml(std::string_view text, const std::string& source) {
    toml::table tbl;
    try {
        tbl = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(os.str());
    }

    ExperimentConfig c;
    auto fail = [&](const std::string& key, const char* want) {
        throw ConfigError(source + ": key '" + key + "' must be " + want);
    };
    auto get_string = [&](const std::string& key, const toml::node& n, std::string& dst) {
        auto v = n.value_exact<std::string>();
        if (!v) fail(key, "a string");
        dst = *v;
    };
    auto get_bool = [&](const std::string& key, const toml::node& n, bool& dst) {
        auto v = n.value_exact<bool>();
        if (!v) fail(key, "a boolean");
        dst = *v;
    };
    auto get_count = [&](const std::string& key, const toml::node& n, auto& dst) {
        auto v = n.value_exact<std::int64_t>();
        if (!v || *v < 0) fail(key, "a non-negative integer");
        dst = static_cast<std::remove_reference_t<decltype(dst)>>(*v);
    };
    auto get_double = [&](const std::string& key, const toml::node& n, double& dst) {
        if (auto v = n.value_exact<double>()) {
            dst = *v;
        } else if (auto i = n.value_exact<std::int64_t>()) {
            dst = static_cast<double>(*i);
        } else {
            fail(key, "a number");
        }
    };

    for (const auto& [k, node] : tbl) {
        const std::string key(k.str());
        if (key == "env") get_string(key, node, c.env);
        else if (key == "encoding") get_string(key, node, c.encoding);
        else if (key == "action_indicators") get_bool(key, node, c.action_indicators);
        else if (key == "noise") get_double(key, node, c.noise);
        else if (key == "order") get_count(key, node, c.order);
        else if (key == "rule") get_string(key, node, c.rule);
        else if (key == "action_dependent") get_bool(key, node, c.action_dependent);
        else if (key == "actions") get_count(key, node, c.actions);
        else if (key == "structure") get_string(key, node, c.structure);
        else if (key == "max_parents") get_count(key, node, c.max_parents);
        else if (key == "phi_search") get_string(key, node, c.phi_search);
        else if (key == "phi_steps") get_count(key, node, c.phi_steps);
        else if (key == "window_max") get_count(key, node, c.window_max);
        else if (key == "incremental") get_bool(key, node, c.incremental);
        else if (key == "gamma") get_double(key, node, c.gamma);
        else if (key == "epsilon0") get_double(key, node, c.epsilon0);
        else if (key == "episodes") get_count(key, node, c.episodes);
        else if (key == "virtual_steps") get_count(key, node, c.virtual_steps);
        else if (key == "seed") get_count(key, node, c.seed);
        else if (key == "steps") get_count(key, node, c.steps);
        else if (key == "relearn_period") get_count(key, node, c.relearn_period);
        else if (key == "average_window") get_count(key, node, c.average_window);
        else if (key == "out_dir") get_string(key, node, c.out_dir);
        else throw ConfigError(source + ": unknown key '" + key + "'");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_toml(buf.str(), path);
}

std::unique_ptr<envs::Environment> make_environment(const ExperimentConfig& c) {
    if (c.env == "vacuum") return std::make_unique<envs::VacuumEnv>(c.seed);
    if (c.env == "vacuum-noisy") return std::make_unique<envs::VacuumEnv>(c.seed, c.noise, c.noise);
    if (c.env == "bitstream") {
        return std::make_unique<envs::BitstreamEnv>(
            envs::BitstreamEnv::from_hex(c.order, c.rule, c.action_dependent, c.noise, c.actions, c.seed));
    }
    throw ConfigError("unknown env '" + c.env + "'");
}

namespace {

// Feature maps the agent can use: fixed vacuum history features, or an
// observation window (possibly searched).
struct AgentPhi {
    std::optional<WindowPhi> window;
    FeatureMap map;
};

AgentPhi initial_phi(const ExperimentConfig& c, const envs::Environment& env) {
    AgentPhi p;
    const bool search = parse_search_mode(c.phi_search) != SearchMode::off;
    if (is_vacuum(c.env) && !search) {
        p.map = envs::vacuum_feature_map({envs::parse_encoding(c.encoding), c.action_indicators});
        return p;
    }
    WindowPhi w;
    w.obs_bits = bits_for_alphabet(env.observation_alphabet());
    w.window = search ? 0 : (c.env == "bitstream" ? c.order : 1);
    w.action_indicators = c.action_indicators ? env.num_actions() : 0;
    p.window = w;
    p.map = w.feature_map();
    return p;
}

nlohmann::ordered_json feature_ids_json(const FeatureMap& phi) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& id : phi.ids()) {
        nlohmann::ordered_json j;
        j["name"] = id.name;
        j["params"] = id.params;
        out.push_back(j);
    }
    return out;
}

nlohmann::ordered_json cost_json(const CostReport& r) {
    nlohmann::ordered_json j;
    j["state_bits"] = r.state_bits;
    j["reward_bits"] = r.reward_bits;
    j["total"] = r.total;
    return j;
}

std::vector<double> weights_of(const RewardModel& m) { return {m.w.data(), m.w.data() + m.w.size()}; }

}  // namespace

RunResult run_experiment(const ExperimentConfig& c, const RunOutputs& out) {
    c.validate();
    auto env = make_environment(c);
    const std::size_t A = env->num_actions();
    const StructureOptions structure{parse_structure_strategy(c.structure), c.max_parents, std::nullopt};
    const SearchMode search_mode = parse_search_mode(c.phi_search);

    Rng agent_rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    AgentPhi phi = initial_phi(c, *env);

    RunResult result;
    History& h = result.history;
    h.observe(env->reset());

    std::optional<LinearQ> q;
    DbnStructure g(phi.map.size());
    RewardModel reward_model;
    CostReport last_cost;
    std::size_t relearns = 0;
    double r_max = 0.0;
    std::size_t search_iter = 0;
    IncrementalStats search_work;
    std::vector<FeatureId> q_ids;

    if (out.cost_table) *out.cost_table << "cycle,m,state_bits,reward_bits,total\n";

    auto relearn = [&](std::size_t cycle) {
        const auto t0 = std::chrono::steady_clock::now();
        if (phi.window && search_mode != SearchMode::off) {
            PhiSearchOptions opts;
            opts.mode = search_mode;
            opts.steps = c.phi_steps;
            opts.window_max = c.window_max;
            opts.structure = structure;
            opts.seed = c.seed * 1000003ULL + relearns;
            opts.incremental = c.incremental;
            const auto res = stochastic_search(h, *phi.window, opts);
            search_work += res.work;
            if (out.search_log) {
                for (const auto& e : res.log) {
                    auto j = e.to_json();
                    j["iter"] = ++search_iter;
                    *out.search_log << j.dump() << "\n";
                }
            }
            phi.window = res.best.phi;
            phi.map = phi.window->feature_map();
        }

        const auto xs = feature_trajectory(phi.map, h);
        const auto data = pack_trajectory(xs, h.actions(), A);
        g = search_structure(data, structure);
        last_cost = cost_from_trajectory(xs, h.actions(), h.rewards(), g);
        const auto counts = accumulate_counts(data, g);
        const FactoredModel model = estimate_model(counts, A);
        const auto samples = pair_rewards(xs, h.rewards());
        reward_model = fit_weights(build_design(samples.xs, samples.rs, phi.map.size()));

        const std::size_t m = phi.map.size();
        const auto ids = phi.map.ids();
        if (!q) {
            q = LinearQ(A, m, c.gamma);
            optimistic_init(*q, r_max);
        } else if (ids != q_ids) {
            // Carry weights over by feature identity.
            std::vector<std::optional<std::size_t>> mapping(m);
            for (std::size_t k = 0; k < m; ++k) {
                const auto it = std::find(q_ids.begin(), q_ids.end(), ids[k]);
                if (it != q_ids.end()) mapping[k] = static_cast<std::size_t>(it - q_ids.begin());
            }
            q = value_warm_start(*q, mapping);
        }
        q_ids = ids;

        TdOptions td;
        td.episodes = c.episodes;
        td.steps = c.virtual_steps;
        td.start = xs.back();
        td.epsilon = 0.3;
        Rng planner_rng(agent_rng());
        *q = td_train(std::move(*q), model, reward_model, td, planner_rng);
        ++relearns;

        if (out.cost_table) {
            *out.cost_table << cycle << "," << m << "," << std::setprecision(17) << last_cost.state_bits << ","
                            << last_cost.reward_bits << "," << last_cost.total << "\n";
        }
        if (out.stats) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            *out.stats << "relearn " << relearns << " at cycle " << cycle << ": m=" << m
                       << " edges=" << g.num_edges() << " cost=" << last_cost.total << " bits, " << secs << " s\n";
        }
    };

    for (std::size_t t = 1; t <= c.steps; ++t) {
        ActionId a;
        if (q) {
            const double eps = c.epsilon0 / static_cast<double>(relearns);
            const FeatureVector x = evaluate_features_at(phi.map, h, h.length());
            a = act(Policy{&*q, eps}, x, agent_rng);
        } else {
            a = static_cast<ActionId>(uniform_index(agent_rng, A));
        }
        const auto resp = env->step(a);
        if (out.trace) write_cycle_jsonl(*out.trace, t, h.observation(t), a, resp.reward);
        h.record(a, resp.reward, resp.observation);
        r_max = std::max(r_max, resp.reward);

        if (t % c.relearn_period == 0 || t == c.steps) relearn(t);
    }
    if (out.stats && c.incremental) {
        *out.stats << "incremental cost cache: features_added=" << search_work.features_added
                   << " features_removed=" << search_work.features_removed
                   << " contributions_recomputed=" << search_work.contributions_recomputed << "\n";
    }

    if (out.trace) {
        nlohmann::ordered_json j;
        j["t"] = h.length();
        j["o"] = h.observation(h.length());
        *out.trace << j.dump() << "\n";
    }

    const std::size_t window = std::min(c.average_window, c.steps);
    double avg = 0.0;
    if (window > 0) {
        long double sum = 0.0L;
        for (std::size_t k = c.steps - window; k < c.steps; ++k) sum += h.rewards()[k];
        avg = static_cast<double>(sum / static_cast<long double>(window));
    }

    auto& s = result.summary;
    s["env"] = env->name();
    s["config"] = c.to_json();
    s["cycles"] = c.steps;
    s["relearns"] = relearns;
    if (phi.window) s["window"] = phi.window->window;
    s["features"] = feature_ids_json(phi.map);
    s["structure"] = g.to_json()["parents"];
    s["final_cost"] = cost_json(last_cost);
    s["average_reward"] = avg;
    s["average_window"] = window;
    s["reward_weights"] = weights_of(reward_model);
    s["q_weights"] = q ? nlohmann::ordered_json(q->to_json()) : nlohmann::ordered_json::object();
    return result;
}

RunResult run_to_directory(const ExperimentConfig& c, std::ostream* stats) {
    c.validate();
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    const fs::path dir(c.out_dir);
    std::ofstream trace(dir / "trace.jsonl");
    std::ofstream costs(dir / "cost_table.csv");
    std::ofstream search;
    if (parse_search_mode(c.phi_search) != SearchMode::off) search.open(dir / "phi_search.jsonl");
    if (!trace || !costs) throw Error("cannot write into '" + c.out_dir + "'");

    RunOutputs out{&trace, &costs, search.is_open() ? &search : nullptr, stats};
    RunResult r = run_experiment(c, out);
    std::ofstream summary(dir / "summary.json");
    summary << r.summary.dump(2) << "\n";
    if (!summary) throw Error("cannot write summary.json");
    return r;
}

void report(const History& h, std::ostream& out, std::size_t window, std::size_t window_max) {
    if (window == 0) throw Error("report: window must be positive");
    out << "# rewards\n";
    out << "first_cycle,last_cycle,cycles,reward_sum,average_reward\n";
    const auto rs = h.rewards();
    out << std::setprecision(12);
    for (std::size_t begin = 0; begin < rs.size(); begin += window) {
        const std::size_t end = std::min(begin + window, rs.size());
        long double sum = 0.0L;
        for (std::size_t k = begin; k < end; ++k) sum += rs[k];
        const auto cycles = end - begin;
        out << begin + 1 << "," << end << "," << cycles << "," << static_cast<double>(sum) << ","
            << static_cast<double>(sum / static_cast<long double>(cycles)) << "\n";
    }
    out << "# cost\n";
    out << "m,state_bits,reward_bits,total\n";
    if (h.empty()) return;
    Observation largest = 0;
    for (Observation o : h.observations()) {
        if (o < 0) throw Error("report: negative observation");
        largest = std::max(largest, o);
    }
    WindowPhi base;
    base.obs_bits = bits_for_alphabet(static_cast<std::size_t>(largest) + 1);
    const auto table = cost_table_over_m(h, base, 0, window_max, StructureOptions{});
    for (const auto& [m, r] : table) {
        out << m << "," << r.state_bits << "," << r.reward_bits << "," << r.total << "\n";
    }
}

void cost_table(const ExperimentConfig& c, std::ostream& out) {
    c.validate();
    auto env = make_environment(c);
    const History h = envs::random_policy_history(*env, c.steps, c.seed + 1);
    WindowPhi base;
    base.obs_bits = bits_for_alphabet(env->observation_alphabet());
    base.action_indicators = c.action_indicators ? env->num_actions() : 0;
    const StructureOptions structure{parse_structure_strategy(c.structure), c.max_parents, std::nullopt};
    const auto table = cost_table_over_m(h, base, 0, c.window_max, structure);
    out << "m,state_bits,reward_bits,total\n" << std::setprecision(12);
    for (const auto& [m, r] : table) {
        out << m << "," << r.state_bits << "," << r.reward_bits << "," << r.total << "\n";
    }
}

namespace {

// Flag values that override the config file when given.
struct Overrides {
    std::optional<std::string> env, encoding, rule, structure, phi_search, out_dir;
    std::optional<double> noise, gamma, epsilon0;
    std::optional<std::size_t> order, max_parents, phi_steps, window_max, episodes, virtual_steps, steps,
        relearn_period, average_window, actions;
    std::optional<std::uint64_t> seed;
    bool incremental = false;
    bool no_action_indicators = false;
    bool action_dependent = false;

    void add_to(CLI::App& app) {
        app.add_option("--env", env, "vacuum | vacuum-noisy | bitstream");
        app.add_option("--encoding", encoding, "compact | onehot (vacuum)");
        app.add_option("--noise", noise, "action failure or bit flip probability");
        app.add_option("--order", order, "bitstream order k");
        app.add_option("--rule", rule, "bitstream rule table as hex");
        app.add_flag("--action-dependent", action_dependent, "bitstream rule indexed by the last action too");
        app.add_option("--actions", actions, "bitstream action count");
        app.add_flag("--no-action-indicators", no_action_indicators, "drop last-action features");
        app.add_option("--structure", structure, "exhaustive | mi | chowliu");
        app.add_option("--max-parents", max_parents, "parent set bound for exhaustive search");
        app.add_option("--phi-search", phi_search, "off | hill | anneal");
        app.add_option("--phi-steps", phi_steps, "proposals per relearn");
        app.add_option("--window-max", window_max, "largest observation window");
        app.add_flag("--incremental", incremental, "incremental cost updates during phi search");
        app.add_option("--gamma", gamma, "discount");
        app.add_option("--epsilon0", epsilon0, "initial exploration rate");
        app.add_option("--episodes", episodes, "virtual episodes per relearn");
        app.add_option("--virtual-steps", virtual_steps, "steps per virtual episode");
        app.add_option("--seed", seed, "random seed");
        app.add_option("--steps", steps, "interaction cycles");
        app.add_option("--relearn-period", relearn_period, "cycles between relearns");
        app.add_option("--average-window", average_window, "cycles in the final reward average");
        app.add_option("--out-dir", out_dir, "output directory");
    }

    void apply(ExperimentConfig& c) const {
        if (env) c.env = *env;
        if (encoding) c.encoding = *encoding;
        if (noise) c.noise = *noise;
        if (order) c.order = *order;
        if (rule) c.rule = *rule;
        if (action_dependent) c.action_dependent = true;
        if (actions) c.actions = *actions;
        if (no_action_indicators) c.action_indicators = false;
        if (structure) c.structure = *structure;
        if (max_parents) c.max_parents = *max_parents;
        if (phi_search) c.phi_search = *phi_search;
        if (phi_steps) c.phi_steps = *phi_steps;
        if (window_max) c.window_max = *window_max;
        if (incremental) c.incremental = true;
        if (gamma) c.gamma = *gamma;
        if (epsilon0) c.epsilon0 = *epsilon0;
        if (episodes) c.episodes = *episodes;
        if (virtual_steps) c.virtual_steps = *virtual_steps;
        if (seed) c.seed = *seed;
        if (steps) c.steps = *steps;
        if (relearn_period) c.relearn_period = *relearn_period;
        if (average_window) c.average_window = *average_window;
        if (out_dir) c.out_dir = *out_dir;
    }
};

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"phidbn: feature dynamic Bayesian network agent"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment");
    std::string config_path;
    bool dry_run = false;
    bool stats = false;
    Overrides run_flags;
    run->add_option("--config", config_path, "TOML config file");
    run->add_flag("--dry-run", dry_run, "print the effective config and exit");
    run->add_flag("--stats", stats, "print work counters to stderr");
    run_flags.add_to(*run);

    auto* rep = app.add_subcommand("report", "summarize a trace");
    std::string trace_path;
    std::size_t window = 1000;
    std::size_t report_window_max = 6;
    rep->add_option("trace", trace_path, "trace.jsonl")->required();
    rep->add_option("--window", window, "cycles per reward row");
    rep->add_option("--window-max", report_window_max, "largest observation window in the cost table");

    auto* table = app.add_subcommand("cost-table", "Cost over observation windows on a random-policy history");
    std::string table_config;
    Overrides table_flags;
    table->add_option("--config", table_config, "TOML config file");
    table_flags.add_to(*table);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) {
            ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
            run_flags.apply(c);
            c.validate();
            if (dry_run) {
                std::cout << c.to_toml();
                return 0;
            }
            const auto r = run_to_directory(c, stats ? &std::cerr : nullptr);
            std::cout << "wrote " << c.out_dir << "/summary.json: cost " << r.summary["final_cost"]["total"]
                      << " bits, average reward " << r.summary["average_reward"] << "\n";
            return 0;
        }
        if (*rep) {
            std::ifstream in(trace_path);
            if (!in) throw Error("cannot open trace '" + trace_path + "'");
            const History h = read_history_jsonl(in);
            report(h, std::cout, window, report_window_max);
            return 0;
        }
        if (*table) {
            ExperimentConfig c = table_config.empty() ? ExperimentConfig{} : load_config(table_config);
            table_flags.apply(c);
            if (!table_flags.steps && table_config.empty()) c.steps = 2000;
            if (!table_flags.window_max && table_config.empty()) c.window_max = 6;
            cost_table(c, std::cout);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace phidbn::cli
