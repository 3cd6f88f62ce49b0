#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "phidbn/cli.hpp"
#include "phidbn/phi_search.hpp"
#include "phidbn/structure.hpp"

using namespace phidbn;
using namespace phidbn::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int call(std::vector<std::string> args) {
    args.insert(args.begin(), "phidbn");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("phidbn_test_" + name);
    fs::remove_all(p);
    return p;
}

const std::string kFixture = std::string(PHIDBN_TEST_DATA) + "/fixture_trace.jsonl";

}  // namespace

TEST_CASE("TOML config parsing") {
    const auto c = parse_config_toml(R"(
env = "bitstream"
order = 4
rule = "6996"
noise = 0.05
seed = 7
phi_search = "hill"
incremental = true
)");
    CHECK(c.env == "bitstream");
    CHECK(c.order == 4);
    CHECK(c.rule == "6996");
    CHECK(c.noise == 0.05);
    CHECK(c.seed == 7);
    CHECK(c.incremental);
    CHECK(c.steps == ExperimentConfig{}.steps);
    CHECK_THROWS_AS(parse_config_toml("colour = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config_toml("order = \"three\""), ConfigError);
    CHECK_THROWS_AS(parse_config_toml("order = -1"), ConfigError);
    CHECK_THROWS_AS(parse_config_toml("env = "), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/phidbn.toml"), ConfigError);
}

TEST_CASE("config round trip through TOML and validation") {
    ExperimentConfig c;
    c.env = "vacuum-noisy";
    c.noise = 0.2;
    c.gamma = 0.95;
    c.seed = 123456789012ULL;
    const auto back = parse_config_toml(c.to_toml());
    CHECK(back.to_json() == c.to_json());

    ExperimentConfig bad;
    bad.env = "maze";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.structure = "greedy";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.relearn_period = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    CHECK(call({"run", "--dry-run", "--out-dir", dir.string()}) == 0);
    CHECK_FALSE(fs::exists(dir));

    fs::create_directories(dir);
    std::ofstream(dir / "bad.toml") << "steps = [1, 2\n";
    CHECK(call({"run", "--config", (dir / "bad.toml").string()}) == 2);
    std::ofstream(dir / "unknown.toml") << "speed = 3\n";
    CHECK(call({"run", "--config", (dir / "unknown.toml").string()}) == 2);
    CHECK(call({"run", "--bogus-flag"}) == 2);
    CHECK(call({"run", "--gamma", "2", "--dry-run"}) == 2);
    CHECK(call({"report", (dir / "missing.jsonl").string()}) == 1);
    std::ofstream(dir / "corrupt.jsonl") << "{\"t\":1,\"o\":0}\n{\"t\":5}\n";
    CHECK(call({"report", (dir / "corrupt.jsonl").string()}) == 1);
    CHECK(call({"report", kFixture, "--window", "5", "--window-max", "2"}) == 0);
    CHECK(call({"cost-table", "--env", "bitstream", "--steps", "300", "--window-max", "3"}) == 0);
    fs::remove_all(dir);
}

TEST_CASE("runs are reproducible and their cost replays from the trace") {
    const auto dir = scratch("run");
    const auto summary_path = dir / "summary.json";
    const std::vector<std::string> args{"run", "--steps", "1500", "--relearn-period", "500", "--seed", "3",
                                        "--out-dir", dir.string()};
    REQUIRE(call(args) == 0);
    const std::string first = slurp(summary_path);
    REQUIRE(call(args) == 0);
    CHECK(slurp(summary_path) == first);
    CHECK(fs::exists(dir / "trace.jsonl"));
    CHECK(fs::exists(dir / "cost_table.csv"));

    const auto s = nlohmann::json::parse(first);
    for (const char* key : {"env", "config", "cycles", "relearns", "features", "structure", "final_cost",
                            "average_reward", "average_window", "reward_weights", "q_weights"}) {
        CHECK(s.contains(key));
    }
    CHECK(s["cycles"] == 1500);
    CHECK(s["relearns"] == 3);

    std::ifstream in(dir / "trace.jsonl");
    const History h = read_history_jsonl(in);
    CHECK(h.length() == 1501);
    std::vector<FeatureId> ids;
    for (const auto& f : s["features"]) ids.push_back(FeatureId{f["name"], f["params"].get<std::vector<int>>()});
    const auto phi = envs::make_feature_map(ids);
    const auto g = DbnStructure::from_json(nlohmann::json{{"parents", s["structure"]}});
    const auto replay = cost(phi, g, h);
    CHECK(replay.total == doctest::Approx(s["final_cost"]["total"].get<double>()).epsilon(1e-12));
    CHECK(replay.state_bits == doctest::Approx(s["final_cost"]["state_bits"].get<double>()).epsilon(1e-12));

    double sum = 0.0;
    const std::size_t window = s["average_window"];
    for (std::size_t k = h.rewards().size() - window; k < h.rewards().size(); ++k) sum += h.rewards()[k];
    CHECK(s["average_reward"].get<double>() == doctest::Approx(sum / window));
    fs::remove_all(dir);
}

TEST_CASE("bitstream run with phi search writes the search log") {
    const auto dir = scratch("search");
    REQUIRE(call({"run", "--env", "bitstream", "--rule", "2D", "--phi-search", "anneal", "--phi-steps", "10",
                  "--steps", "1000", "--out-dir", dir.string()}) == 0);
    std::ifstream log(dir / "phi_search.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) {
        const auto j = nlohmann::ordered_json::parse(line);
        CHECK(j.begin().key() == "iter");
        CHECK(j.contains("m"));
        CHECK(j.contains("accepted"));
        ++lines;
    }
    CHECK(lines == 20);
    const auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(s.contains("window"));
    fs::remove_all(dir);
}

TEST_CASE("incremental search reports its cache work") {
    const auto dir = scratch("incremental");
    auto c = parse_config_toml("env = \"bitstream\"\nrule = \"2D\"\nphi_search = \"anneal\"\nphi_steps = 10\n"
                               "incremental = true\nsteps = 1000\n");
    c.out_dir = dir.string();
    std::ostringstream stats;
    run_to_directory(c, &stats);
    const auto text = stats.str();
    CHECK(text.find("incremental cost cache: features_added=") != std::string::npos);
    CHECK(text.find("features_added=0 ") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("report: golden output on the fixture") {
    std::ifstream in(kFixture);
    const History h = read_history_jsonl(in);
    std::ostringstream os;
    report(h, os, 5, 3);
    CHECK(os.str() == slurp(std::string(PHIDBN_TEST_DATA) + "/fixture_report.txt"));
}

TEST_CASE("report: reward rows are window sums, cost rows match the table") {
    std::ifstream in(kFixture);
    const History h = read_history_jsonl(in);
    std::ostringstream os;
    report(h, os, 4, 2);
    std::istringstream lines(os.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "# rewards");
    std::getline(lines, line);
    const auto rs = h.rewards();
    for (std::size_t begin = 0; begin < rs.size(); begin += 4) {
        double sum = 0.0;
        for (std::size_t k = begin; k < begin + 4; ++k) sum += rs[k];
        std::getline(lines, line);
        std::ostringstream expect;
        expect << begin + 1 << "," << begin + 4 << ",4," << sum << "," << sum / 4;
        CHECK(line == expect.str());
    }
    std::getline(lines, line);
    CHECK(line == "# cost");
    std::getline(lines, line);
    const auto table = cost_table_over_m(h, WindowPhi{0, 2, 0}, 0, 2, StructureOptions{});
    for (const auto& [m, c] : table) {
        std::getline(lines, line);
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        CHECK(std::stoul(cell) == m);
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) == doctest::Approx(c.state_bits).epsilon(1e-10));
    }
}

TEST_CASE("report: empty trace gives empty tables") {
    std::ostringstream os;
    report(History{}, os, 10, 3);
    CHECK(os.str() == "# rewards\nfirst_cycle,last_cycle,cycles,reward_sum,average_reward\n# cost\nm,state_bits,reward_bits,total\n");
    CHECK_THROWS_AS(report(History{}, os, 0, 3), Error);
}

TEST_CASE("environment factory") {
    ExperimentConfig c;
    CHECK(make_environment(c)->name() == "vacuum");
    c.env = "vacuum-noisy";
    c.noise = 0.1;
    CHECK(make_environment(c)->name() == "vacuum-noisy");
    c.env = "bitstream";
    c.rule = "96";
    CHECK(make_environment(c)->observation_alphabet() == 2);
    c.rule = "FFFF";
    CHECK_THROWS_AS(make_environment(c), Error);
}
