#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phidbn/core.hpp"
#include "phidbn/envs.hpp"

namespace phidbn::cli {

/// Bad configuration or flags; maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct ExperimentConfig {
    // environment
    std::string env = "vacuum";  ///< vacuum | vacuum-noisy | bitstream
    std::string encoding = "onehot";
    bool action_indicators = true;
    double noise = 0.0;  ///< action failure (vacuum-noisy) or flip noise (bitstream)
    std::size_t order = 3;
    std::string rule = "96";
    bool action_dependent = false;
    std::size_t actions = 2;  ///< bitstream only

    // learning
    std::string structure = "exhaustive";
    std::size_t max_parents = 3;
    std::string phi_search = "off";
    std::size_t phi_steps = 50;
    std::size_t window_max = 8;
    bool incremental = false;
    double gamma = 0.9;
    double epsilon0 = 0.2;
    std::size_t episodes = 20;
    std::size_t virtual_steps = 200;

    // run
    std::uint64_t seed = 0;
    std::size_t steps = 10000;
    std::size_t relearn_period = 500;
    std::size_t average_window = 1000;
    std::string out_dir = "out";

    /// Throws ConfigError on out-of-range or unknown values.
    void validate() const;
    /// Every key with its value, in TOML syntax.
    std::string to_toml() const;
    nlohmann::ordered_json to_json() const;
};

/// Reads TOML; unknown keys and type mismatches are ConfigErrors.
ExperimentConfig parse_config_toml(std::string_view text, const std::string& source = "config");
ExperimentConfig load_config(const std::string& path);

std::unique_ptr<envs::Environment> make_environment(const ExperimentConfig& c);

struct RunOutputs {
    std::ostream* trace = nullptr;       ///< JSONL cycles
    std::ostream* cost_table = nullptr;  ///< CSV, one row per relearn
    std::ostream* search_log = nullptr;  ///< JSONL phi-search iterations
    std::ostream* stats = nullptr;       ///< human-readable work counters
};

struct RunResult {
    History history;
    nlohmann::ordered_json summary;
};

/// The interaction loop with periodic batch relearning.
RunResult run_experiment(const ExperimentConfig& c, const RunOutputs& out = {});

/// Runs and writes trace.jsonl, cost_table.csv, summary.json (and
/// phi_search.jsonl when searching) into c.out_dir.
RunResult run_to_directory(const ExperimentConfig& c, std::ostream* stats = nullptr);

/// Reward table per window of `window` cycles and a Cost table over
/// observation windows 0..window_max, both as CSV.
void report(const History& h, std::ostream& out, std::size_t window, std::size_t window_max);

/// Cost of observation-window feature maps on a random-policy history.
void cost_table(const ExperimentConfig& c, std::ostream& out);

/// argv entry point; returns 0, 1 (runtime error) or 2 (config error).
int main_entry(int argc, char** argv);

}  // namespace phidbn::cli
