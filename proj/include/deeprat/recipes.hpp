#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deeprat/baselines.hpp"
#include "deeprat/orchestrator.hpp"

namespace deeprat::harness {

struct ExperimentRecipe {
    std::string name;  // train | evaluate | baselines | mobility | cdf | sweep
    std::string config_path;
    std::string out_dir;
    std::vector<std::uint64_t> seeds{1};
    // CLI overrides; absent keeps the config value.
    std::optional<int> episodes;
    std::optional<int> shock_period;
    std::optional<int> k_inner;
    std::optional<int> eval_episodes;
    std::optional<bool> parallel;
};

// Exit status: 0 ok, 2 configuration/recipe error, 3 numeric abort.
int run_recipe(const ExperimentRecipe& recipe);

// Evaluation stream of one scheme, deployed online: every scheme continues
// from a copy of the trainer's live environment state (identical channel and
// mobility stream across schemes) and shares the trained DDPG agents. The
// trainer itself is left untouched.
struct SchemeEvalResult {
    std::vector<orchestrator::EpisodeRecord> records;
    env::Mat mean_link_rates_bps;  // U x L
    env::Mat assign_fraction;      // U x L, fraction of steps with x_lu = 1
};

SchemeEvalResult eval_deeprat(const orchestrator::Trainer& trainer, int episodes);
SchemeEvalResult eval_baseline(baselines::BaselineKind kind,
                               const orchestrator::Trainer& trainer, int episodes);

// Per-seed summary over a recipe output directory.
struct SeedSummary {
    std::uint64_t seed = 0;
    bool complete = false;
    std::optional<int> convergence_episode;
    double steady_utility = 0.0;
    double steady_sum_rate_bps = 0.0;
    double qos_satisfaction = 0.0;  // fraction of eval steps with all EDs at r_min
    std::vector<std::pair<std::string, double>> baseline_utility;
    std::vector<std::pair<std::string, double>> baseline_sum_rate;
};

struct RunSummary {
    std::vector<SeedSummary> seeds;
    double mean_utility = 0.0, std_utility = 0.0;
    double mean_sum_rate = 0.0, std_sum_rate = 0.0;
    bool any_converged = false;
};

// Scans <dir>/seed*/ and writes <dir>/summary.csv alongside the returned data.
RunSummary summarize(const std::string& metrics_dir);

// Record stream -> CSV with the fixed MetricsRow schema.
void write_records_csv(const std::string& path,
                       const std::vector<orchestrator::EpisodeRecord>& records,
                       std::uint64_t seed, const std::string& recipe,
                       const std::vector<std::string>& annotations = {});

}  // namespace deeprat::harness
