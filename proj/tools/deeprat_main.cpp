#include <CLI11.hpp>

#include "deeprat/log.hpp"
#include "deeprat/recipes.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) seeds.push_back(std::stoull(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return seeds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DeepRAT: hierarchical DRL for multi-RAT assignment and power "
                 "allocation"};
    app.require_subcommand(1);

    deeprat::harness::ExperimentRecipe recipe;
    std::string seeds = "1";
    int episodes = -1, shock_period = -1, k_inner = -1, eval_episodes = -1;
    bool serial = false;

    for (const std::string name :
         {"train", "evaluate", "baselines", "mobility", "cdf", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", recipe.config_path, "configuration file")
            ->required();
        sub->add_option("--out", recipe.out_dir, "output directory")->required();
        sub->add_option("--seeds", seeds, "comma-separated seed list");
        sub->add_option("--episodes", episodes, "override train.episodes");
        sub->add_option("--shock-period", shock_period, "override train.shock_period");
        sub->add_option("--k-inner", k_inner, "override train.k_inner");
        sub->add_option("--eval-episodes", eval_episodes,
                        "override train.eval_episodes");
        sub->add_flag("--serial", serial, "disable OpenMP parallel execution");
        sub->callback([&recipe, name] { recipe.name = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        recipe.seeds = parse_seeds(seeds);
    } catch (const std::exception&) {
        deeprat::log::error("bad --seeds list '" + seeds + "'");
        return 2;
    }
    if (episodes >= 0) recipe.episodes = episodes;
    if (shock_period >= 0) recipe.shock_period = shock_period;
    if (k_inner >= 0) recipe.k_inner = k_inner;
    if (eval_episodes >= 0) recipe.eval_episodes = eval_episodes;
    if (serial) recipe.parallel = false;

    return deeprat::harness::run_recipe(recipe);
}
