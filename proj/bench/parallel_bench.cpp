// Compares the OpenMP and serial execution paths of the two data-parallel
// kernels (per-link snapshot computation, per-RAT agent stepping) and checks
// they agree bit-for-bit while timing both.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "deeprat/config.hpp"
#include "deeprat/orchestrator.hpp"

using namespace deeprat;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0)
               .count() /
           1e6;
}

orchestrator::TrainConfig bench_config(bool parallel, int n_eds) {
    auto cfg = harness::load_config(BENCH_CONFIG_PATH);
    cfg.parallel = parallel;
    cfg.env_cfg.parallel = parallel;
    cfg.seed = 7;
    // Scale the ED population up to give the per-link loop some width.
    while (int(cfg.qos.size()) < n_eds) cfg.qos.push_back(cfg.qos.back());
    cfg.qos.resize(n_eds);
    return cfg;
}

double bench_env_steps(bool parallel, int n_eds, int iters,
                       env::NetworkSnapshot& out) {
    const auto cfg = bench_config(parallel, n_eds);
    env::Environment e(cfg.rats, cfg.qos, cfg.env_cfg, cfg.seed);
    env::Assignment assign(n_eds, cfg.n_rats());
    for (auto& x : assign.x) x = 1;
    env::PowerAlloc powers(n_eds, cfg.n_rats());
    for (int u = 0; u < n_eds; ++u)
        for (int l = 0; l < cfg.n_rats(); ++l)
            powers.at(u, l) = cfg.rats[l].max_power_w / n_eds;

    const auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) {
        e.refresh_gains();
        out = e.apply(assign, powers);
    }
    return seconds_since(t0);
}

double bench_training(bool parallel, int episodes,
                      std::vector<orchestrator::EpisodeRecord>& out) {
    auto cfg = bench_config(parallel, 10);
    const auto t0 = Clock::now();
    orchestrator::Trainer trainer(cfg);
    out = trainer.train(episodes);
    return seconds_since(t0);
}

}  // namespace

int main(int argc, char** argv) {
    const int env_iters = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int episodes = argc > 2 ? std::atoi(argv[2]) : 30;

    std::printf("threads available: %d\n", omp_get_max_threads());

    for (const int n_eds : {10, 200}) {
        env::NetworkSnapshot serial_snap, omp_snap;
        const double t_serial = bench_env_steps(false, n_eds, env_iters, serial_snap);
        const double t_omp = bench_env_steps(true, n_eds, env_iters, omp_snap);
        const bool identical = serial_snap.rates_bps == omp_snap.rates_bps &&
                               serial_snap.gains == omp_snap.gains &&
                               serial_snap.ed_rate_bps == omp_snap.ed_rate_bps;
        std::printf(
            "env_step U=%-4d x%d       serial %8.3fs   omp %8.3fs   speedup %.2fx   "
            "bit-identical %s\n",
            n_eds, env_iters, t_serial, t_omp, t_serial / t_omp,
            identical ? "yes" : "NO");
        if (!identical) return 1;
    }

    std::vector<orchestrator::EpisodeRecord> serial_rec, omp_rec;
    const double t_serial = bench_training(false, episodes, serial_rec);
    const double t_omp = bench_training(true, episodes, omp_rec);
    std::printf(
        "train %3d episodes        serial %8.3fs   omp %8.3fs   speedup %.2fx   "
        "bit-identical %s\n",
        episodes, t_serial, t_omp, t_serial / t_omp,
        serial_rec == omp_rec ? "yes" : "NO");
    return serial_rec == omp_rec ? 0 : 1;
}
