#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deeprat/baselines.hpp"
#include "deeprat/ddpg.hpp"
#include "deeprat/dqn.hpp"
#include "deeprat/env.hpp"

namespace deeprat::orchestrator {

using env::Assignment;
using env::EdQosProfile;
using env::PowerAlloc;
using env::RatRadioProfile;

// Thrown when a loss or reward turns non-finite; carries the diagnostic dump.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainConfig {
    std::vector<RatRadioProfile> rats;
    std::vector<EdQosProfile> qos;
    env::EnvConfig env_cfg;
    double speed_min_kmh = 0.0, speed_max_kmh = 0.0;  // env_cfg holds the m/s

    int episodes = 1000;
    int k_inner = 1;
    int shock_period = 0;  // episodes between mobility shocks, 0 = never
    int convergence_window = 200;
    double convergence_tol_frac = 0.02;
    int smoothing_window = 50;
    int eval_episodes = 200;
    bool reward_normalized_rates = true;
    bool es_hinge_slack = true;  // C3 term punishes violations only

    // DQN (Table V column 1)
    int dqn_hidden1 = 256, dqn_hidden2 = 128;
    double dqn_lr = 8e-4, dqn_gamma = 0.99;
    int dqn_buffer = 1000, dqn_batch = 64;
    double eps_start = 1.0, eps_end = 0.005, eps_decay = 5e-4;
    int dqn_target_sync_steps = 100;
    double eta_es = 1e3, zeta_es = 8e-4;

    // DDPG (Table V column 2)
    int ddpg_hidden1 = 16, ddpg_hidden2 = 16;
    double ddpg_actor_lr = 5e-4, ddpg_critic_lr = 5e-4, ddpg_gamma = 0.99;
    int ddpg_buffer = 500, ddpg_batch = 16;
    double ou_theta = 0.15, ou_sigma = 0.03;
    double tau = 0.005;
    double eta1 = 1.0, eta2 = 1e3, zeta_l = 5e-3;

    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
    double grad_clip = 1.0;

    std::uint64_t seed = 1;
    bool parallel = true;

    int n_rats() const { return int(rats.size()); }
    int n_eds() const { return int(qos.size()); }
    void validate() const;
};

struct EpisodeRecord {
    int episode = 0;      // 1-based
    double epsilon = 0.0; // value entering the episode
    double es_reward = 0.0;
    double es_loss = 0.0;
    double utility = 0.0;       // mean network utility over the episode's steps
    double sum_rate_bps = 0.0;  // mean over steps
    std::vector<double> rat_rewards;
    std::vector<double> rat_critic_loss;
    std::vector<double> ed_rate_bps;   // mean per ED
    int c2_violations = 0;  // (step, RAT) pairs with negative power slack
    int c3_violations = 0;  // (step, ED) pairs below r_min
    int qos_ok_steps = 0;   // steps on which every ED met r_min
    int steps = 0;

    friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Trailing moving average; entry i averages the last min(i+1, window) values.
std::vector<double> moving_average(const std::vector<double>& series, int window);

// Earliest 1-based episode e with max-min over [e-window+1, e] within
// tol_frac of |window mean|; nullopt when no window qualifies.
std::optional<int> detect_convergence(const std::vector<double>& utilities,
                                      int window = 200, double tol_frac = 0.02);

// Algorithm state for one seed: environment, the ES DQN agent, one DDPG agent
// per RAT, and the rolling (t-1) history both observation encoders read.
class Trainer {
public:
    explicit Trainer(TrainConfig cfg);

    // Runs `episodes` training episodes and returns their records.
    std::vector<EpisodeRecord> train(int episodes);
    // Greedy / noiseless rollout; agents, buffers and schedules stay untouched.
    std::vector<EpisodeRecord> evaluate(int episodes);

    // Replace the environment with a freshly seeded one (cold-start history
    // and a new random initial assignment); used for evaluation streams.
    void reseed_environment(std::uint64_t seed);

    env::Environment& environment() { return env_; }
    const env::Environment& environment() const { return env_; }
    const TrainConfig& config() const { return cfg_; }
    dqn::DqnAgent& es_agent() { return es_; }
    const dqn::DqnAgent& es_agent() const { return es_; }
    std::vector<ddpg::DdpgAgent>& rat_agents() { return rats_; }
    const std::vector<ddpg::DdpgAgent>& rat_agents() const { return rats_; }
    const Assignment& assignment() const { return assign_; }
    const dqn::EsHistory& history() const { return hist_; }
    int episodes_done() const { return episodes_done_; }

    // Invoked after every environment step (training and evaluation); not part
    // of the persisted state.
    void set_snapshot_observer(std::function<void(const env::NetworkSnapshot&)> fn) {
        snapshot_observer_ = std::move(fn);
    }

    // nn-format checkpoint per network plus a full resumable state file
    // (<dir>/state.bin) and the RNG streams embedded in it.
    void save_checkpoints(const std::string& dir) const;
    void save_state(const std::string& dir) const;
    void load_state(const std::string& dir);

private:
    struct StepStats {
        double es_reward = 0.0, es_loss = 0.0;
        bool has_loss = false;
        double utility = 0.0, sum_rate = 0.0;
        std::vector<double> rat_rewards, rat_loss, ed_rates;
        int c2_viol = 0, c3_viol = 0;
        bool qos_ok = false;
    };

    StepStats run_ed_step(int ed_1based, bool learning);
    EpisodeRecord run_episode(bool learning);
    void init_assignment(rng::Stream& rs);

    TrainConfig cfg_;
    env::Environment env_;
    dqn::DqnAgent es_;
    std::vector<ddpg::DdpgAgent> rats_;
    Assignment assign_;
    dqn::EsHistory hist_;
    int episodes_done_ = 0;
    std::function<void(const env::NetworkSnapshot&)> snapshot_observer_;
};

struct MobilityResult {
    std::vector<EpisodeRecord> records;
    // Segment boundaries every shock_period episodes; value = episodes into
    // the segment until steady state, nullopt if never reached.
    std::vector<std::optional<int>> segment_convergence;
};

// Trains with periodic mobility shocks (applied before episode k*period + 1)
// without resetting networks or buffers.
MobilityResult run_mobility_scenario(const TrainConfig& cfg);

// Per-episode utility series of a record list.
std::vector<double> utility_series(const std::vector<EpisodeRecord>& records);

}  // namespace deeprat::orchestrator
