#include "deeprat/orchestrator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace deeprat::orchestrator {

void TrainConfig::validate() const {
    if (rats.empty()) throw std::invalid_argument("config: need at least one RAT");
    if (qos.empty()) throw std::invalid_argument("config: need at least one ED");
    if (rats.size() > 16) throw std::invalid_argument("config: subset action space needs L <= 16");
    if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
    if (k_inner < 1) throw std::invalid_argument("config: k_inner must be >= 1");
    if (convergence_window < 2)
        throw std::invalid_argument("config: convergence window must be >= 2");
    if (shock_period < 0) throw std::invalid_argument("config: shock period must be >= 0");
    if (shock_period > 0 && episodes % shock_period != 0)
        throw std::invalid_argument("config: shock period must divide episodes");
    if (smoothing_window < 1)
        throw std::invalid_argument("config: smoothing window must be >= 1");
    for (const auto& r : rats) r.validate();
    for (const auto& q : qos) q.validate();
}

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    std::vector<double> out(series.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sum += series[i];
        if (i >= std::size_t(window)) sum -= series[i - window];
        const double n = double(std::min<std::size_t>(i + 1, window));
        out[i] = sum / n;
    }
    return out;
}

std::optional<int> detect_convergence(const std::vector<double>& utilities,
                                      int window, double tol_frac) {
    if (window < 2 || utilities.size() < std::size_t(window)) return std::nullopt;
    for (std::size_t e = std::size_t(window); e <= utilities.size(); ++e) {
        double lo = utilities[e - window], hi = lo, mean = 0.0;
        for (std::size_t i = e - window; i < e; ++i) {
            lo = std::min(lo, utilities[i]);
            hi = std::max(hi, utilities[i]);
            mean += utilities[i];
        }
        mean /= window;
        if (hi - lo <= tol_frac * std::abs(mean)) return int(e);
    }
    return std::nullopt;
}

std::vector<double> utility_series(const std::vector<EpisodeRecord>& records) {
    std::vector<double> u;
    u.reserve(records.size());
    for (const auto& r : records) u.push_back(r.utility);
    return u;
}

namespace {

dqn::DqnHyper make_dqn_hyper(const TrainConfig& cfg) {
    dqn::DqnHyper h;
    h.state_dim = dqn::es_state_dim(cfg.n_eds(), cfg.n_rats());
    h.n_actions = dqn::subset_action_count(cfg.n_rats());
    h.hidden1 = cfg.dqn_hidden1;
    h.hidden2 = cfg.dqn_hidden2;
    h.lr = cfg.dqn_lr;
    h.gamma = cfg.dqn_gamma;
    h.buffer_capacity = std::size_t(cfg.dqn_buffer);
    h.batch = cfg.dqn_batch;
    h.eps = {cfg.eps_start, cfg.eps_end, cfg.eps_decay, 0};
    h.target_sync_steps = cfg.dqn_target_sync_steps;
    h.grad_clip = cfg.grad_clip;
    h.adam_beta1 = cfg.adam_beta1;
    h.adam_beta2 = cfg.adam_beta2;
    h.adam_eps = cfg.adam_eps;
    return h;
}

ddpg::DdpgHyper make_ddpg_hyper(const TrainConfig& cfg) {
    ddpg::DdpgHyper h;
    h.state_dim = ddpg::rat_state_dim(cfg.n_eds());
    h.action_dim = cfg.n_eds();
    h.hidden1 = cfg.ddpg_hidden1;
    h.hidden2 = cfg.ddpg_hidden2;
    h.actor_lr = cfg.ddpg_actor_lr;
    h.critic_lr = cfg.ddpg_critic_lr;
    h.gamma = cfg.ddpg_gamma;
    h.buffer_capacity = std::size_t(cfg.ddpg_buffer);
    h.batch = cfg.ddpg_batch;
    h.ou_theta = cfg.ou_theta;
    h.ou_sigma = cfg.ou_sigma;
    h.tau = cfg.tau;
    h.grad_clip = cfg.grad_clip;
    h.adam_beta1 = cfg.adam_beta1;
    h.adam_beta2 = cfg.adam_beta2;
    h.adam_eps = cfg.adam_eps;
    return h;
}

}  // namespace

Trainer::Trainer(TrainConfig cfg)
    : cfg_([&] {
          cfg.validate();
          return cfg;
      }()),
      env_(cfg_.rats, cfg_.qos, cfg_.env_cfg, rng::substream(cfg_.seed, 0xE0)),
      es_(make_dqn_hyper(cfg_), rng::substream(cfg_.seed, 0xE5)),
      rats_([&] {
          std::vector<ddpg::DdpgAgent> agents;
          agents.reserve(cfg_.rats.size());
          for (std::size_t l = 0; l < cfg_.rats.size(); ++l)
              agents.emplace_back(make_ddpg_hyper(cfg_), cfg_.rats[l].max_power_w,
                                  rng::substream(cfg_.seed, 0xDD, l));
          return agents;
      }()),
      assign_(cfg_.n_eds(), cfg_.n_rats()) {
    hist_.prev_rates_bps = env::Mat(cfg_.n_eds(), cfg_.n_rats());
    hist_.prev_ed_rate_bps.assign(cfg_.n_eds(), 0.0);
    rng::Stream init(rng::substream(cfg_.seed, 0xA0));
    init_assignment(init);
}

void Trainer::init_assignment(rng::Stream& rs) {
    // The first assignment is random (non-empty subset per ED), which keeps C1
    // complete before the ES has made any decision.
    const int n_actions = dqn::subset_action_count(cfg_.n_rats());
    for (int u = 0; u < cfg_.n_eds(); ++u) {
        const int a = int(rs.uniform_int(std::uint64_t(n_actions)));
        const auto subset = dqn::decode_subset(a, cfg_.n_rats());
        for (int l = 0; l < cfg_.n_rats(); ++l) assign_.at(u, l) = subset[l];
    }
}

void Trainer::reseed_environment(std::uint64_t seed) {
    env_ = env::Environment(cfg_.rats, cfg_.qos, cfg_.env_cfg, seed);
    hist_.prev_rates_bps = env::Mat(cfg_.n_eds(), cfg_.n_rats());
    hist_.prev_ed_rate_bps.assign(cfg_.n_eds(), 0.0);
    rng::Stream init(rng::substream(seed, 0xA0));
    init_assignment(init);
}

Trainer::StepStats Trainer::run_ed_step(int ed_1based, bool learning) {
    const int L = cfg_.n_rats();
    const int U = cfg_.n_eds();
    StepStats st;
    st.rat_rewards.assign(L, 0.0);
    st.rat_loss.assign(L, 0.0);

    // Stage 1: the ES picks a RAT subset for this ED (lines 6-12).
    const auto obs_es = dqn::encode_es_state(assign_, hist_, cfg_.qos, env_.norm(),
                                             ed_1based);
    const int action = learning ? es_.select_action(obs_es) : es_.greedy_action(obs_es);
    const auto subset = dqn::decode_subset(action, L);
    for (int l = 0; l < L; ++l) assign_.at(ed_1based - 1, l) = subset[l];

    if (cfg_.env_cfg.fading_cadence == env::FadingCadence::PerStep)
        env_.refresh_gains();

    // Stage 2: K inner DDPG iterations per RAT (lines 13-23). Actions come
    // strictly after the assignment broadcast; the ES reward comes after.
    env::NetworkSnapshot snapshot;
    for (int k = 0; k < cfg_.k_inner; ++k) {
        std::vector<std::vector<double>> obs(L), act_watt(L);
#pragma omp parallel for if (cfg_.parallel)
        for (int l = 0; l < L; ++l) {
            obs[l] = ddpg::encode_rat_state(assign_, hist_.prev_rates_bps,
                                            hist_.prev_ed_rate_bps, cfg_.qos,
                                            env_.norm(), l);
            act_watt[l] = rats_[l].act(obs[l], learning);
        }

        PowerAlloc powers(U, L);
        for (int l = 0; l < L; ++l)
            for (int u = 0; u < U; ++u) powers.at(u, l) = act_watt[l][u];

        snapshot = env_.apply(assign_, powers);

        std::vector<double> rewards(L), losses(L, 0.0);
        std::vector<std::uint8_t> has_loss(L, 0);
#pragma omp parallel for if (cfg_.parallel)
        for (int l = 0; l < L; ++l) {
            rewards[l] = ddpg::rat_reward(snapshot, l, cfg_.qos, env_.norm(),
                                          cfg_.rats[l].max_power_w, cfg_.eta1,
                                          cfg_.eta2, cfg_.zeta_l,
                                          cfg_.reward_normalized_rates);
            if (!learning) continue;
            auto obs2 = ddpg::encode_rat_state(assign_, snapshot.rates_bps,
                                               snapshot.ed_rate_bps, cfg_.qos,
                                               env_.norm(), l);
            ddpg::DdpgTransition tr;
            tr.s = obs[l];
            tr.a.resize(U);
            for (int u = 0; u < U; ++u)
                tr.a[u] = snapshot.powers_w.at(u, l) / cfg_.rats[l].max_power_w;
            tr.r = rewards[l];
            tr.s2 = std::move(obs2);
            rats_[l].store(std::move(tr));
            if (auto closs = rats_[l].critic_learn()) {
                losses[l] = *closs;
                has_loss[l] = 1;
            }
            rats_[l].actor_learn();
        }

        for (int l = 0; l < L; ++l) {
            st.rat_rewards[l] += rewards[l] / cfg_.k_inner;
            if (has_loss[l]) st.rat_loss[l] += losses[l] / cfg_.k_inner;
            if (!std::isfinite(rewards[l]) || !std::isfinite(losses[l])) {
                std::ostringstream oss;
                oss << "non-finite DDPG value at episode " << episodes_done_ + 1
                    << " ed " << ed_1based << " k " << k << " rat " << l + 1
                    << " reward " << rewards[l] << " critic loss " << losses[l];
                throw NumericError(oss.str());
            }
        }

        hist_.prev_rates_bps = snapshot.rates_bps;
        hist_.prev_ed_rate_bps = snapshot.ed_rate_bps;
        if (snapshot_observer_) snapshot_observer_(snapshot);
    }

    // ES reward from the resulting snapshot, transition store + learn
    // (lines 24-27).
    st.es_reward = dqn::es_reward(snapshot, cfg_.qos, env_.norm(), cfg_.eta_es,
                                  cfg_.zeta_es, cfg_.reward_normalized_rates,
                                  cfg_.es_hinge_slack);
    if (learning) {
        const int next_ed = ed_1based % U + 1;
        const auto obs2 = dqn::encode_es_state(assign_, hist_, cfg_.qos, env_.norm(),
                                               next_ed);
        es_.store({obs_es, action, st.es_reward, obs2});
        if (auto loss = es_.learn()) {
            st.es_loss = *loss;
            st.has_loss = true;
        }
    }
    if (!std::isfinite(st.es_reward) || !std::isfinite(st.es_loss)) {
        std::ostringstream oss;
        oss << "non-finite ES value at episode " << episodes_done_ + 1 << " ed "
            << ed_1based << " reward " << st.es_reward << " loss " << st.es_loss
            << " eps " << es_.epsilon();
        throw NumericError(oss.str());
    }

    st.utility = env::network_utility(assign_, snapshot);
    st.ed_rates = snapshot.ed_rate_bps;
    for (double r : snapshot.ed_rate_bps) st.sum_rate += r;
    for (int l = 0; l < L; ++l) {
        // Exact-budget allocations (e.g. equal split) sit at slack 0 up to
        // floating-point summation error.
        const double tol = 1e-9 * cfg_.rats[l].max_power_w;
        if (snapshot.constraints.c2_slack_w[l] < -tol) ++st.c2_viol;
    }
    st.qos_ok = true;
    for (double s : snapshot.constraints.c3_slack_bps) {
        if (s < 0.0) {
            ++st.c3_viol;
            st.qos_ok = false;
        }
    }
    return st;
}

EpisodeRecord Trainer::run_episode(bool learning) {
    const int U = cfg_.n_eds(), L = cfg_.n_rats();
    EpisodeRecord rec;
    rec.episode = episodes_done_ + 1;
    rec.epsilon = es_.epsilon();
    rec.rat_rewards.assign(L, 0.0);
    rec.rat_critic_loss.assign(L, 0.0);
    rec.ed_rate_bps.assign(U, 0.0);
    rec.steps = U;

    env_.advance_mobility();
    if (cfg_.env_cfg.fading_cadence != env::FadingCadence::PerStep)
        env_.refresh_gains();
    for (auto& agent : rats_) agent.reset_noise();

    int loss_steps = 0;
    for (int ed = 1; ed <= U; ++ed) {
        const auto st = run_ed_step(ed, learning);
        rec.es_reward += st.es_reward / U;
        if (st.has_loss) {
            rec.es_loss += st.es_loss;
            ++loss_steps;
        }
        rec.utility += st.utility / U;
        rec.sum_rate_bps += st.sum_rate / U;
        for (int l = 0; l < L; ++l) {
            rec.rat_rewards[l] += st.rat_rewards[l] / U;
            rec.rat_critic_loss[l] += st.rat_loss[l] / U;
        }
        for (int u = 0; u < U; ++u) rec.ed_rate_bps[u] += st.ed_rates[u] / U;
        rec.c2_violations += st.c2_viol;
        rec.c3_violations += st.c3_viol;
        if (st.qos_ok) ++rec.qos_ok_steps;
    }
    if (loss_steps > 0) rec.es_loss /= loss_steps;
    ++episodes_done_;
    return rec;
}

std::vector<EpisodeRecord> Trainer::train(int episodes) {
    std::vector<EpisodeRecord> records;
    records.reserve(episodes);
    for (int e = 0; e < episodes; ++e) {
        if (cfg_.shock_period > 0 && episodes_done_ > 0 &&
            episodes_done_ % cfg_.shock_period == 0) {
            // Boundary semantics: the shock lands before episode n*period + 1.
            env_.apply_shock();
        }
        records.push_back(run_episode(/*learning=*/true));
    }
    return records;
}

std::vector<EpisodeRecord> Trainer::evaluate(int episodes) {
    std::vector<EpisodeRecord> records;
    records.reserve(episodes);
    for (int e = 0; e < episodes; ++e) records.push_back(run_episode(/*learning=*/false));
    return records;
}

void Trainer::save_checkpoints(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    es_.save_checkpoint(dir + "/es_dqn.net");
    for (std::size_t l = 0; l < rats_.size(); ++l) {
        const std::string tag = "rat" + std::to_string(l + 1);
        rats_[l].save_checkpoint(dir + "/" + tag + "_actor.net",
                                 dir + "/" + tag + "_critic.net");
    }
}

void Trainer::save_state(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_checkpoints(dir);
    std::ofstream os(dir + "/state.bin", std::ios::binary);
    if (!os) throw std::runtime_error("cannot open state file in " + dir);
    os.write(reinterpret_cast<const char*>(&episodes_done_), sizeof(episodes_done_));
    os.write(reinterpret_cast<const char*>(assign_.x.data()),
             std::streamsize(assign_.x.size()));
    os.write(reinterpret_cast<const char*>(hist_.prev_rates_bps.v.data()),
             std::streamsize(hist_.prev_rates_bps.v.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(hist_.prev_ed_rate_bps.data()),
             std::streamsize(hist_.prev_ed_rate_bps.size() * sizeof(double)));
    env_.save(os);
    es_.save_state(os);
    for (const auto& agent : rats_) agent.save_state(os);
}

void Trainer::load_state(const std::string& dir) {
    std::ifstream is(dir + "/state.bin", std::ios::binary);
    if (!is) throw std::runtime_error("cannot open state file in " + dir);
    is.read(reinterpret_cast<char*>(&episodes_done_), sizeof(episodes_done_));
    is.read(reinterpret_cast<char*>(assign_.x.data()),
            std::streamsize(assign_.x.size()));
    is.read(reinterpret_cast<char*>(hist_.prev_rates_bps.v.data()),
            std::streamsize(hist_.prev_rates_bps.v.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(hist_.prev_ed_rate_bps.data()),
            std::streamsize(hist_.prev_ed_rate_bps.size() * sizeof(double)));
    env_.load(is);
    es_.load_state(is);
    for (auto& agent : rats_) agent.load_state(is);
    if (!is) throw std::runtime_error("truncated state file in " + dir);
}

MobilityResult run_mobility_scenario(const TrainConfig& cfg) {
    if (cfg.shock_period <= 0)
        throw std::invalid_argument("mobility scenario requires a positive shock period");
    MobilityResult res;
    Trainer trainer(cfg);
    res.records = trainer.train(cfg.episodes);

    // Smoothing restarts at each shock so a pre-shock plateau cannot leak into
    // the post-shock window through the trailing average.
    const auto raw = utility_series(res.records);
    const int n_segments = cfg.episodes / cfg.shock_period;
    for (int s = 0; s < n_segments; ++s) {
        const auto first = raw.begin() + std::size_t(s) * cfg.shock_period;
        std::vector<double> segment(first, first + cfg.shock_period);
        const auto smooth = moving_average(segment, cfg.smoothing_window);
        res.segment_convergence.push_back(detect_convergence(
            smooth, cfg.convergence_window, cfg.convergence_tol_frac));
    }
    return res;
}

}  // namespace deeprat::orchestrator
