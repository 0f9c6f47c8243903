#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "deeprat/env.hpp"
#include "deeprat/nn.hpp"
#include "deeprat/replay.hpp"

namespace deeprat::ddpg {

using env::Assignment;
using env::EdQosProfile;
using env::Mat;
using env::NetworkSnapshot;
using env::NormalizationSpec;

// Flattened per-RAT state, length 4U:
//   [ indicator U_l(t) | r_min/r_max | R_lu(t-1)/r_max masked by the current
//     indicator | R_u(t-1)/r_max ]
std::vector<double> encode_rat_state(const Assignment& assign, const Mat& prev_rates_bps,
                                     const std::vector<double>& prev_ed_rate_bps,
                                     const std::vector<EdQosProfile>& qos,
                                     const NormalizationSpec& norm, int rat_index);

int rat_state_dim(int n_eds);

// Discrete Ornstein-Uhlenbeck process: x <- x + theta (mu - x) + sigma N(0,1).
struct OuNoise {
    double theta = 0.15, sigma = 0.03, mu = 0.0;
    std::vector<double> value;

    OuNoise() = default;
    OuNoise(int dim, double theta, double sigma) : theta(theta), sigma(sigma),
                                                   value(dim, 0.0) {}
    void reset() { std::fill(value.begin(), value.end(), 0.0); }
    const std::vector<double>& step(rng::Stream& rs);
};

// r_l = eta1 (P^max - sum p)/P^max + eta2 sum_{u in U_l} (R_u - R_u^min)
//     + zeta sum_{u in U_l} U_lu, rates normalized by r_max.
double rat_reward(const NetworkSnapshot& snap, int rat_index,
                  const std::vector<EdQosProfile>& qos, const NormalizationSpec& norm,
                  double p_max_w, double eta1, double eta2, double zeta,
                  bool normalized_rates = true);

struct DdpgHyper {
    int state_dim = 0;
    int action_dim = 0;
    int hidden1 = 16, hidden2 = 16;
    double actor_lr = 5e-4, critic_lr = 5e-4;
    double gamma = 0.99;
    std::size_t buffer_capacity = 500;
    int batch = 16;
    double ou_theta = 0.15, ou_sigma = 0.03;
    double tau = 0.005;
    double grad_clip = 1.0;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
};

// Actions are stored and fed to the critic in normalized units (Watt / P_max).
struct DdpgTransition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s2;
};

class DdpgAgent {
public:
    DdpgAgent(const DdpgHyper& hyper, double p_max_w, std::uint64_t seed);

    // P_max * logistic(actor(s)) plus OU noise in the Watt domain when
    // exploring, clamped to [0, P_max]; entries with a zero assignment
    // indicator (obs[0..U)) are forced to 0. Returns Watt.
    std::vector<double> act(const std::vector<double>& obs, bool explore);
    // Noiseless deterministic action; touches no agent state.
    std::vector<double> act_greedy(const std::vector<double>& obs) const;

    void reset_noise() { noise_.reset(); }
    void store(DdpgTransition t) { buffer_.push(std::move(t)); }

    // y = r + gamma Q'(s2, mu'(s2)); one Adam step on the critic.
    std::optional<double> critic_learn();
    // Ascent on mean_i Q(s_i, mu(s_i)) via critic input gradients, then soft
    // target updates. Returns the objective estimate.
    std::optional<double> actor_learn();

    double p_max() const { return p_max_w_; }
    const DdpgHyper& hyper() const { return hyper_; }
    const nn::DenseNet& actor() const { return actor_; }
    const nn::DenseNet& critic() const { return critic_; }
    const nn::DenseNet& actor_target() const { return actor_target_; }
    const nn::DenseNet& critic_target() const { return critic_target_; }
    std::size_t buffer_size() const { return buffer_.size(); }

    void save_checkpoint(const std::string& actor_path,
                         const std::string& critic_path) const;
    void save_state(std::ostream& os) const;
    void load_state(std::istream& is);

private:
    std::vector<double> policy_action_norm(const nn::DenseNet& actor,
                                           const std::vector<double>& s) const;

    DdpgHyper hyper_;
    double p_max_w_ = 1.0;
    nn::DenseNet actor_, critic_, actor_target_, critic_target_;
    nn::AdamState actor_adam_, critic_adam_;
    nn::ReplayBuffer<DdpgTransition> buffer_;
    OuNoise noise_;
    rng::Stream rng_;
};

}  // namespace deeprat::ddpg
