#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "deeprat/env.hpp"
#include "deeprat/nn.hpp"
#include "deeprat/replay.hpp"

namespace deeprat::dqn {

using env::Assignment;
using env::EdQosProfile;
using env::Mat;
using env::NetworkSnapshot;
using env::NormalizationSpec;

// History the ES observation is built from; all (t-1) quantities are zero at
// the start of the first episode and persist across episodes afterwards.
struct EsHistory {
    Mat prev_rates_bps;                 // R_lu(t-1)
    std::vector<double> prev_ed_rate_bps;  // R_u(t-1)
};

// Flattened ES state, length 2UL + U + 3:
//   [ x(t-1) row-major UL | R_lu(t-1)/r_max row-major UL | r_min/r_max U |
//     u/U | r_min_u/r_max | R_u(t-1)/r_max ]
std::vector<double> encode_es_state(const Assignment& prev_assign,
                                    const EsHistory& hist,
                                    const std::vector<EdQosProfile>& qos,
                                    const NormalizationSpec& norm,
                                    int ed_index_1based);

int es_state_dim(int n_eds, int n_rats);

// Action index a in [0, 2^L - 2] maps to subset id a+1; bit l of the id
// assigns RAT l. The empty subset is unrepresentable, enforcing C1.
std::vector<std::uint8_t> decode_subset(int action_index, int n_rats);
int subset_action_count(int n_rats);

// eps(t) = end + (start - end) * exp(-decay * t).
struct EpsilonSchedule {
    double start = 1.0, end = 0.005, decay = 5e-4;
    long long t = 0;

    double value() const;
    void advance() { ++t; }
};

// r_ES = eta * sum_u slack_u + zeta * sum x U with rates normalized by r_max
// when normalized_rates is set. With hinge_slack (the default) only violated
// EDs contribute, min(0, R_u - R_u^min): the constraint term is a punishment
// and the utility term carries the steady-state signal. hinge_slack = false
// keeps the signed sum.
double es_reward(const NetworkSnapshot& snap, const std::vector<EdQosProfile>& qos,
                 const NormalizationSpec& norm, double eta, double zeta,
                 bool normalized_rates = true, bool hinge_slack = true);

struct DqnHyper {
    int state_dim = 0;
    int n_actions = 0;
    int hidden1 = 256, hidden2 = 128;
    double lr = 8e-4;
    double gamma = 0.99;
    std::size_t buffer_capacity = 1000;
    int batch = 64;
    EpsilonSchedule eps;
    int target_sync_steps = 100;
    double grad_clip = 1.0;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
};

struct DqnTransition {
    std::vector<double> s;
    int action = 0;
    double r = 0.0;
    std::vector<double> s2;
};

class DqnAgent {
public:
    DqnAgent(const DqnHyper& hyper, std::uint64_t seed);

    // eps-greedy over the valid actions; advances the schedule by one step.
    int select_action(const std::vector<double>& obs);
    // Greedy action, ties broken toward the lowest index. Never advances eps.
    int greedy_action(const std::vector<double>& obs) const;

    void store(DqnTransition t) { buffer_.push(std::move(t)); }

    // One Bellman-target Adam step on a uniform minibatch; nullopt while the
    // buffer holds fewer than `batch` transitions.
    std::optional<double> learn();

    double epsilon() const { return hyper_.eps.value(); }
    const DqnHyper& hyper() const { return hyper_; }
    const nn::DenseNet& online() const { return online_; }
    const nn::DenseNet& target() const { return target_; }
    long long learn_steps() const { return learn_steps_; }
    std::size_t buffer_size() const { return buffer_.size(); }

    void save_checkpoint(const std::string& path) const;
    void save_state(std::ostream& os) const;
    void load_state(std::istream& is);

private:
    DqnHyper hyper_;
    nn::DenseNet online_, target_;
    nn::AdamState adam_;
    nn::ReplayBuffer<DqnTransition> buffer_;
    rng::Stream rng_;
    long long learn_steps_ = 0;
};

}  // namespace deeprat::dqn
