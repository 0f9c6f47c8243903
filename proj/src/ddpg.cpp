#include "deeprat/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprat::ddpg {

int rat_state_dim(int n_eds) { return 4 * n_eds; }

std::vector<double> encode_rat_state(const Assignment& assign, const Mat& prev_rates_bps,
                                     const std::vector<double>& prev_ed_rate_bps,
                                     const std::vector<EdQosProfile>& qos,
                                     const NormalizationSpec& norm, int rat_index) {
    const int U = assign.n_eds;
    if (rat_index < 0 || rat_index >= assign.n_rats)
        throw std::invalid_argument("encode_rat_state: rat index out of range");
    const double r_max = norm.r_max_bps;

    std::vector<double> s;
    s.reserve(std::size_t(rat_state_dim(U)));
    for (int u = 0; u < U; ++u) s.push_back(double(assign.at(u, rat_index)));
    for (int u = 0; u < U; ++u) s.push_back(qos[u].r_min_bps / r_max);
    for (int u = 0; u < U; ++u)
        s.push_back(assign.at(u, rat_index)
                        ? prev_rates_bps.at(u, rat_index) / r_max
                        : 0.0);
    for (int u = 0; u < U; ++u) s.push_back(prev_ed_rate_bps[u] / r_max);
    return s;
}

const std::vector<double>& OuNoise::step(rng::Stream& rs) {
    for (auto& x : value) x += theta * (mu - x) + sigma * rs.normal();
    return value;
}

double rat_reward(const NetworkSnapshot& snap, int rat_index,
                  const std::vector<EdQosProfile>& qos, const NormalizationSpec& norm,
                  double p_max_w, double eta1, double eta2, double zeta,
                  bool normalized_rates) {
    const int U = snap.assign.n_eds;
    const double rate_scale = normalized_rates ? 1.0 / norm.r_max_bps : 1.0;

    double power_sum = 0.0, slack = 0.0, utility = 0.0;
    for (int u = 0; u < U; ++u) {
        if (!snap.assign.at(u, rat_index)) continue;
        power_sum += snap.powers_w.at(u, rat_index);
        slack += (snap.ed_rate_bps[u] - qos[u].r_min_bps) * rate_scale;
        utility += snap.utilities.at(u, rat_index);
    }
    return eta1 * (p_max_w - power_sum) / p_max_w + eta2 * slack + zeta * utility;
}

DdpgAgent::DdpgAgent(const DdpgHyper& hyper, double p_max_w, std::uint64_t seed)
    : hyper_(hyper), p_max_w_(p_max_w),
      actor_([&] {
          rng::Stream init(rng::substream(seed, 0x11));
          return nn::make_net({hyper.state_dim, hyper.hidden1, hyper.hidden2,
                               hyper.action_dim},
                              nn::OutputActivation::Logistic, init);
      }()),
      critic_([&] {
          rng::Stream init(rng::substream(seed, 0x12));
          return nn::make_net({hyper.state_dim + hyper.action_dim, hyper.hidden1,
                               hyper.hidden2, 1},
                              nn::OutputActivation::Linear, init);
      }()),
      actor_target_(actor_), critic_target_(critic_),
      actor_adam_(nn::make_adam(actor_, hyper.actor_lr, hyper.adam_beta1,
                                hyper.adam_beta2, hyper.adam_eps)),
      critic_adam_(nn::make_adam(critic_, hyper.critic_lr, hyper.adam_beta1,
                                 hyper.adam_beta2, hyper.adam_eps)),
      buffer_(hyper.buffer_capacity),
      noise_(hyper.action_dim, hyper.ou_theta, hyper.ou_sigma),
      rng_(rng::substream(seed, 0x13)) {}

std::vector<double> DdpgAgent::policy_action_norm(const nn::DenseNet& actor,
                                                  const std::vector<double>& s) const {
    auto a = nn::forward(actor, s);  // logistic output in (0,1)
    for (int u = 0; u < hyper_.action_dim; ++u)
        if (s[u] == 0.0) a[u] = 0.0;  // unassigned EDs get no power
    return a;
}

std::vector<double> DdpgAgent::act(const std::vector<double>& obs, bool explore) {
    auto a = nn::forward(actor_, obs);
    const std::vector<double>* n = nullptr;
    if (explore) n = &noise_.step(rng_);
    std::vector<double> watt(hyper_.action_dim);
    for (int u = 0; u < hyper_.action_dim; ++u) {
        double p = p_max_w_ * a[u];
        if (n) p += p_max_w_ * (*n)[u];
        p = std::clamp(p, 0.0, p_max_w_);
        watt[u] = obs[u] == 0.0 ? 0.0 : p;
    }
    return watt;
}

std::vector<double> DdpgAgent::act_greedy(const std::vector<double>& obs) const {
    const auto a = policy_action_norm(actor_, obs);
    std::vector<double> watt(hyper_.action_dim);
    for (int u = 0; u < hyper_.action_dim; ++u)
        watt[u] = std::clamp(p_max_w_ * a[u], 0.0, p_max_w_);
    return watt;
}

std::optional<double> DdpgAgent::critic_learn() {
    if (buffer_.size() < std::size_t(hyper_.batch)) return std::nullopt;
    const auto idx = buffer_.sample_indices(std::size_t(hyper_.batch), rng_);
    const double inv_n = 1.0 / double(hyper_.batch);

    auto grads = nn::zero_grads(critic_);
    double loss = 0.0;
    for (const auto i : idx) {
        const auto& tr = buffer_.at(i);
        auto a2 = policy_action_norm(actor_target_, tr.s2);
        std::vector<double> in2(tr.s2);
        in2.insert(in2.end(), a2.begin(), a2.end());
        const double y = tr.r + hyper_.gamma * nn::forward(critic_target_, in2)[0];

        std::vector<double> in(tr.s);
        in.insert(in.end(), tr.a.begin(), tr.a.end());
        nn::ForwardCache cache;
        const double q = nn::forward(critic_, in, cache)[0];
        const double td = q - y;
        loss += td * td * inv_n;
        nn::backward(critic_, cache, {2.0 * td * inv_n}, grads);
    }
    nn::clip_global_norm(grads, hyper_.grad_clip);
    nn::adam_step(critic_, grads, critic_adam_);
    return loss;
}

std::optional<double> DdpgAgent::actor_learn() {
    if (buffer_.size() < std::size_t(hyper_.batch)) return std::nullopt;
    const auto idx = buffer_.sample_indices(std::size_t(hyper_.batch), rng_);
    const double inv_n = 1.0 / double(hyper_.batch);
    const int S = hyper_.state_dim;

    auto actor_grads = nn::zero_grads(actor_);
    auto critic_scratch = nn::zero_grads(critic_);  // discarded
    double objective = 0.0;
    for (const auto i : idx) {
        const auto& tr = buffer_.at(i);

        nn::ForwardCache actor_cache;
        auto a = nn::forward(actor_, tr.s, actor_cache);
        for (int u = 0; u < hyper_.action_dim; ++u)
            if (tr.s[u] == 0.0) a[u] = 0.0;

        std::vector<double> in(tr.s);
        in.insert(in.end(), a.begin(), a.end());
        nn::ForwardCache critic_cache;
        objective += nn::forward(critic_, in, critic_cache)[0] * inv_n;

        // dQ/da through the critic input, chained into the actor. Ascent, so
        // the accumulated gradient is negated.
        const auto din = nn::backward(critic_, critic_cache, {1.0}, critic_scratch);
        std::vector<double> dout(hyper_.action_dim);
        for (int u = 0; u < hyper_.action_dim; ++u)
            dout[u] = tr.s[u] == 0.0 ? 0.0 : -din[S + u] * inv_n;
        nn::backward(actor_, actor_cache, dout, actor_grads);
    }
    nn::clip_global_norm(actor_grads, hyper_.grad_clip);
    nn::adam_step(actor_, actor_grads, actor_adam_);

    nn::soft_update(actor_target_, actor_, hyper_.tau);
    nn::soft_update(critic_target_, critic_, hyper_.tau);
    return objective;
}

void DdpgAgent::save_checkpoint(const std::string& actor_path,
                                const std::string& critic_path) const {
    nn::save_checkpoint(actor_, actor_path);
    nn::save_checkpoint(critic_, critic_path);
}

namespace {
template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated agent state");
    return v;
}
void write_vec(std::ostream& os, const std::vector<double>& v) {
    write_pod(os, std::uint64_t(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             std::streamsize(v.size() * sizeof(double)));
}
std::vector<double> read_vec(std::istream& is) {
    const auto n = read_pod<std::uint64_t>(is);
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
    if (!is) throw std::runtime_error("truncated agent state");
    return v;
}
}  // namespace

void DdpgAgent::save_state(std::ostream& os) const {
    nn::save_state(actor_, os);
    nn::save_state(critic_, os);
    nn::save_state(actor_target_, os);
    nn::save_state(critic_target_, os);
    nn::save_state(actor_adam_, os);
    nn::save_state(critic_adam_, os);
    write_vec(os, noise_.value);
    write_pod(os, std::uint64_t(buffer_.size()));
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const auto& tr = buffer_.at(i);
        write_vec(os, tr.s);
        write_vec(os, tr.a);
        write_pod(os, tr.r);
        write_vec(os, tr.s2);
    }
    os << '\n';
    rng_.save(os);
    os << '\n';
}

void DdpgAgent::load_state(std::istream& is) {
    nn::load_state(actor_, is);
    nn::load_state(critic_, is);
    nn::load_state(actor_target_, is);
    nn::load_state(critic_target_, is);
    nn::load_state(actor_adam_, is);
    nn::load_state(critic_adam_, is);
    noise_.value = read_vec(is);
    const auto n = read_pod<std::uint64_t>(is);
    buffer_ = nn::ReplayBuffer<DdpgTransition>(hyper_.buffer_capacity);
    for (std::uint64_t i = 0; i < n; ++i) {
        DdpgTransition tr;
        tr.s = read_vec(is);
        tr.a = read_vec(is);
        tr.r = read_pod<double>(is);
        tr.s2 = read_vec(is);
        buffer_.push(std::move(tr));
    }
    is.ignore(1);
    rng_.load(is);
    is.ignore(1);
}

}  // namespace deeprat::ddpg
