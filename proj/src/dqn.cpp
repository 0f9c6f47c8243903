#include "deeprat/dqn.hpp"

#include <cmath>
#include <stdexcept>

namespace deeprat::dqn {

int es_state_dim(int n_eds, int n_rats) { return 2 * n_eds * n_rats + n_eds + 3; }

std::vector<double> encode_es_state(const Assignment& prev_assign,
                                    const EsHistory& hist,
                                    const std::vector<EdQosProfile>& qos,
                                    const NormalizationSpec& norm,
                                    int ed_index_1based) {
    const int U = prev_assign.n_eds, L = prev_assign.n_rats;
    if (ed_index_1based < 1 || ed_index_1based > U)
        throw std::invalid_argument("encode_es_state: ed index out of range");
    const double r_max = norm.r_max_bps;

    std::vector<double> s;
    s.reserve(std::size_t(es_state_dim(U, L)));
    for (int u = 0; u < U; ++u)
        for (int l = 0; l < L; ++l) s.push_back(double(prev_assign.at(u, l)));
    for (int u = 0; u < U; ++u)
        for (int l = 0; l < L; ++l) s.push_back(hist.prev_rates_bps.at(u, l) / r_max);
    for (int u = 0; u < U; ++u) s.push_back(qos[u].r_min_bps / r_max);

    const int u0 = ed_index_1based - 1;
    s.push_back(double(ed_index_1based) / double(U));
    s.push_back(qos[u0].r_min_bps / r_max);
    s.push_back(hist.prev_ed_rate_bps[u0] / r_max);
    return s;
}

std::vector<std::uint8_t> decode_subset(int action_index, int n_rats) {
    const int id = action_index + 1;
    if (action_index < 0 || id >= (1 << n_rats))
        throw std::invalid_argument("subset action index out of range");
    std::vector<std::uint8_t> subset(n_rats);
    for (int l = 0; l < n_rats; ++l) subset[l] = (id >> l) & 1;
    return subset;
}

int subset_action_count(int n_rats) { return (1 << n_rats) - 1; }

double EpsilonSchedule::value() const {
    return end + (start - end) * std::exp(-decay * double(t));
}

double es_reward(const NetworkSnapshot& snap, const std::vector<EdQosProfile>& qos,
                 const NormalizationSpec& norm, double eta, double zeta,
                 bool normalized_rates, bool hinge_slack) {
    const double scale = normalized_rates ? 1.0 / norm.r_max_bps : 1.0;
    double slack = 0.0;
    for (std::size_t u = 0; u < qos.size(); ++u) {
        const double s = (snap.ed_rate_bps[u] - qos[u].r_min_bps) * scale;
        slack += hinge_slack ? std::min(0.0, s) : s;
    }
    return eta * slack + zeta * env::network_utility(snap.assign, snap);
}

DqnAgent::DqnAgent(const DqnHyper& hyper, std::uint64_t seed)
    : hyper_(hyper),
      online_([&] {
          rng::Stream init(rng::substream(seed, 0x01));
          return nn::make_net({hyper.state_dim, hyper.hidden1, hyper.hidden2,
                               hyper.n_actions},
                              nn::OutputActivation::Linear, init);
      }()),
      target_(online_),
      adam_(nn::make_adam(online_, hyper.lr, hyper.adam_beta1, hyper.adam_beta2,
                          hyper.adam_eps)),
      buffer_(hyper.buffer_capacity),
      rng_(rng::substream(seed, 0x02)) {}

int DqnAgent::greedy_action(const std::vector<double>& obs) const {
    const auto q = nn::forward(online_, obs);
    int best = 0;
    for (int a = 1; a < int(q.size()); ++a)
        if (q[a] > q[best]) best = a;  // ties keep the lowest index
    return best;
}

int DqnAgent::select_action(const std::vector<double>& obs) {
    const double eps = hyper_.eps.value();
    hyper_.eps.advance();
    if (rng_.uniform01() < eps)
        return int(rng_.uniform_int(std::uint64_t(hyper_.n_actions)));
    return greedy_action(obs);
}

std::optional<double> DqnAgent::learn() {
    if (buffer_.size() < std::size_t(hyper_.batch)) return std::nullopt;
    const auto idx = buffer_.sample_indices(std::size_t(hyper_.batch), rng_);
    const double inv_n = 1.0 / double(hyper_.batch);

    auto grads = nn::zero_grads(online_);
    double loss = 0.0;
    for (const auto i : idx) {
        const auto& tr = buffer_.at(i);
        const auto q_next = nn::forward(target_, tr.s2);
        double best = q_next[0];
        for (double v : q_next) best = std::max(best, v);
        const double y = tr.r + hyper_.gamma * best;

        nn::ForwardCache cache;
        const auto q = nn::forward(online_, tr.s, cache);
        const double td = q[tr.action] - y;
        loss += td * td * inv_n;

        std::vector<double> dout(q.size(), 0.0);
        dout[tr.action] = 2.0 * td * inv_n;
        nn::backward(online_, cache, dout, grads);
    }
    nn::clip_global_norm(grads, hyper_.grad_clip);
    nn::adam_step(online_, grads, adam_);

    ++learn_steps_;
    if (hyper_.target_sync_steps > 0 && learn_steps_ % hyper_.target_sync_steps == 0)
        nn::hard_update(target_, online_);
    return loss;
}

void DqnAgent::save_checkpoint(const std::string& path) const {
    nn::save_checkpoint(online_, path);
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

void DqnAgent::save_state(std::ostream& os) const {
    nn::save_state(online_, os);
    nn::save_state(target_, os);
    nn::save_state(adam_, os);
    write_pod(os, learn_steps_);
    write_pod(os, hyper_.eps.t);
    write_pod(os, std::uint64_t(buffer_.size()));
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const auto& tr = buffer_.at(i);
        write_vec(os, tr.s);
        write_pod(os, tr.action);
        write_pod(os, tr.r);
        write_vec(os, tr.s2);
    }
    os << '\n';
    rng_.save(os);
    os << '\n';
}

void DqnAgent::load_state(std::istream& is) {
    nn::load_state(online_, is);
    nn::load_state(target_, is);
    nn::load_state(adam_, is);
    learn_steps_ = read_pod<long long>(is);
    hyper_.eps.t = read_pod<long long>(is);
    const auto n = read_pod<std::uint64_t>(is);
    buffer_ = nn::ReplayBuffer<DqnTransition>(hyper_.buffer_capacity);
    for (std::uint64_t i = 0; i < n; ++i) {
        DqnTransition tr;
        tr.s = read_vec(is);
        tr.action = read_pod<int>(is);
        tr.r = read_pod<double>(is);
        tr.s2 = read_vec(is);
        buffer_.push(std::move(tr));
    }
    is.ignore(1);
    rng_.load(is);
    is.ignore(1);
}

}  // namespace deeprat::dqn
