#include "deeprat/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace deeprat::nn {

namespace {

constexpr char kMagic[16] = {'D', 'E', 'E', 'P', 'R', 'A', 'T', '-',
                             'N', 'E', 'T', '-', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void check_shapes(const DenseNet& a, const DenseNet& b) {
    if (a.widths != b.widths)
        throw std::invalid_argument("network architecture mismatch");
}

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated network file");
    return v;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             std::streamsize(v.size() * sizeof(double)));
}

void read_doubles(std::istream& is, std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            std::streamsize(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated network file");
}

}  // namespace

std::size_t DenseNet::n_params() const {
    std::size_t n = 0;
    for (int i = 0; i < n_layers(); ++i) n += w[i].size() + b[i].size();
    return n;
}

DenseNet make_net(const std::vector<int>& widths, OutputActivation out_act,
                  rng::Stream& rs) {
    if (widths.size() < 2) throw std::invalid_argument("net needs >= 2 widths");
    DenseNet net;
    net.widths = widths;
    net.out_act = out_act;
    net.w.resize(net.n_layers());
    net.b.resize(net.n_layers());
    for (int i = 0; i < net.n_layers(); ++i) {
        const int fan_in = widths[i], fan_out = widths[i + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        net.w[i].resize(std::size_t(fan_out) * fan_in);
        for (auto& x : net.w[i]) x = rs.uniform(-limit, limit);
        net.b[i].assign(fan_out, 0.0);
    }
    return net;
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input,
                            ForwardCache& cache) {
    if (int(input.size()) != net.in_dim())
        throw std::invalid_argument("forward: input width mismatch");
    cache.input = input;
    cache.pre.assign(net.n_layers(), {});
    cache.act.assign(net.n_layers(), {});

    const std::vector<double>* x = &cache.input;
    for (int layer = 0; layer < net.n_layers(); ++layer) {
        const int in = net.widths[layer], out = net.widths[layer + 1];
        auto& pre = cache.pre[layer];
        auto& act = cache.act[layer];
        pre.resize(out);
        act.resize(out);
        const double* wp = net.w[layer].data();
        for (int o = 0; o < out; ++o) {
            double s = net.b[layer][o];
            const double* row = wp + std::size_t(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * (*x)[i];
            pre[o] = s;
        }
        const bool last = layer == net.n_layers() - 1;
        if (!last) {
            for (int o = 0; o < out; ++o) act[o] = pre[o] > 0.0 ? pre[o] : 0.0;
        } else if (net.out_act == OutputActivation::Logistic) {
            for (int o = 0; o < out; ++o) act[o] = logistic(pre[o]);
        } else {
            act = pre;
        }
        x = &act;
    }
    return cache.act.back();
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& input) {
    ForwardCache cache;
    return forward(net, input, cache);
}

Grads zero_grads(const DenseNet& net) {
    Grads g;
    g.w.resize(net.n_layers());
    g.b.resize(net.n_layers());
    for (int i = 0; i < net.n_layers(); ++i) {
        g.w[i].assign(net.w[i].size(), 0.0);
        g.b[i].assign(net.b[i].size(), 0.0);
    }
    return g;
}

void accumulate(Grads& into, const Grads& from) {
    for (std::size_t i = 0; i < into.w.size(); ++i) {
        for (std::size_t j = 0; j < into.w[i].size(); ++j) into.w[i][j] += from.w[i][j];
        for (std::size_t j = 0; j < into.b[i].size(); ++j) into.b[i][j] += from.b[i][j];
    }
}

void scale(Grads& g, double s) {
    for (auto& layer : g.w)
        for (auto& x : layer) x *= s;
    for (auto& layer : g.b)
        for (auto& x : layer) x *= s;
}

double global_norm(const Grads& g) {
    double sq = 0.0;
    for (const auto& layer : g.w)
        for (double x : layer) sq += x * x;
    for (const auto& layer : g.b)
        for (double x : layer) sq += x * x;
    return std::sqrt(sq);
}

void clip_global_norm(Grads& g, double max_norm) {
    if (max_norm <= 0.0) return;
    const double n = global_norm(g);
    if (n > max_norm) scale(g, max_norm / n);
}

std::vector<double> backward(const DenseNet& net, const ForwardCache& cache,
                             const std::vector<double>& dloss_dout, Grads& grads) {
    const int L = net.n_layers();
    if (int(dloss_dout.size()) != net.out_dim())
        throw std::invalid_argument("backward: output gradient width mismatch");

    // Gradient w.r.t. the current layer's pre-activation.
    std::vector<double> delta(dloss_dout);
    if (net.out_act == OutputActivation::Logistic) {
        const auto& y = cache.act[L - 1];
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= y[i] * (1.0 - y[i]);
    }

    std::vector<double> prev;
    for (int layer = L - 1; layer >= 0; --layer) {
        const int in = net.widths[layer], out = net.widths[layer + 1];
        const std::vector<double>& below =
            layer == 0 ? cache.input : cache.act[layer - 1];

        double* gw = grads.w[layer].data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            grads.b[layer][o] += d;
            double* row = gw + std::size_t(o) * in;
            for (int i = 0; i < in; ++i) row[i] += d * below[i];
        }

        prev.assign(in, 0.0);
        const double* wp = net.w[layer].data();
        for (int o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* row = wp + std::size_t(o) * in;
            for (int i = 0; i < in; ++i) prev[i] += d * row[i];
        }
        if (layer > 0) {
            const auto& pre_below = cache.pre[layer - 1];
            for (int i = 0; i < in; ++i)
                if (pre_below[i] <= 0.0) prev[i] = 0.0;
        }
        delta.swap(prev);
    }
    return delta;  // dL/dinput
}

AdamState make_adam(const DenseNet& net, double lr, double beta1, double beta2,
                    double eps) {
    AdamState st;
    st.lr = lr;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.eps = eps;
    st.m_w.resize(net.n_layers());
    st.v_w.resize(net.n_layers());
    st.m_b.resize(net.n_layers());
    st.v_b.resize(net.n_layers());
    for (int i = 0; i < net.n_layers(); ++i) {
        st.m_w[i].assign(net.w[i].size(), 0.0);
        st.v_w[i].assign(net.w[i].size(), 0.0);
        st.m_b[i].assign(net.b[i].size(), 0.0);
        st.v_b[i].assign(net.b[i].size(), 0.0);
    }
    return st;
}

void adam_step(DenseNet& net, const Grads& grads, AdamState& st) {
    ++st.t;
    const double bc1 = 1.0 - std::pow(st.beta1, double(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, double(st.t));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
            v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
        }
    };
    for (int layer = 0; layer < net.n_layers(); ++layer) {
        update(net.w[layer], grads.w[layer], st.m_w[layer], st.v_w[layer]);
        update(net.b[layer], grads.b[layer], st.m_b[layer], st.v_b[layer]);
    }
}

void soft_update(DenseNet& target, const DenseNet& main, double tau) {
    check_shapes(target, main);
    for (int i = 0; i < target.n_layers(); ++i) {
        for (std::size_t j = 0; j < target.w[i].size(); ++j)
            target.w[i][j] = tau * main.w[i][j] + (1.0 - tau) * target.w[i][j];
        for (std::size_t j = 0; j < target.b[i].size(); ++j)
            target.b[i][j] = tau * main.b[i][j] + (1.0 - tau) * target.b[i][j];
    }
}

void hard_update(DenseNet& target, const DenseNet& main) {
    check_shapes(target, main);
    target.w = main.w;
    target.b = main.b;
}

void save_checkpoint(const DenseNet& net, std::ostream& os) {
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    write_pod(os, std::uint32_t(net.widths.size()));
    for (int w : net.widths) write_pod(os, std::int32_t(w));
    for (int i = 0; i < net.n_layers(); ++i) {
        write_doubles(os, net.w[i]);
        write_doubles(os, net.b[i]);
    }
}

void save_checkpoint(const DenseNet& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint file " + path);
    save_checkpoint(net, os);
}

DenseNet load_checkpoint(std::istream& is, OutputActivation out_act) {
    char magic[16];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("bad checkpoint magic");
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
    const auto n_widths = read_pod<std::uint32_t>(is);
    if (n_widths < 2 || n_widths > 64) throw std::runtime_error("bad checkpoint widths");
    std::vector<int> widths(n_widths);
    for (auto& w : widths) {
        w = read_pod<std::int32_t>(is);
        if (w <= 0) throw std::runtime_error("bad checkpoint layer width");
    }
    DenseNet net;
    net.widths = widths;
    net.out_act = out_act;
    net.w.resize(net.n_layers());
    net.b.resize(net.n_layers());
    for (int i = 0; i < net.n_layers(); ++i) {
        net.w[i].resize(std::size_t(widths[i + 1]) * widths[i]);
        net.b[i].resize(widths[i + 1]);
        read_doubles(is, net.w[i]);
        read_doubles(is, net.b[i]);
    }
    return net;
}

DenseNet load_checkpoint(const std::string& path, OutputActivation out_act) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint file " + path);
    return load_checkpoint(is, out_act);
}

void save_state(const DenseNet& net, std::ostream& os) { save_checkpoint(net, os); }

void load_state(DenseNet& net, std::istream& is) {
    net = load_checkpoint(is, net.out_act);
}

void save_state(const AdamState& st, std::ostream& os) {
    write_pod(os, st.t);
    for (const auto& v : st.m_w) write_doubles(os, v);
    for (const auto& v : st.v_w) write_doubles(os, v);
    for (const auto& v : st.m_b) write_doubles(os, v);
    for (const auto& v : st.v_b) write_doubles(os, v);
}

void load_state(AdamState& st, std::istream& is) {
    st.t = read_pod<long long>(is);
    for (auto& v : st.m_w) read_doubles(is, v);
    for (auto& v : st.v_w) read_doubles(is, v);
    for (auto& v : st.m_b) read_doubles(is, v);
    for (auto& v : st.v_b) read_doubles(is, v);
}

}  // namespace deeprat::nn
