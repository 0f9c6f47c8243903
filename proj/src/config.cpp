#include "deeprat/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace deeprat::harness {

using channel::ChannelModel;
using orchestrator::TrainConfig;

namespace {

constexpr double kKmhToMps = 1.0 / 3.6;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct KeyValue {
    std::string value;
    int line = 0;
};

class Parser {
public:
    Parser(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                fail(lineno, "expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) fail(lineno, "empty key");
            if (value.empty()) fail(lineno, "empty value for key '" + key + "'");
            if (!entries_.emplace(key, KeyValue{value, lineno}).second)
                fail(lineno, "duplicate key '" + key + "'");
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
        const auto it = entries_.find(key);
        const int line = it == entries_.end() ? 0 : it->second.line;
        fail(line, "key '" + key + "': " + msg);
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string require_string(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError(origin_ + ": missing required key '" + key + "'");
        const std::string v = it->second.value;
        consumed_.emplace(key, it->second);
        entries_.erase(it);
        return v;
    }

    double require_double(const std::string& key) {
        const std::string v = require_string(key);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            if (!std::isfinite(x)) throw std::invalid_argument("not finite");
            return x;
        } catch (const std::exception& e) {
            entries_.emplace(key, consumed_.at(key));
            fail_key(key, "bad number '" + v + "' (" + e.what() + ")");
        }
    }

    int require_int(const std::string& key) {
        const double x = require_double(key);
        const int i = int(std::llround(x));
        if (double(i) != x) {
            entries_.emplace(key, consumed_.at(key));
            fail_key(key, "expected an integer");
        }
        return i;
    }

    bool require_bool(const std::string& key) {
        const std::string v = require_string(key);
        if (v == "true") return true;
        if (v == "false") return false;
        entries_.emplace(key, consumed_.at(key));
        fail_key(key, "expected true or false");
    }

    double optional_double(const std::string& key, double def) {
        return has(key) ? require_double(key) : def;
    }
    int optional_int(const std::string& key, int def) {
        return has(key) ? require_int(key) : def;
    }
    bool optional_bool(const std::string& key, bool def) {
        return has(key) ? require_bool(key) : def;
    }

    void finish() const {
        if (entries_.empty()) return;
        const auto& [key, kv] = *entries_.begin();
        fail(kv.line, "unknown key '" + key + "'");
    }

private:
    std::string origin_;
    std::map<std::string, KeyValue> entries_;
    std::map<std::string, KeyValue> consumed_;
};

void check(bool cond, const Parser& p, const std::string& key, const std::string& msg) {
    if (!cond) {
        throw ConfigError("key '" + key + "': " + msg);
    }
    (void)p;
}

}  // namespace

TrainConfig parse_config(const std::string& text, const std::string& origin) {
    Parser p(text, origin);

    const int schema = p.require_int("schema_version");
    if (schema != 1)
        throw ConfigError(origin + ": unsupported schema_version " +
                          std::to_string(schema));

    TrainConfig cfg;
    const int n_rats = p.require_int("net.rats");
    const int n_eds = p.require_int("net.eds");
    check(n_rats >= 1 && n_rats <= 16, p, "net.rats", "must be in [1, 16]");
    check(n_eds >= 1 && n_eds <= 4096, p, "net.eds", "must be in [1, 4096]");

    cfg.env_cfg.chan.arena_m = p.optional_double("arena.size_m", 200.0);
    cfg.env_cfg.chan.min_distance_m = p.optional_double("arena.min_distance_m", 1.0);

    cfg.speed_min_kmh = p.optional_double("mobility.speed_min_kmh", 2.0);
    cfg.speed_max_kmh = p.optional_double("mobility.speed_max_kmh", 6.0);
    cfg.env_cfg.mobility_dt_s = p.optional_double("mobility.step_dt_s", 1.0);
    cfg.env_cfg.speed_min_mps = cfg.speed_min_kmh * kKmhToMps;
    cfg.env_cfg.speed_max_mps = cfg.speed_max_kmh * kKmhToMps;
    check(cfg.speed_min_kmh >= 0 && cfg.speed_max_kmh >= cfg.speed_min_kmh, p,
          "mobility.speed_min_kmh", "need 0 <= min <= max");

    const std::string cadence =
        p.has("channel.fading_cadence") ? p.require_string("channel.fading_cadence")
                                        : "static";
    if (cadence == "per_step")
        cfg.env_cfg.fading_cadence = env::FadingCadence::PerStep;
    else if (cadence == "per_episode")
        cfg.env_cfg.fading_cadence = env::FadingCadence::PerEpisode;
    else if (cadence == "static")
        cfg.env_cfg.fading_cadence = env::FadingCadence::Static;
    else
        throw ConfigError("key 'channel.fading_cadence': unknown cadence '" +
                          cadence + "'");
    cfg.env_cfg.chan.fading_enabled = p.optional_bool("channel.fading_enabled", true);
    cfg.env_cfg.reference_distance_m =
        p.optional_double("channel.reference_distance_m", 10.0);
    cfg.env_cfg.c_max_scale = p.optional_double("channel.c_max_scale", 3.0);
    cfg.env_cfg.reference_occupancy =
        p.optional_int("channel.reference_occupancy", 0);
    cfg.env_cfg.chan.los_decay_m = p.optional_double("channel.mmwave_los_decay_m", 141.4);
    cfg.env_cfg.chan.rician_k_db = p.optional_double("channel.rician_k_db", 10.0);
    cfg.env_cfg.chan.cost231_base_height_m =
        p.optional_double("channel.cost231_base_height_m", 30.0);
    cfg.env_cfg.chan.cost231_mobile_height_m =
        p.optional_double("channel.cost231_mobile_height_m", 1.5);

    for (int i = 1; i <= n_rats; ++i) {
        const std::string k = "rat" + std::to_string(i) + ".";
        channel::RatRadioProfile r;
        r.id = i;
        r.frequency_ghz = p.require_double(k + "frequency_ghz");
        r.bandwidth_mhz = p.require_double(k + "bandwidth_mhz");
        r.max_power_dbm = p.require_double(k + "max_power_dbm");
        r.noise_psd_dbm_per_mhz = p.require_double(k + "noise_psd_dbm_per_mhz");
        r.apply_file_units();
        r.model = channel::model_from_string(p.require_string(k + "channel_model"));

        // Path-loss exponents are admitted exactly where the model uses them.
        const bool want_los = r.model != ChannelModel::Cost231Urban;
        const bool want_nlos = r.model == ChannelModel::DirectionalMmWave;
        if (want_los != p.has(k + "pathloss_exp_los"))
            throw ConfigError("key '" + k + "pathloss_exp_los': " +
                              (want_los ? "required by" : "not admitted for") +
                              " channel model");
        if (want_nlos != p.has(k + "pathloss_exp_nlos"))
            throw ConfigError("key '" + k + "pathloss_exp_nlos': " +
                              (want_nlos ? "required by" : "not admitted for") +
                              " channel model");
        if (want_los) r.pathloss_exp_los = p.require_double(k + "pathloss_exp_los");
        if (want_nlos) r.pathloss_exp_nlos = p.require_double(k + "pathloss_exp_nlos");

        r.n_antennas = p.optional_int(k + "ula_antennas", 1);
        r.n_paths = p.optional_int(k + "multipaths", 1);
        r.antenna_gain_dbi = p.optional_double(k + "antenna_gain_dbi", 0.0);
        r.shadowing_db = p.require_double(k + "shadowing_db");
        r.price_per_bit = p.require_double(k + "price_euro_per_bit");
        r.x_m = p.require_double(k + "pos_x_m");
        r.y_m = p.require_double(k + "pos_y_m");
        try {
            r.validate();
        } catch (const std::exception& e) {
            throw ConfigError("rat" + std::to_string(i) + ": " + e.what());
        }
        cfg.rats.push_back(r);
    }

    for (int i = 1; i <= n_eds; ++i) {
        const std::string k = "ed" + std::to_string(i) + ".";
        env::EdQosProfile q;
        q.r_min_bps = p.require_double(k + "r_min_bps");
        q.alpha = p.require_double(k + "alpha");
        q.gamma = p.require_double(k + "gamma");
        try {
            q.validate();
        } catch (const std::exception& e) {
            throw ConfigError("ed" + std::to_string(i) + ": " + e.what());
        }
        cfg.qos.push_back(q);
    }

    cfg.episodes = p.optional_int("train.episodes", 1000);
    cfg.k_inner = p.optional_int("train.k_inner", 1);
    cfg.shock_period = p.optional_int("train.shock_period", 0);
    cfg.convergence_window = p.optional_int("train.convergence_window", 200);
    cfg.convergence_tol_frac = p.optional_double("train.convergence_tol_frac", 0.02);
    cfg.smoothing_window = p.optional_int("train.smoothing_window", 50);
    cfg.eval_episodes = p.optional_int("train.eval_episodes", 200);
    cfg.reward_normalized_rates =
        p.optional_bool("train.reward_normalized_rates", true);
    cfg.es_hinge_slack = p.optional_bool("train.es_hinge_slack", true);
    cfg.parallel = p.optional_bool("train.parallel", true);
    cfg.env_cfg.parallel = cfg.parallel;

    cfg.dqn_hidden1 = p.optional_int("dqn.hidden1", 256);
    cfg.dqn_hidden2 = p.optional_int("dqn.hidden2", 128);
    cfg.dqn_lr = p.optional_double("dqn.lr", 8e-4);
    cfg.dqn_gamma = p.optional_double("dqn.gamma", 0.99);
    cfg.dqn_buffer = p.optional_int("dqn.buffer", 1000);
    cfg.dqn_batch = p.optional_int("dqn.batch", 64);
    cfg.eps_start = p.optional_double("dqn.eps_start", 1.0);
    cfg.eps_end = p.optional_double("dqn.eps_end", 0.005);
    cfg.eps_decay = p.optional_double("dqn.eps_decay", 5e-4);
    cfg.dqn_target_sync_steps = p.optional_int("dqn.target_sync_steps", 100);
    cfg.eta_es = p.optional_double("dqn.eta", 1e3);
    cfg.zeta_es = p.optional_double("dqn.zeta", 8e-4);

    cfg.ddpg_hidden1 = p.optional_int("ddpg.hidden1", 16);
    cfg.ddpg_hidden2 = p.optional_int("ddpg.hidden2", 16);
    cfg.ddpg_actor_lr = p.optional_double("ddpg.actor_lr", 5e-4);
    cfg.ddpg_critic_lr = p.optional_double("ddpg.critic_lr", 5e-4);
    cfg.ddpg_gamma = p.optional_double("ddpg.gamma", 0.99);
    cfg.ddpg_buffer = p.optional_int("ddpg.buffer", 500);
    cfg.ddpg_batch = p.optional_int("ddpg.batch", 16);
    cfg.ou_theta = p.optional_double("ddpg.ou_theta", 0.15);
    cfg.ou_sigma = p.optional_double("ddpg.ou_sigma", 0.03);
    cfg.tau = p.optional_double("ddpg.tau", 0.005);
    cfg.eta1 = p.optional_double("ddpg.eta1", 1.0);
    cfg.eta2 = p.optional_double("ddpg.eta2", 1e3);
    cfg.zeta_l = p.optional_double("ddpg.zeta", 5e-3);

    cfg.adam_beta1 = p.optional_double("nn.adam_beta1", 0.9);
    cfg.adam_beta2 = p.optional_double("nn.adam_beta2", 0.999);
    cfg.adam_eps = p.optional_double("nn.adam_eps", 1e-8);
    cfg.grad_clip = p.optional_double("nn.grad_clip_norm", 1.0);

    p.finish();
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str(), path);
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string serialize_config(const TrainConfig& cfg) {
    std::ostringstream os;
    auto put = [&os](const std::string& key, const std::string& value) {
        os << key << " = " << value << '\n';
    };
    auto putd = [&](const std::string& key, double v) { put(key, num(v)); };
    auto puti = [&](const std::string& key, long long v) {
        put(key, std::to_string(v));
    };
    auto putb = [&](const std::string& key, bool v) { put(key, v ? "true" : "false"); };

    puti("schema_version", 1);
    puti("net.rats", cfg.n_rats());
    puti("net.eds", cfg.n_eds());

    putd("arena.size_m", cfg.env_cfg.chan.arena_m);
    putd("arena.min_distance_m", cfg.env_cfg.chan.min_distance_m);
    putd("mobility.speed_min_kmh", cfg.speed_min_kmh);
    putd("mobility.speed_max_kmh", cfg.speed_max_kmh);
    putd("mobility.step_dt_s", cfg.env_cfg.mobility_dt_s);
    put("channel.fading_cadence",
        cfg.env_cfg.fading_cadence == env::FadingCadence::PerStep ? "per_step"
        : cfg.env_cfg.fading_cadence == env::FadingCadence::PerEpisode
            ? "per_episode"
            : "static");
    putb("channel.fading_enabled", cfg.env_cfg.chan.fading_enabled);
    putd("channel.reference_distance_m", cfg.env_cfg.reference_distance_m);
    putd("channel.c_max_scale", cfg.env_cfg.c_max_scale);
    puti("channel.reference_occupancy", cfg.env_cfg.reference_occupancy);
    putd("channel.mmwave_los_decay_m", cfg.env_cfg.chan.los_decay_m);
    putd("channel.rician_k_db", cfg.env_cfg.chan.rician_k_db);
    putd("channel.cost231_base_height_m", cfg.env_cfg.chan.cost231_base_height_m);
    putd("channel.cost231_mobile_height_m", cfg.env_cfg.chan.cost231_mobile_height_m);

    for (int i = 0; i < cfg.n_rats(); ++i) {
        const auto& r = cfg.rats[i];
        const std::string k = "rat" + std::to_string(i + 1) + ".";
        putd(k + "frequency_ghz", r.frequency_ghz);
        putd(k + "bandwidth_mhz", r.bandwidth_mhz);
        putd(k + "max_power_dbm", r.max_power_dbm);
        putd(k + "noise_psd_dbm_per_mhz", r.noise_psd_dbm_per_mhz);
        put(k + "channel_model", channel::model_to_string(r.model));
        if (r.model != ChannelModel::Cost231Urban)
            putd(k + "pathloss_exp_los", r.pathloss_exp_los);
        if (r.model == ChannelModel::DirectionalMmWave)
            putd(k + "pathloss_exp_nlos", r.pathloss_exp_nlos);
        puti(k + "ula_antennas", r.n_antennas);
        puti(k + "multipaths", r.n_paths);
        putd(k + "antenna_gain_dbi", r.antenna_gain_dbi);
        putd(k + "shadowing_db", r.shadowing_db);
        putd(k + "price_euro_per_bit", r.price_per_bit);
        putd(k + "pos_x_m", r.x_m);
        putd(k + "pos_y_m", r.y_m);
    }
    for (int i = 0; i < cfg.n_eds(); ++i) {
        const auto& q = cfg.qos[i];
        const std::string k = "ed" + std::to_string(i + 1) + ".";
        putd(k + "r_min_bps", q.r_min_bps);
        putd(k + "alpha", q.alpha);
        putd(k + "gamma", q.gamma);
    }

    puti("train.episodes", cfg.episodes);
    puti("train.k_inner", cfg.k_inner);
    puti("train.shock_period", cfg.shock_period);
    puti("train.convergence_window", cfg.convergence_window);
    putd("train.convergence_tol_frac", cfg.convergence_tol_frac);
    puti("train.smoothing_window", cfg.smoothing_window);
    puti("train.eval_episodes", cfg.eval_episodes);
    putb("train.reward_normalized_rates", cfg.reward_normalized_rates);
    putb("train.es_hinge_slack", cfg.es_hinge_slack);
    putb("train.parallel", cfg.parallel);

    puti("dqn.hidden1", cfg.dqn_hidden1);
    puti("dqn.hidden2", cfg.dqn_hidden2);
    putd("dqn.lr", cfg.dqn_lr);
    putd("dqn.gamma", cfg.dqn_gamma);
    puti("dqn.buffer", cfg.dqn_buffer);
    puti("dqn.batch", cfg.dqn_batch);
    putd("dqn.eps_start", cfg.eps_start);
    putd("dqn.eps_end", cfg.eps_end);
    putd("dqn.eps_decay", cfg.eps_decay);
    puti("dqn.target_sync_steps", cfg.dqn_target_sync_steps);
    putd("dqn.eta", cfg.eta_es);
    putd("dqn.zeta", cfg.zeta_es);

    puti("ddpg.hidden1", cfg.ddpg_hidden1);
    puti("ddpg.hidden2", cfg.ddpg_hidden2);
    putd("ddpg.actor_lr", cfg.ddpg_actor_lr);
    putd("ddpg.critic_lr", cfg.ddpg_critic_lr);
    putd("ddpg.gamma", cfg.ddpg_gamma);
    puti("ddpg.buffer", cfg.ddpg_buffer);
    puti("ddpg.batch", cfg.ddpg_batch);
    putd("ddpg.ou_theta", cfg.ou_theta);
    putd("ddpg.ou_sigma", cfg.ou_sigma);
    putd("ddpg.tau", cfg.tau);
    putd("ddpg.eta1", cfg.eta1);
    putd("ddpg.eta2", cfg.eta2);
    putd("ddpg.zeta", cfg.zeta_l);

    putd("nn.adam_beta1", cfg.adam_beta1);
    putd("nn.adam_beta2", cfg.adam_beta2);
    putd("nn.adam_eps", cfg.adam_eps);
    putd("nn.grad_clip_norm", cfg.grad_clip);
    return os.str();
}

void save_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write config file '" + path + "'");
    os << serialize_config(cfg);
}

}  // namespace deeprat::harness
