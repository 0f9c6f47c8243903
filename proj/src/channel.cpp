#include "deeprat/channel.hpp"

#include <cmath>

namespace deeprat::channel {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLightSpeed = 299792458.0;
}  // namespace

ChannelModel model_from_string(const std::string& s) {
    if (s == "directional_mmwave") return ChannelModel::DirectionalMmWave;
    if (s == "cost231_urban") return ChannelModel::Cost231Urban;
    if (s == "exponential") return ChannelModel::ExponentialPathLoss;
    throw std::invalid_argument("unknown channel model '" + s + "'");
}

std::string model_to_string(ChannelModel m) {
    switch (m) {
        case ChannelModel::DirectionalMmWave: return "directional_mmwave";
        case ChannelModel::Cost231Urban: return "cost231_urban";
        case ChannelModel::ExponentialPathLoss: return "exponential";
    }
    throw std::invalid_argument("unknown channel model enum value");
}

void RatRadioProfile::apply_file_units() {
    frequency_hz = frequency_ghz * 1e9;
    bandwidth_hz = bandwidth_mhz * 1e6;
    max_power_w = dbm_to_watt(max_power_dbm);
    noise_psd_w_hz = psd_dbm_per_mhz_to_watt_per_hz(noise_psd_dbm_per_mhz);
}

void RatRadioProfile::validate() const {
    if (!(bandwidth_hz > 0)) throw std::invalid_argument("rat bandwidth must be > 0");
    if (!(max_power_w > 0)) throw std::invalid_argument("rat max power must be > 0");
    if (!(noise_psd_w_hz > 0)) throw std::invalid_argument("rat noise psd must be > 0");
    if (!(frequency_hz > 0)) throw std::invalid_argument("rat frequency must be > 0");
    if (price_per_bit < 0) throw std::invalid_argument("rat price per bit must be >= 0");
    if (n_antennas < 1) throw std::invalid_argument("rat antenna count must be >= 1");
    if (shadowing_db < 0) throw std::invalid_argument("rat shadowing std must be >= 0");
}

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

double psd_dbm_per_mhz_to_watt_per_hz(double dbm_per_mhz) {
    return dbm_to_watt(dbm_per_mhz) / 1e6;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double distance_m(const RatRadioProfile& p, const EdPosition& e, double min_distance_m) {
    const double dx = p.x_m - e.x_m;
    const double dy = p.y_m - e.y_m;
    return std::max(min_distance_m, std::sqrt(dx * dx + dy * dy));
}

namespace {

// Free-space path loss at 1 m, dB.
double fspl_1m_db(double f_hz) {
    return 20.0 * std::log10(4.0 * kPi * f_hz / kLightSpeed);
}

// COST-231 Hata, urban, medium-city correction (C = 0).
double cost231_pl_db(double f_hz, double d_m, double hb_m, double hm_m) {
    const double f_mhz = f_hz / 1e6;
    const double d_km = d_m / 1e3;
    const double lf = std::log10(f_mhz);
    const double a_hm = (1.1 * lf - 0.7) * hm_m - (1.56 * lf - 0.8);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(hb_m) - a_hm +
           (44.9 - 6.55 * std::log10(hb_m)) * std::log10(d_km);
}

}  // namespace

double deterministic_gain(const RatRadioProfile& p, double d_m, bool los,
                          const ChannelParams& cp) {
    double gain_db = 0.0;
    switch (p.model) {
        case ChannelModel::DirectionalMmWave: {
            const double n = los ? p.pathloss_exp_los : p.pathloss_exp_nlos;
            const double pl = fspl_1m_db(p.frequency_hz) + 10.0 * n * std::log10(d_m);
            // Beamsteering ULA gain, perfect alignment assumed.
            const double array_db = 10.0 * std::log10(static_cast<double>(p.n_antennas));
            gain_db = -pl + array_db + p.antenna_gain_dbi;
            break;
        }
        case ChannelModel::Cost231Urban: {
            const double pl = cost231_pl_db(p.frequency_hz, d_m,
                                            cp.cost231_base_height_m,
                                            cp.cost231_mobile_height_m);
            gain_db = -pl + p.antenna_gain_dbi;
            break;
        }
        case ChannelModel::ExponentialPathLoss: {
            const double ref_db = -fspl_1m_db(p.frequency_hz);
            gain_db = ref_db - 10.0 * p.pathloss_exp_los * std::log10(d_m) +
                      p.antenna_gain_dbi;
            break;
        }
        default:
            throw std::invalid_argument("unknown channel model enum value");
    }
    return db_to_linear(gain_db);
}

double link_gain(const RatRadioProfile& p, const EdPosition& e, const LinkFade& f,
                 const ChannelParams& cp) {
    const double d = distance_m(p, e, cp.min_distance_m);
    return deterministic_gain(p, d, f.los, cp) * db_to_linear(f.shadow_db) * f.h_sq;
}

FadingProcess::FadingProcess(std::uint64_t seed, int n_rats, int n_eds, ChannelParams cp)
    : seed_(seed), n_rats_(n_rats), n_eds_(n_eds),
      los_(static_cast<std::size_t>(n_rats) * n_eds, 1), cp_(cp) {}

namespace {
// Disjoint seed domains for the LOS and small-scale draws.
constexpr std::uint64_t kLosDomain = 0x4C4F53u;
constexpr std::uint64_t kFadeDomain = 0x46414445u;
}  // namespace

void FadingProcess::redraw_los(const std::vector<RatRadioProfile>& rats,
                               const std::vector<EdPosition>& eds) {
    for (int l = 0; l < n_rats_; ++l) {
        for (int u = 0; u < n_eds_; ++u) {
            rng::Stream rs(rng::substream(seed_ ^ kLosDomain, shock_count_, l, u));
            const double d = distance_m(rats[l], eds[u], cp_.min_distance_m);
            const double p_los = std::exp(-d / cp_.los_decay_m);
            los_[index(l, u)] = rs.uniform01() < p_los ? 1 : 0;
        }
    }
    ++shock_count_;
}

LinkFade FadingProcess::fade(const RatRadioProfile& rat, int l, int u,
                             std::uint64_t counter) const {
    LinkFade f;
    f.los = los_[index(l, u)] != 0;
    if (!cp_.fading_enabled) return f;

    rng::Stream rs(rng::substream(seed_ ^ kFadeDomain, counter, l, u));
    f.shadow_db = rs.normal(0.0, rat.shadowing_db);
    if (rat.model == ChannelModel::DirectionalMmWave && f.los) {
        // Rician, unit mean power: h = sqrt(K/(K+1)) + CN(0, 1/(K+1)).
        const double k = db_to_linear(cp_.rician_k_db);
        const double s = std::sqrt(k / (k + 1.0));
        const double sg = std::sqrt(1.0 / (2.0 * (k + 1.0)));
        const double re = s + sg * rs.normal();
        const double im = sg * rs.normal();
        f.h_sq = re * re + im * im;
    } else {
        // Rayleigh magnitude, |h|^2 ~ Exp(1).
        f.h_sq = -std::log(1.0 - rs.uniform01());
    }
    return f;
}

void FadingProcess::save(std::ostream& os) const {
    os << seed_ << ' ' << n_rats_ << ' ' << n_eds_ << ' ' << shock_count_;
    for (auto v : los_) os << ' ' << int(v);
    os << '\n';
}

void FadingProcess::load(std::istream& is) {
    is >> seed_ >> n_rats_ >> n_eds_ >> shock_count_;
    los_.assign(static_cast<std::size_t>(n_rats_) * n_eds_, 1);
    for (auto& v : los_) {
        int x;
        is >> x;
        v = static_cast<std::uint8_t>(x);
    }
}

void advance_position(EdPosition& e, double angle_rad, double dist_m, double arena_m) {
    double x = e.x_m + dist_m * std::cos(angle_rad);
    double y = e.y_m + dist_m * std::sin(angle_rad);
    // Reflect into [0, arena]. One fold is enough for dist << arena, loop for safety.
    auto reflect = [arena_m](double v) {
        while (v < 0.0 || v > arena_m) {
            if (v < 0.0) v = -v;
            if (v > arena_m) v = 2.0 * arena_m - v;
        }
        return v;
    };
    e.x_m = reflect(x);
    e.y_m = reflect(y);
}

void step_mobility(std::vector<EdPosition>& eds, double dt_s, double arena_m,
                   rng::Stream& rs) {
    if (!(dt_s > 0)) throw std::invalid_argument("mobility dt must be > 0");
    for (auto& e : eds) {
        const double angle = rs.uniform(0.0, 2.0 * kPi);
        advance_position(e, angle, e.speed_mps * dt_s, arena_m);
    }
}

void shock_positions(std::vector<EdPosition>& eds, double arena_m, rng::Stream& rs) {
    for (auto& e : eds) {
        e.x_m = rs.uniform(0.0, arena_m);
        e.y_m = rs.uniform(0.0, arena_m);
    }
}

}  // namespace deeprat::channel
