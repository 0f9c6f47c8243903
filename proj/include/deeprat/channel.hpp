#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "deeprat/rng.hpp"

namespace deeprat::channel {

enum class ChannelModel { DirectionalMmWave, Cost231Urban, ExponentialPathLoss };

ChannelModel model_from_string(const std::string& s);
std::string model_to_string(ChannelModel m);

// Per-RAT physical and economic parameters. The math uses the SI fields; the
// file-unit sources are kept verbatim so configuration round-trips exactly.
struct RatRadioProfile {
    int id = 0;                      // RAT index, 1-based
    double frequency_hz = 0.0;       // carrier
    double bandwidth_hz = 0.0;       // W_l
    double max_power_w = 0.0;        // parsed from dBm
    double noise_psd_w_hz = 0.0;     // parsed from dBm/MHz
    double frequency_ghz = 0.0;
    double bandwidth_mhz = 0.0;
    double max_power_dbm = 0.0;
    double noise_psd_dbm_per_mhz = 0.0;
    ChannelModel model = ChannelModel::ExponentialPathLoss;
    double pathloss_exp_los = 2.0;
    double pathloss_exp_nlos = 4.0;  // mmWave only
    int n_antennas = 1;              // ULA element count
    int n_paths = 1;
    double antenna_gain_dbi = 0.0;
    double shadowing_db = 0.0;       // lognormal std, dB
    double price_per_bit = 0.0;      // Euro/bit
    double x_m = 0.0, y_m = 0.0;

    // Derives the SI fields from the file-unit sources.
    void apply_file_units();
    void validate() const;
};

struct EdPosition {
    double x_m = 0.0, y_m = 0.0;
    double speed_mps = 0.0;
};

// One small-scale realization for a single RAT-ED link.
struct LinkFade {
    double h_sq = 1.0;        // |h_lu|^2, unit mean power
    double shadow_db = 0.0;   // zero-mean lognormal draw
    bool los = true;          // mmWave links only
};

struct ChannelParams {
    double arena_m = 200.0;
    double min_distance_m = 1.0;
    double rician_k_db = 10.0;        // mmWave LOS
    double los_decay_m = 141.4;       // p_LOS = exp(-d / los_decay_m)
    double cost231_base_height_m = 30.0;
    double cost231_mobile_height_m = 1.5;
    bool fading_enabled = true;       // false => h_sq = 1, shadow = 0 (static channel)
};

// Unit conversions.
double dbm_to_watt(double dbm);
double psd_dbm_per_mhz_to_watt_per_hz(double dbm_per_mhz);
double db_to_linear(double db);

double distance_m(const RatRadioProfile& p, const EdPosition& e, double min_distance_m);

// Deterministic part of the link budget (path loss + antenna gains), linear.
// Fading and shadowing multiply on top in link_gain.
double deterministic_gain(const RatRadioProfile& p, double d_m, bool los,
                          const ChannelParams& cp);

// Linear power gain g_lu for one link. Pure in (profile, position, fade).
double link_gain(const RatRadioProfile& p, const EdPosition& e, const LinkFade& f,
                 const ChannelParams& cp);

// Mediums-scale state for the whole network: LOS flags persist between
// mobility shocks, small-scale fading and shadowing are redrawn per step from
// counter-derived seeds so that parallel and serial link evaluation agree
// bit-for-bit.
class FadingProcess {
public:
    FadingProcess() = default;
    FadingProcess(std::uint64_t seed, int n_rats, int n_eds, ChannelParams cp);

    // Redraw LOS flags (Bernoulli with p = exp(-d/decay)); called at init and at
    // every mobility shock.
    void redraw_los(const std::vector<RatRadioProfile>& rats,
                    const std::vector<EdPosition>& eds);

    // Fade for link (l, u) at a given draw counter. Depends only on
    // (seed, counter, l, u) and the persistent LOS flag.
    LinkFade fade(const RatRadioProfile& rat, int l, int u, std::uint64_t counter) const;

    bool los_flag(int l, int u) const { return los_[index(l, u)]; }
    const ChannelParams& params() const { return cp_; }

    void save(std::ostream& os) const;
    void load(std::istream& is);

private:
    int index(int l, int u) const { return l * n_eds_ + u; }

    std::uint64_t seed_ = 0;
    int n_rats_ = 0, n_eds_ = 0;
    std::uint64_t shock_count_ = 0;
    std::vector<std::uint8_t> los_;
    ChannelParams cp_;
};

// Moves each ED a distance speed*dt in a uniformly random direction,
// reflecting at the arena bounds.
void step_mobility(std::vector<EdPosition>& eds, double dt_s, double arena_m,
                   rng::Stream& rs);

// Kinematic core of step_mobility, exposed for direct testing.
void advance_position(EdPosition& e, double angle_rad, double dist_m, double arena_m);

// Mobility shock: teleport every ED uniformly in the arena. Speeds are kept.
void shock_positions(std::vector<EdPosition>& eds, double arena_m, rng::Stream& rs);

}  // namespace deeprat::channel
