#pragma once

#include <cstdint>
#include <vector>

#include "deeprat/channel.hpp"
#include "deeprat/rng.hpp"

namespace deeprat::env {

using channel::ChannelParams;
using channel::EdPosition;
using channel::RatRadioProfile;

// Dense U x L matrix, row = ED, column = RAT.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(std::size_t(r) * c, fill) {}
    double& at(int r, int c) { return v[std::size_t(r) * cols + c]; }
    double at(int r, int c) const { return v[std::size_t(r) * cols + c]; }
    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows == b.rows && a.cols == b.cols && a.v == b.v;
    }
};

// x_lu decision variable. Entries are 0/1; row u lists the RATs serving ED u.
struct Assignment {
    int n_eds = 0, n_rats = 0;
    std::vector<std::uint8_t> x;  // row-major U x L

    Assignment() = default;
    Assignment(int u, int l) : n_eds(u), n_rats(l), x(std::size_t(u) * l, 0) {}

    std::uint8_t& at(int u, int l) { return x[std::size_t(u) * n_rats + l]; }
    std::uint8_t at(int u, int l) const { return x[std::size_t(u) * n_rats + l]; }

    // |U_l|: EDs currently served by RAT l.
    int assigned_count(int l) const {
        int n = 0;
        for (int u = 0; u < n_eds; ++u) n += at(u, l);
        return n;
    }
    // |L_u| >= 1 for every ED (constraint C1).
    bool complete() const {
        for (int u = 0; u < n_eds; ++u) {
            int n = 0;
            for (int l = 0; l < n_rats; ++l) n += at(u, l);
            if (n == 0) return false;
        }
        return true;
    }
    friend bool operator==(const Assignment& a, const Assignment& b) {
        return a.n_eds == b.n_eds && a.n_rats == b.n_rats && a.x == b.x;
    }
};

using PowerAlloc = Mat;  // p_lu, Watt

struct EdQosProfile {
    double r_min_bps = 0.0;  // R_u^min
    double alpha = 0.5;      // rate weight
    double gamma = 0.5;      // cost weight, alpha + gamma = 1

    void validate() const;
};

struct NormalizationSpec {
    double r_max_bps = 1.0;
    double c_max_eur_s = 1.0;
};

struct ConstraintReport {
    std::vector<std::uint8_t> c1_ok;   // per ED
    std::vector<double> c2_slack_w;    // per RAT: P_l^max - sum_u p_lu
    std::vector<double> c3_slack_bps;  // per ED: R_u - R_u^min
    bool c4_ok = true;                 // p_lu >= 0 everywhere
    bool feasible = false;
};

// Everything one environment step produces.
struct NetworkSnapshot {
    Mat gains;          // g_lu
    Mat snr;            // Gamma_lu (0 on unassigned links)
    Mat rates_bps;      // R_lu
    Mat costs_eur_s;    // C_lu
    Mat utilities;      // normalized U_lu
    Mat powers_w;       // applied powers (masked to the assignment)
    Assignment assign;  // assignment the step was computed under
    std::vector<double> ed_rate_bps;  // R_u
    ConstraintReport constraints;
};

// Upper-bound link rate: (W/|U_l|) * log2(1 + g p / ((W/|U_l|) sigma^2)).
double link_rate(double bandwidth_hz, int assigned_count, double gain, double power_w,
                 double noise_psd_w_hz);

// C_lu = eps_l * R_lu, Euro/s.
double monetary_cost(double price_per_bit, double rate_bps);

// alpha * R/r_max - gamma * C/c_max.
double link_utility(const EdQosProfile& qos, double rate_bps, double cost_eur_s,
                    const NormalizationSpec& norm);

// Masked objective sum: links with x_lu = 0 contribute exactly 0.
double network_utility(const Assignment& assign, const NetworkSnapshot& snapshot);

ConstraintReport check_constraints(const Assignment& assign, const PowerAlloc& powers,
                                   const std::vector<double>& ed_rate_bps,
                                   const std::vector<EdQosProfile>& qos,
                                   const std::vector<RatRadioProfile>& rats);

// Rate/cost normalization references, fixed once per run. r_max is the best
// over RATs of the fair-share rate at the reference distance with
// reference_occupancy EDs on the RAT (the rate an ED can expect when the
// population shares the best RAT); c_max is the costliest price applied to
// r_max, scaled by c_max_scale (a multi-homing ED can buy from several RATs
// at once, so the cost ceiling sits above one link's worth).
NormalizationSpec derive_normalization(const std::vector<RatRadioProfile>& rats,
                                       const ChannelParams& cp,
                                       double reference_distance_m,
                                       int reference_occupancy,
                                       double c_max_scale);

// When the small-scale realization is redrawn. Gains always track ED
// positions; Static re-rolls fading only at mobility shocks.
enum class FadingCadence { PerStep, PerEpisode, Static };

struct EnvConfig {
    ChannelParams chan;
    double reference_distance_m = 10.0;
    int reference_occupancy = 0;  // 0 = all EDs share the reference RAT
    double c_max_scale = 3.0;
    double mobility_dt_s = 1.0;
    double speed_min_mps = 0.0;
    double speed_max_mps = 0.0;
    FadingCadence fading_cadence = FadingCadence::Static;
    bool parallel = true;
};

// Holds the physical network state (positions, fading, normalization) and
// computes snapshots. Snapshot math is pure; all randomness flows through
// counter-derived per-link streams, so the parallel and serial paths agree
// bit-for-bit.
class Environment {
public:
    Environment(std::vector<RatRadioProfile> rats, std::vector<EdQosProfile> qos,
                EnvConfig cfg, std::uint64_t seed);

    int n_rats() const { return int(rats_.size()); }
    int n_eds() const { return int(qos_.size()); }
    const std::vector<RatRadioProfile>& rats() const { return rats_; }
    const std::vector<EdQosProfile>& qos() const { return qos_; }
    const std::vector<EdPosition>& eds() const { return eds_; }
    const NormalizationSpec& norm() const { return norm_; }
    const EnvConfig& config() const { return cfg_; }
    const Mat& current_gains() const { return gains_; }

    // Recomputes g_lu at the current positions. Under PerStep/PerEpisode
    // cadence each call advances the fading draw counter; under Static the
    // realization is pinned to the current shock epoch.
    void refresh_gains();

    // One environment step at the current gains. Unassigned powers are zeroed
    // before any rate computation. Requires a complete assignment (C1).
    NetworkSnapshot apply(const Assignment& assign, const PowerAlloc& powers) const;

    void advance_mobility();                 // once per episode
    void apply_shock();                      // teleport EDs, redraw LOS

    void save(std::ostream& os) const;
    void load(std::istream& is);

private:
    std::vector<RatRadioProfile> rats_;
    std::vector<EdQosProfile> qos_;
    std::vector<EdPosition> eds_;
    EnvConfig cfg_;
    channel::FadingProcess fading_;
    NormalizationSpec norm_;
    Mat gains_;
    std::uint64_t draw_counter_ = 0;
    std::uint64_t shock_epoch_ = 1ull << 32;
    rng::Stream mobility_rng_;
    rng::Stream shock_rng_;
};

}  // namespace deeprat::env
