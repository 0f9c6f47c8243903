#include "deeprat/env.hpp"

#include <cmath>
#include <stdexcept>

namespace deeprat::env {

void EdQosProfile::validate() const {
    if (!(r_min_bps > 0)) throw std::invalid_argument("ed r_min must be > 0");
    if (alpha < 0 || alpha > 1 || gamma < 0 || gamma > 1)
        throw std::invalid_argument("ed alpha/gamma must be in [0,1]");
    if (std::abs(alpha + gamma - 1.0) > 1e-12)
        throw std::invalid_argument("ed alpha + gamma must equal 1");
}

double link_rate(double bandwidth_hz, int assigned_count, double gain, double power_w,
                 double noise_psd_w_hz) {
    if (assigned_count < 1)
        throw std::invalid_argument("link_rate requires assigned_count >= 1");
    if (power_w <= 0.0) return 0.0;
    const double share_hz = bandwidth_hz / assigned_count;
    const double snr = gain * power_w / (share_hz * noise_psd_w_hz);
    return share_hz * std::log2(1.0 + snr);
}

double monetary_cost(double price_per_bit, double rate_bps) {
    return price_per_bit * rate_bps;
}

double link_utility(const EdQosProfile& qos, double rate_bps, double cost_eur_s,
                    const NormalizationSpec& norm) {
    return qos.alpha * (rate_bps / norm.r_max_bps) -
           qos.gamma * (cost_eur_s / norm.c_max_eur_s);
}

double network_utility(const Assignment& assign, const NetworkSnapshot& snapshot) {
    double total = 0.0;
    for (int u = 0; u < assign.n_eds; ++u)
        for (int l = 0; l < assign.n_rats; ++l)
            if (assign.at(u, l)) total += snapshot.utilities.at(u, l);
    return total;
}

ConstraintReport check_constraints(const Assignment& assign, const PowerAlloc& powers,
                                   const std::vector<double>& ed_rate_bps,
                                   const std::vector<EdQosProfile>& qos,
                                   const std::vector<RatRadioProfile>& rats) {
    const int n_eds = assign.n_eds;
    const int n_rats = assign.n_rats;
    ConstraintReport rep;
    rep.c1_ok.resize(n_eds);
    rep.c3_slack_bps.resize(n_eds);
    rep.c2_slack_w.resize(n_rats);
    rep.c4_ok = true;

    for (int u = 0; u < n_eds; ++u) {
        int links = 0;
        for (int l = 0; l < n_rats; ++l) links += assign.at(u, l);
        rep.c1_ok[u] = links >= 1;
        rep.c3_slack_bps[u] = ed_rate_bps[u] - qos[u].r_min_bps;
    }
    for (int l = 0; l < n_rats; ++l) {
        double sum = 0.0;
        for (int u = 0; u < n_eds; ++u) {
            const double p = powers.at(u, l);
            if (p < 0) rep.c4_ok = false;
            if (assign.at(u, l)) sum += p;
        }
        rep.c2_slack_w[l] = rats[l].max_power_w - sum;
    }

    bool ok = rep.c4_ok;
    for (int u = 0; u < n_eds; ++u)
        ok = ok && rep.c1_ok[u] && rep.c3_slack_bps[u] >= 0.0;
    for (int l = 0; l < n_rats; ++l) ok = ok && rep.c2_slack_w[l] >= 0.0;
    rep.feasible = ok;
    return rep;
}

NormalizationSpec derive_normalization(const std::vector<RatRadioProfile>& rats,
                                       const ChannelParams& cp,
                                       double reference_distance_m,
                                       int reference_occupancy,
                                       double c_max_scale) {
    NormalizationSpec norm;
    double r_max = 0.0;
    double eps_max = 0.0;
    const int occ = std::max(1, reference_occupancy);
    for (const auto& rat : rats) {
        const double g = channel::deterministic_gain(rat, reference_distance_m,
                                                     /*los=*/true, cp);
        const double r = link_rate(rat.bandwidth_hz, occ, g, rat.max_power_w / occ,
                                   rat.noise_psd_w_hz);
        r_max = std::max(r_max, r);
        eps_max = std::max(eps_max, rat.price_per_bit);
    }
    norm.r_max_bps = r_max;
    // All-free pricing keeps the cost term identically zero; any positive
    // reference works then.
    norm.c_max_eur_s = eps_max > 0.0 ? c_max_scale * eps_max * r_max : 1.0;
    return norm;
}

Environment::Environment(std::vector<RatRadioProfile> rats,
                         std::vector<EdQosProfile> qos, EnvConfig cfg,
                         std::uint64_t seed)
    : rats_(std::move(rats)), qos_(std::move(qos)), cfg_(cfg),
      fading_(rng::substream(seed, 0x0Fu), int(rats_.size()), int(qos_.size()), cfg.chan),
      mobility_rng_(rng::substream(seed, 0x1Fu)),
      shock_rng_(rng::substream(seed, 0x2Fu)) {
    for (const auto& r : rats_) r.validate();
    for (const auto& q : qos_) q.validate();

    rng::Stream init(rng::substream(seed, 0x3Fu));
    eds_.resize(qos_.size());
    for (auto& e : eds_) {
        e.x_m = init.uniform(0.0, cfg_.chan.arena_m);
        e.y_m = init.uniform(0.0, cfg_.chan.arena_m);
        e.speed_mps = init.uniform(cfg_.speed_min_mps, cfg_.speed_max_mps);
    }
    fading_.redraw_los(rats_, eds_);
    const int ref_occ = cfg_.reference_occupancy > 0 ? cfg_.reference_occupancy
                                                      : n_eds();
    norm_ = derive_normalization(rats_, cfg_.chan, cfg_.reference_distance_m,
                                 ref_occ, cfg_.c_max_scale);
    gains_ = Mat(n_eds(), n_rats());
    refresh_gains();
}

void Environment::refresh_gains() {
    const int U = n_eds(), L = n_rats();
    std::uint64_t counter;
    if (cfg_.fading_cadence == FadingCadence::Static) {
        counter = shock_epoch_;
    } else {
        counter = draw_counter_++;
    }
    Mat& g = gains_;
#pragma omp parallel for collapse(2) if (cfg_.parallel)
    for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) {
            const auto fade = fading_.fade(rats_[l], l, u, counter);
            g.at(u, l) = channel::link_gain(rats_[l], eds_[u], fade, cfg_.chan);
        }
    }
}

NetworkSnapshot Environment::apply(const Assignment& assign,
                                   const PowerAlloc& powers) const {
    const int U = n_eds(), L = n_rats();
    if (assign.n_eds != U || assign.n_rats != L || powers.rows != U || powers.cols != L)
        throw std::invalid_argument("assignment/power shape mismatch");
    if (!assign.complete())
        throw std::invalid_argument("environment step requires a complete assignment (C1)");

    NetworkSnapshot snap;
    snap.gains = gains_;
    snap.assign = assign;
    snap.snr = Mat(U, L);
    snap.rates_bps = Mat(U, L);
    snap.costs_eur_s = Mat(U, L);
    snap.utilities = Mat(U, L);
    snap.powers_w = Mat(U, L);

    std::vector<int> occupancy(L);
    for (int l = 0; l < L; ++l) occupancy[l] = assign.assigned_count(l);

    // Per-link stage: independent, no shared writes, parallel-safe.
#pragma omp parallel for collapse(2) if (cfg_.parallel)
    for (int u = 0; u < U; ++u) {
        for (int l = 0; l < L; ++l) {
            if (!assign.at(u, l)) continue;  // unassigned: power forced to 0
            const double p = std::max(0.0, powers.at(u, l));
            const double share_hz = rats_[l].bandwidth_hz / occupancy[l];
            const double g = snap.gains.at(u, l);
            snap.powers_w.at(u, l) = p;
            snap.snr.at(u, l) = g * p / (share_hz * rats_[l].noise_psd_w_hz);
            const double r = link_rate(rats_[l].bandwidth_hz, occupancy[l], g, p,
                                       rats_[l].noise_psd_w_hz);
            snap.rates_bps.at(u, l) = r;
            const double c = monetary_cost(rats_[l].price_per_bit, r);
            snap.costs_eur_s.at(u, l) = c;
            snap.utilities.at(u, l) = link_utility(qos_[u], r, c, norm_);
        }
    }

    // Reductions stay serial in fixed order so parallel == serial bit-for-bit.
    snap.ed_rate_bps.assign(U, 0.0);
    for (int u = 0; u < U; ++u)
        for (int l = 0; l < L; ++l)
            if (assign.at(u, l)) snap.ed_rate_bps[u] += snap.rates_bps.at(u, l);

    // C4 is judged on the proposal as submitted; the applied matrix is clamped.
    snap.constraints = check_constraints(assign, powers, snap.ed_rate_bps, qos_, rats_);
    return snap;
}

void Environment::advance_mobility() {
    channel::step_mobility(eds_, cfg_.mobility_dt_s, cfg_.chan.arena_m, mobility_rng_);
}

void Environment::apply_shock() {
    channel::shock_positions(eds_, cfg_.chan.arena_m, shock_rng_);
    fading_.redraw_los(rats_, eds_);
    // Static cadence re-rolls the small-scale realization here. The epoch is
    // offset so it never collides with the per-step counter domain.
    shock_epoch_ += 1ull << 40;
    refresh_gains();
}

void Environment::save(std::ostream& os) const {
    os << draw_counter_ << ' ' << shock_epoch_ << '\n';
    for (const auto& e : eds_) {
        os.write(reinterpret_cast<const char*>(&e.x_m), sizeof(double));
        os.write(reinterpret_cast<const char*>(&e.y_m), sizeof(double));
        os.write(reinterpret_cast<const char*>(&e.speed_mps), sizeof(double));
    }
    os << '\n';
    fading_.save(os);
    mobility_rng_.save(os);
    os << '\n';
    shock_rng_.save(os);
    os << '\n';
}

void Environment::load(std::istream& is) {
    is >> draw_counter_ >> shock_epoch_;
    is.ignore(1);
    for (auto& e : eds_) {
        is.read(reinterpret_cast<char*>(&e.x_m), sizeof(double));
        is.read(reinterpret_cast<char*>(&e.y_m), sizeof(double));
        is.read(reinterpret_cast<char*>(&e.speed_mps), sizeof(double));
    }
    is.ignore(1);
    fading_.load(is);
    mobility_rng_.load(is);
    shock_rng_.load(is);
    // Gains are derived state: recompute the realization the counters point at.
    if (cfg_.fading_cadence != FadingCadence::Static) --draw_counter_;
    refresh_gains();
}

}  // namespace deeprat::env
