#include "deeprat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace deeprat::baselines {

std::string baseline_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::MultiMode: return "multi_mode";
        case BaselineKind::RandomAssign: return "random";
        case BaselineKind::FixedEqualPower: return "fixed";
        case BaselineKind::ConvexOracle: return "convex";
    }
    throw std::invalid_argument("unknown baseline kind");
}

Assignment multi_mode_assign(const NetworkSnapshot& snapshot) {
    const int U = snapshot.utilities.rows, L = snapshot.utilities.cols;
    Assignment a(U, L);
    for (int u = 0; u < U; ++u) {
        int best = 0;
        for (int l = 1; l < L; ++l)
            if (snapshot.utilities.at(u, l) > snapshot.utilities.at(u, best)) best = l;
        a.at(u, best) = 1;
    }
    return a;
}

Assignment random_assign(int n_eds, int n_rats, rng::Stream& rs) {
    Assignment a(n_eds, n_rats);
    for (int u = 0; u < n_eds; ++u)
        a.at(u, int(rs.uniform_int(std::uint64_t(n_rats)))) = 1;
    return a;
}

std::pair<Assignment, PowerAlloc> fixed_equal_power(
    int n_eds, const std::vector<RatRadioProfile>& rats) {
    const int L = int(rats.size());
    Assignment a(n_eds, L);
    PowerAlloc p(n_eds, L);
    for (int u = 0; u < n_eds; ++u)
        for (int l = 0; l < L; ++l) {
            a.at(u, l) = 1;
            p.at(u, l) = rats[l].max_power_w / n_eds;
        }
    return {a, p};
}

std::vector<double> project_budget_box(std::vector<double> v, double budget) {
    // Clip to the orthant; if that already fits the budget it is the
    // projection (the feasible set lies inside the orthant).
    double sum = 0.0;
    for (auto& x : v) {
        x = std::max(0.0, x);
        sum += x;
    }
    if (sum <= budget) return v;

    // Otherwise project onto { p >= 0, sum p = budget } (scaled simplex),
    // sort-based threshold.
    std::vector<double> s(v);
    std::sort(s.begin(), s.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int rho = 0;
    for (int j = 0; j < int(s.size()); ++j) {
        cum += s[j];
        const double t = (cum - budget) / double(j + 1);
        if (s[j] - t > 0.0) {
            rho = j + 1;
            tau = t;
        }
    }
    for (auto& x : v) x = std::max(0.0, x - tau);
    (void)rho;
    return v;
}

namespace {

// Per-RAT concave program: maximize sum_u w_u * B log2(1 + c_u p_u) subject to
// p >= 0, sum p <= P_max, where B = W/|U_l| and c_u = g_u / (B sigma^2).
struct RatProgram {
    std::vector<int> eds;       // assigned ED indices
    std::vector<double> w;      // utility weight per assigned link
    std::vector<double> c;      // SNR slope per Watt
    double bandwidth_share = 0.0;
    double budget = 0.0;

    double objective(const std::vector<double>& p) const {
        double f = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            f += w[i] * bandwidth_share * std::log2(1.0 + c[i] * p[i]);
        return f;
    }
    void gradient(const std::vector<double>& p, std::vector<double>& g) const {
        constexpr double kInvLn2 = 1.4426950408889634;
        for (std::size_t i = 0; i < p.size(); ++i)
            g[i] = w[i] * bandwidth_share * kInvLn2 * c[i] / (1.0 + c[i] * p[i]);
    }
};

// max(active |grad - lambda|, inactive max(0, grad - lambda)).
double kkt_residual(const RatProgram& prog, const std::vector<double>& p,
                    const std::vector<double>& grad) {
    double sum = 0.0;
    for (double x : p) sum += x;
    const double slack = prog.budget - sum;

    double lambda = 0.0;
    if (slack <= 1e-9 * std::max(prog.budget, 1.0)) {
        int n_active = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0.0) {
                lambda += grad[i];
                ++n_active;
            }
        }
        lambda = n_active > 0 ? std::max(0.0, lambda / n_active) : 0.0;
    }

    double res = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0)
            res = std::max(res, std::abs(grad[i] - lambda));
        else
            res = std::max(res, std::max(0.0, grad[i] - lambda));
    }
    return res;
}

struct RatSolve {
    std::vector<double> p;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

RatSolve solve_rat(const RatProgram& prog, const OracleOptions& opt) {
    RatSolve out;
    const std::size_t n = prog.w.size();
    out.p.assign(n, 0.0);
    if (n == 0) {
        out.converged = true;
        return out;
    }

    std::vector<double> grad(n), cand(n);
    prog.gradient(out.p, grad);
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    double step = gmax > 0.0 ? prog.budget / gmax : 1.0;
    double f = prog.objective(out.p);

    for (out.iterations = 0; out.iterations < opt.max_iters; ++out.iterations) {
        prog.gradient(out.p, grad);
        out.residual = kkt_residual(prog, out.p, grad);
        if (out.residual < opt.kkt_tol) {
            out.converged = true;
            return out;
        }

        // Backtracking on the projection arc; accept only ascent steps so the
        // objective is non-decreasing across iterations.
        bool moved = false;
        for (int bt = 0; bt < 60; ++bt) {
            double displacement = 0.0;
            for (std::size_t i = 0; i < n; ++i) cand[i] = out.p[i] + step * grad[i];
            cand = project_budget_box(std::move(cand), prog.budget);
            double dir_deriv = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dir_deriv += grad[i] * (cand[i] - out.p[i]);
                displacement = std::max(displacement, std::abs(cand[i] - out.p[i]));
            }
            if (displacement == 0.0) break;  // projection fixed point
            const double f_cand = prog.objective(cand);
            if (f_cand >= f + 1e-4 * dir_deriv && f_cand >= f) {
                out.p.swap(cand);
                f = f_cand;
                moved = true;
                step = std::min(step * 2.0, 1e12);
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // stalled at line-search resolution
    }
    prog.gradient(out.p, grad);
    out.residual = kkt_residual(prog, out.p, grad);
    out.converged = out.residual < opt.kkt_tol;
    return out;
}

}  // namespace

OracleResult convex_power_oracle(const Assignment& assign, const Mat& gains,
                                 const std::vector<RatRadioProfile>& rats,
                                 const std::vector<EdQosProfile>& qos,
                                 const NormalizationSpec& norm,
                                 const OracleOptions& opt) {
    const int U = assign.n_eds, L = assign.n_rats;
    OracleResult res;
    res.powers = PowerAlloc(U, L);
    res.kkt_residual.assign(L, 0.0);
    res.iterations.assign(L, 0);

    std::vector<RatProgram> programs(L);
    for (int l = 0; l < L; ++l) {
        auto& prog = programs[l];
        const int occ = assign.assigned_count(l);
        if (occ == 0) continue;
        prog.bandwidth_share = rats[l].bandwidth_hz / occ;
        prog.budget = rats[l].max_power_w;
        for (int u = 0; u < U; ++u) {
            if (!assign.at(u, l)) continue;
            prog.eds.push_back(u);
            prog.w.push_back(qos[u].alpha / norm.r_max_bps -
                             qos[u].gamma * rats[l].price_per_bit / norm.c_max_eur_s);
            prog.c.push_back(gains.at(u, l) /
                             (prog.bandwidth_share * rats[l].noise_psd_w_hz));
        }
    }

    std::vector<RatSolve> solves(L);
#pragma omp parallel for if (opt.parallel)
    for (int l = 0; l < L; ++l) solves[l] = solve_rat(programs[l], opt);

    res.converged = true;
    for (int l = 0; l < L; ++l) {
        res.kkt_residual[l] = solves[l].residual;
        res.iterations[l] = solves[l].iterations;
        res.converged = res.converged && solves[l].converged;
        for (std::size_t i = 0; i < programs[l].eds.size(); ++i)
            res.powers.at(programs[l].eds[i], l) = solves[l].p[i];
    }
    return res;
}

double oracle_objective(const Assignment& assign, const Mat& gains,
                        const PowerAlloc& powers,
                        const std::vector<RatRadioProfile>& rats,
                        const std::vector<EdQosProfile>& qos,
                        const NormalizationSpec& norm) {
    double total = 0.0;
    for (int l = 0; l < assign.n_rats; ++l) {
        const int occ = assign.assigned_count(l);
        if (occ == 0) continue;
        for (int u = 0; u < assign.n_eds; ++u) {
            if (!assign.at(u, l)) continue;
            const double r = env::link_rate(rats[l].bandwidth_hz, occ, gains.at(u, l),
                                            powers.at(u, l), rats[l].noise_psd_w_hz);
            const double c = env::monetary_cost(rats[l].price_per_bit, r);
            total += env::link_utility(qos[u], r, c, norm);
        }
    }
    return total;
}

}  // namespace deeprat::baselines
