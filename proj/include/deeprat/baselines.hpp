#pragma once

#include <string>
#include <vector>

#include "deeprat/env.hpp"
#include "deeprat/rng.hpp"

namespace deeprat::baselines {

using env::Assignment;
using env::EdQosProfile;
using env::Mat;
using env::NetworkSnapshot;
using env::NormalizationSpec;
using env::PowerAlloc;
using env::RatRadioProfile;

enum class BaselineKind { MultiMode, RandomAssign, FixedEqualPower, ConvexOracle };

std::string baseline_name(BaselineKind k);

// Each ED joins the single RAT with the highest per-link utility in the given
// snapshot; ties go to the lowest RAT index. The snapshot is expected to carry
// utility estimates for every link (an all-ones probe).
Assignment multi_mode_assign(const NetworkSnapshot& snapshot);

// Exactly one uniformly random RAT per ED.
Assignment random_assign(int n_eds, int n_rats, rng::Stream& rs);

// x = all-ones, p_lu = P_l^max / U.
std::pair<Assignment, PowerAlloc> fixed_equal_power(
    int n_eds, const std::vector<RatRadioProfile>& rats);

// Euclidean projection onto { p >= 0, sum p <= budget }.
std::vector<double> project_budget_box(std::vector<double> v, double budget);

struct OracleResult {
    PowerAlloc powers;
    std::vector<double> kkt_residual;  // per RAT
    std::vector<int> iterations;       // per RAT
    bool converged = true;             // all RATs below tolerance
};

struct OracleOptions {
    double kkt_tol = 1e-6;
    int max_iters = 100000;
    bool parallel = true;
};

// Power allocation maximizing the P1 objective at a fixed assignment by
// projected gradient ascent with backtracking line search. Works on the true
// instantaneous gains; C3 is not part of the model (the benchmark may violate
// QoS, as the reference schemes do).
OracleResult convex_power_oracle(const Assignment& assign, const Mat& gains,
                                 const std::vector<RatRadioProfile>& rats,
                                 const std::vector<EdQosProfile>& qos,
                                 const NormalizationSpec& norm,
                                 const OracleOptions& opt = {});

// Objective value the oracle maximizes: sum of assigned-link utilities at the
// given powers/gains with occupancy from the assignment.
double oracle_objective(const Assignment& assign, const Mat& gains,
                        const PowerAlloc& powers,
                        const std::vector<RatRadioProfile>& rats,
                        const std::vector<EdQosProfile>& qos,
                        const NormalizationSpec& norm);

}  // namespace deeprat::baselines
