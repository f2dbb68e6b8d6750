#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "levystop/levy_model.hpp"
#include "levystop/threshold.hpp"

namespace levystop {

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-3;                ///< Brownian step; jump times are exact
    std::optional<double> horizon;   ///< default 50 / (r - psi(1))
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    /// Stop a path once its remaining contribution is provably below this bound
    /// (0 disables; horizon still applies).
    double tail_tol = 1e-8;
    unsigned threads = 0;            ///< 0: LEVYSTOP_THREADS or hardware concurrency
    std::size_t batch_size = 2048;   ///< fixed partition; results do not depend on threads
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double truncated_fraction = 0.0;
    std::uint64_t seed = 0;
};

struct HitEstimate {
    double level = 0.0;
    McEstimate L, G;
};

/// E[e^{-r T_x}] and E[e^{-r T_x + X_{T_x}}] at one or several levels x < 0 (single pass).
HitEstimate simulate_hit(const LevyModel& model, double r, double x_level, const SimConfig& cfg);
std::vector<HitEstimate> simulate_hit(const LevyModel& model, double r, const std::vector<double>& levels,
                                      const SimConfig& cfg);

struct PolicyEstimate {
    double b = 0.0, v = 0.0;
    McEstimate direct;    ///< pathwise integral of e^{-rs}(alpha V_s - c) up to tau_b
    McEstimate reduced;    ///< alpha v/(r - psi(1)) - c/r + e^{-r tau_b} f(V_{tau_b})
    double diff_se = 0.0; ///< standard error of the paired difference direct - reduced
    bool reconciled = true;  ///< |direct - reduced| <= 4 diff_se
};

PolicyEstimate policy_value(const ProblemSpec& spec, double b, const SimConfig& cfg);
/// Same threshold b, several starting values v, one set of paths.
std::vector<PolicyEstimate> policy_values(const ProblemSpec& spec, double b, const std::vector<double>& vs,
                                          const SimConfig& cfg);

struct SweepResult {
    std::vector<PolicyEstimate> points;  ///< ascending b
    std::size_t argmax = 0;              ///< by the reduced estimator
    std::vector<double> paired_se;       ///< SE of (value[argmax] - value[j])
    std::vector<bool> flat;              ///< value[argmax] - value[j] <= paired_se[j]
    double flat_lo = 0.0, flat_hi = 0.0; ///< b-range of the flat region
};

SweepResult sweep(const ProblemSpec& spec, const std::vector<double>& b_grid, const SimConfig& cfg);

struct EpsilonRun {
    std::vector<double> eps;
    std::vector<EpsilonBoundary> boundary;
    std::vector<McEstimate> tau;          ///< E[tau_eps], censored at the horizon
    McEstimate tau_bc;                     ///< E[tau_{B_c}] on the same paths
    std::vector<double> diff_se;           ///< paired SE of tau_eps - tau_{B_c}
    std::size_t monotonicity_violations = 0;  ///< paths where tau_eps decreased as eps decreased
};

EpsilonRun epsilon_stop_paths(const ValueFunction& vf, const std::vector<double>& eps_desc, const SimConfig& cfg);

struct LadderEstimate {
    double n = 1.0;
    McEstimate value;
};

/// E[e^{-r R_n + X_{R_n}} 1{R_n < inf}], R_n the first time X_t - r t >= ln n.
std::vector<LadderEstimate> class_d_diagnostic(const LevyModel& model, double r, const std::vector<double>& n_levels,
                                               const SimConfig& cfg);

/// Exact draws of X_t (no discretisation), for moment checks.
std::vector<double> simulate_increments(const LevyModel& model, double t, std::size_t n, std::uint64_t seed);

/// Workers used for a given config (after LEVYSTOP_THREADS).
unsigned worker_count(const SimConfig& cfg);

}  // namespace levystop
