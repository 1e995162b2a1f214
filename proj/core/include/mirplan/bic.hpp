#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mirplan/instance.hpp"
#include "mirplan/simulator.hpp"

namespace mirplan {

// Hidden-exploration parameters: every element of A+ beats all others by at
// least xi with probability more than gamma, and phases last
// B = ceil(H / (xi gamma)) + 1 rounds.
struct BicConfig {
    double xi = 0.0;
    double gamma = 0.0;
    int phase_length = 0;  // B
    double support_bound = 0.0;
};

// Validation helpers for the strategic-agents assumptions. Each returns an
// empty string when satisfied and a diagnostic otherwise.
std::string check_assumption_dominance(const Instance& instance);   // arms totally ordered
std::string check_assumption_support(const Instance& instance);     // Pr(X_i < mu_j) > 0
std::string check_assumption_default_superior(const Instance& instance);

// Best arm in conditional expectation over A+; realized values win over
// prior means, ties go to the default arm, then to the lowest index.
int greedy_recommendation(const Instance& instance, const InformationSet& info);

// Grid search maximizing xi * gamma(xi) with
// gamma(xi) = min_i prod_{i' != i} Pr(X_{i'} < mu_i - xi).
// Throws when the support assumption fails, naming the offending pair.
BicConfig compute_xi_gamma(const Instance& instance);

struct BicRound {
    int t = 0;
    Portfolio portfolio;     // singleton for fixed recommendations
    int recommendation = kDefaultArm;
    int action = kDefaultArm;  // obedient agents follow the recommendation
    double reward = 0.0;
    double certificate = 0.0;
    int phase_index = 0;  // 0 before the phase split
    bool explorer = false;
    Phase engine_phase = Phase::OgpExploration;
};

struct BicTrace {
    std::vector<BicRound> rounds;
    int horizon = 0;
    double total_reward = 0.0;
    BicConfig config;
    double default_value = 0.0;
    double welfare() const { return horizon > 0 ? total_reward / horizon : 0.0; }
};

// Incentive-compatible wrapper: default arm first, a greedy or default
// burst for the next K agents, then phases of B rounds hiding at most one
// exploration recommendation each.
BicTrace run_bic_iregb(const Instance& instance, const BicConfig& config, int horizon, Rng& rng);
BicTrace run_bic_iregb(const Instance& instance, int horizon, Rng& rng);

// Welfare-only fast path used by estimate_welfare.
double run_bic_welfare(const Instance& instance, int horizon, Rng& rng);
double run_bic_welfare(const Instance& instance, const BicConfig& config, int horizon, Rng& rng);

enum class BeliefMode { InformativeOrder, UniformBelief };

struct BicAuditCell {
    int t = 0;  // 0 in uniform-belief mode
    int recommended = kDefaultArm;
    int alternative = kDefaultArm;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long n = 0;
    bool flagged = false;  // upper confidence bound below zero
    bool sparse = false;   // fewer than 30 samples
};

struct BicAuditReport {
    std::vector<BicAuditCell> cells;
    int flagged_count = 0;
    int sparse_count = 0;
};

// Monte Carlo estimate of E[X(a_l) - X(a_i) | m^t = a_l] for every
// alternative, with 99% normal-approximation confidence intervals.
BicAuditReport audit_bic(const Instance& instance, Mechanism mech, int horizon,
                         long long replications, std::uint64_t seed,
                         BeliefMode mode = BeliefMode::InformativeOrder, int threads = 0);

// True iff no realized recommendation ever had zero conditional probability
// of a positive reward. The default arm is the agents' own fallback and is
// exempt from the audit.
bool audit_harmless(const SimTrace& trace, const Instance& instance);
bool audit_harmless(const BicTrace& trace, const Instance& instance);

}  // namespace mirplan
